"""Replay fixed success/failure tallies and watch the posterior sharpen.

Three students answer the same single-skill exercise with a 60% success
rate but different amounts of practice.  With no time between attempts the
posterior is an exact Beta(s+1, f+1): same mean, tighter distribution as
evidence accumulates.

    python3 demos/single_skill_replay.py [--out curves.png]
"""

import argparse

import numpy as np

from skilltracer import basis
from skilltracer.basis import BasisCoefficients
from skilltracer.observe import update_binary

TALLIES = [(2, 1), (14, 9), (29, 19)]


def replay(successes, failures):
    c = BasisCoefficients.flat()
    for _ in range(successes):
        c = update_binary(c, "success")
    for _ in range(failures):
        c = update_binary(c, "failure")
    return c


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", help="write the pdf curves to this PNG file")
    args = parser.parse_args()

    x = np.linspace(0.0, 1.0, 501)
    curves = []
    print(f"{'tally':>10} {'order':>6} {'mean':>8} {'pdf peak':>9} {'90% interval':>16}")
    for s, f in TALLIES:
        c = replay(s, f)
        pdf = basis.pdf_at(c, x)
        lo, hi = basis.quantile(c, 0.05), basis.quantile(c, 0.95)
        curves.append((f"{s} of {s + f}", pdf))
        print(f"{s:>4}+ {f:>3}- {c.order:>6} {basis.mean(c):>8.4f} "
              f"{x[np.argmax(pdf)]:>9.3f} [{lo:.3f}, {hi:.3f}]")

    if args.out:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(6, 4))
        for label, pdf in curves:
            ax.plot(x, pdf, label=label)
        ax.set_xlabel("success rate")
        ax.set_ylabel("density")
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.out, dpi=120)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
