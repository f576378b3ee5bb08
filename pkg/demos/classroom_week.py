"""A week of practice on a small arithmetic graph, narrated step by step.

Ada practices addition and subtraction over several days.  The script
shows the three evidence streams at work: her own (time-decayed) practice
data, inference down from the composite "arithmetic" skill's parts, and
the correlation between subtraction and multiplication.  A failure on a
mixed exercise blames the weaker skill more than the stronger one.

    python3 demos/classroom_week.py
"""

import json
import tempfile

from skilltracer.graph import Observation, graph_from_text
from skilltracer.store import Store
from skilltracer.tracker import Tracker

DAY = 86400.0

GRAPH = {
    "skills": [
        {"id": "add", "name": "Addition"},
        {"id": "sub", "name": "Subtraction",
         "correlations": [{"skill": "mul", "n_c": 5}]},
        {"id": "mul", "name": "Multiplication",
         "correlations": [{"skill": "sub", "n_c": 5}]},
        {"id": "arith", "name": "Arithmetic", "setup": "and(add, sub)"},
    ],
    "exercises": [
        {"id": "ex-add", "setup": "add"},
        {"id": "ex-sub", "setup": "sub"},
        {"id": "ex-mixed", "setup": "and(add, sub)"},
    ],
}

SCRIPT = [
    (0.0, "ex-add", "success", "day 1: first addition exercise goes well"),
    (0.1, "ex-add", "success", "day 1: and again"),
    (1.0, "ex-sub", "failure", "day 2: subtraction stumbles"),
    (2.0, "ex-sub", "success", "day 3: subtraction recovers"),
    (4.0, "ex-mixed", "failure", "day 5: a mixed exercise fails"),
]


def show(tracker, student, skill, now):
    p = tracker.posterior(student, skill, now)
    lo, hi = p.interval
    print(f"    {skill:<6} mean {p.mean:.3f}  90% [{lo:.3f}, {hi:.3f}]")
    for source in p.trace:
        extra = f" from {','.join(source.skills)}" if source.skills else ""
        print(f"      <- {source.source}{extra}: mean {source.mean:.3f}")


def main():
    with tempfile.TemporaryDirectory() as root:
        graph, report = graph_from_text(json.dumps(GRAPH))
        assert report.ok, report.errors
        tracker = Tracker(graph, Store(root))
        tracker.add_student("ada")

        for day, exercise, outcome, caption in SCRIPT:
            at = 1000.0 + day * DAY
            print(f"\n{caption}")
            before = {
                s: tracker.posterior("ada", s, at).mean
                for s in ("add", "sub", "mul", "arith")
            }
            tracker.record(Observation("ada", exercise, outcome, at))
            for skill in ("add", "sub", "mul", "arith"):
                after = tracker.posterior("ada", skill, at).mean
                delta = after - before[skill]
                marker = f"  ({delta:+.3f})" if abs(delta) > 5e-4 else ""
                print(f"    {skill:<6} mean {after:.3f}{marker}")

        now = 1000.0 + 5 * DAY
        print("\nday 6: full posterior picture with evidence traces")
        for skill in ("add", "sub", "mul", "arith"):
            show(tracker, "ada", skill, now)

        print("\nday 6: what should Ada practice next (target window 40-80%)?")
        for exercise, expected in tracker.recommend("ada", now):
            print(f"    {exercise:<9} expected success {expected:.3f}")


if __name__ == "__main__":
    main()
