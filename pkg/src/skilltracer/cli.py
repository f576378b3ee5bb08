"""Command-line front door.

Subcommands: serve (HTTP service), validate (graph definition check),
replay (rebuild states from an observation log), simulate (synthetic
cohort and calibration report), oracle-check (update laws vs brute-force
oracles), explain (evidence trace for one student and skill).

Exit codes: 0 success; 1 unexpected internal error; 2 usage or unreadable
input; 3 validation failure (graph, config, unknown ids); 4 corrupt store
record; 5 oracle deviation above threshold.
"""

from __future__ import annotations

import argparse
import sys
import tempfile
from pathlib import Path

from . import basis, oraclesuite, serialize, simulator
from .config import ConfigError, load_config
from .errors import CorruptRecordError, SkillTracerError
from .graph import Observation, graph_from_text
from .store import Store, read_framed
from .tracker import Tracker

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_INVALID = 3
EXIT_CORRUPT = 4
EXIT_ORACLE = 5


def _print_report(report) -> None:
    for err in report.errors:
        print(f"error {err['code']} at {err['where']}: {err['message']}")
    for warn in report.warnings:
        print(f"warning {warn['code']} at {warn['where']}: {warn['message']}")


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as err:
        print(f"cannot read {path}: {err}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _load_graph(path: str):
    graph, report = graph_from_text(_read_text(path))
    _print_report(report)
    if graph is None:
        raise SystemExit(EXIT_INVALID)
    return graph


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    try:
        config = load_config(args.config)
        app = create_app(config, ui_dir=args.ui)
    except (ConfigError, SkillTracerError) as err:
        print(f"cannot start: {err}", file=sys.stderr)
        return EXIT_INVALID
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return EXIT_OK


def cmd_validate(args) -> int:
    graph, report = graph_from_text(_read_text(args.graph))
    _print_report(report)
    if graph is None:
        return EXIT_INVALID
    print(f"OK: {len(graph.skills)} skills, {len(graph.exercises)} exercises")
    return EXIT_OK


def cmd_replay(args) -> int:
    graph = _load_graph(args.graph)
    with tempfile.TemporaryDirectory() as scratch:
        root = args.store if args.store else scratch
        store = Store(root)
        tracker = Tracker(graph, store)
        count = 0
        try:
            for _, record in read_framed(Path(args.log)):
                obs = Observation.from_record(record)
                tracker.add_student(obs.student)
                tracker.record(obs, record.get("request_key"))
                count += 1
        except CorruptRecordError as err:
            print(f"corrupt log record: {err}", file=sys.stderr)
            return EXIT_CORRUPT
        except SkillTracerError as err:
            print(f"replay rejected: {err}", file=sys.stderr)
            return EXIT_INVALID
        tracker.flush()
        print(f"replayed {count} observations")
        for student in tracker.students():
            states = tracker.stored_states(student)
            for skill in sorted(states):
                state = states[skill]
                print(f"{student} {skill} mean={basis.mean(state.coeffs):.6f} "
                      f"order={state.coeffs.order} count={state.practice_count}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.students < 1:
        print("--students must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    if args.steps < 1:
        print("--steps must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    if args.graph:
        graph = _load_graph(args.graph)
    else:
        graph = simulator.default_calibration_graph()
    try:
        config = simulator.CohortConfig(
            steps=args.steps,
            mean_gap=args.gap_days * simulator.DAY,
            drift_sigma=args.drift,
        )
    except ValueError as err:
        print(str(err), file=sys.stderr)
        return EXIT_USAGE
    scripts = simulator.gen_cohort(graph, args.students, args.seed, config)
    result = simulator.run(graph, scripts)
    report = simulator.calibration_report(result)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            for step in result.steps:
                fh.write(serialize.dumps({
                    "student": step.student,
                    "exercise": step.exercise,
                    "at": step.at,
                    "prediction": step.prediction,
                    "outcome": step.outcome,
                }) + "\n")
    if args.json:
        print(serialize.dumps(report.to_dict()))
    else:
        print(report.render())
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    results = oraclesuite.run_suite(cases=args.cases, seed=args.seed)
    if args.json:
        print(serialize.dumps([r.to_dict() for r in results]))
    else:
        for r in results:
            status = "ok" if r.ok else "FAIL"
            print(f"{r.op:16s} cases={r.cases} max_l1={r.max_l1:.3e} "
                  f"threshold={r.threshold:.0e} {status}")
    if all(r.ok for r in results):
        if not args.json:
            print("all update laws within thresholds")
        return EXIT_OK
    print("oracle deviation above threshold", file=sys.stderr)
    return EXIT_ORACLE


def cmd_explain(args) -> int:
    store = Store(args.store)
    text = store.load_graph()
    if text is None:
        print(f"store {args.store} has no graph", file=sys.stderr)
        return EXIT_INVALID
    graph, report = graph_from_text(text)
    if graph is None:
        _print_report(report)
        return EXIT_INVALID
    try:
        tracker = Tracker(graph, store)
        if not tracker.has_student(args.student):
            print(f"unknown student {args.student!r}", file=sys.stderr)
            return EXIT_INVALID
        at = args.at if args.at is not None else tracker.last_activity(args.student)
        post = tracker.posterior(args.student, args.skill, at)
    except CorruptRecordError as err:
        print(f"corrupt store record: {err}", file=sys.stderr)
        return EXIT_CORRUPT
    except SkillTracerError as err:
        print(f"{err}", file=sys.stderr)
        return EXIT_INVALID
    print(f"{args.student} {args.skill} at {at:.3f}")
    for src in post.trace:
        extra = ""
        if src.skills:
            extra += " from " + ",".join(src.skills)
        if src.n_c is not None:
            extra += f" (n_c={src.n_c})"
        print(f"  {src.source:10s} mean={src.mean:.6f}{extra}")
    lo, hi = post.interval
    print(f"  merged     mean={post.mean:.6f} interval=[{lo:.6f}, {hi:.6f}]")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skilltracer",
        description="Per-student skill success-rate tracking",
        epilog="exit codes: 0 ok, 2 usage, 3 validation, 4 corrupt store, "
               "5 oracle threshold",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--ui", default=None,
                   help="directory with a dashboard build to mount at /ui")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("validate", help="validate a graph definition")
    p.add_argument("graph", help="graph definition file")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("replay", help="rebuild states from an observation log")
    p.add_argument("log", help="framed observation log")
    p.add_argument("--graph", required=True, help="graph definition file")
    p.add_argument("--store", default=None,
                   help="store directory to build (default: scratch)")
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("simulate", help="synthetic cohort calibration run")
    p.add_argument("--students", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=60)
    p.add_argument("--gap-days", type=float, default=7.0,
                   help="mean days between observations")
    p.add_argument("--drift", type=float, default=0.0,
                   help="logit-scale drift sigma per step")
    p.add_argument("--graph", default=None,
                   help="graph definition file (default: single skill)")
    p.add_argument("--trace", default=None, help="per-step trace output file")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("oracle-check", help="verify update laws against oracles")
    p.add_argument("--cases", type=int, default=oraclesuite.DEFAULT_CASES)
    p.add_argument("--seed", type=int, default=oraclesuite.DEFAULT_SEED)
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.set_defaults(fn=cmd_oracle_check)

    p = sub.add_parser("explain", help="print the evidence trace for a skill")
    p.add_argument("student")
    p.add_argument("skill")
    p.add_argument("--store", required=True, help="store directory")
    p.add_argument("--at", type=float, default=None,
                   help="query instant (default: student's last activity)")
    p.set_defaults(fn=cmd_explain)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.fn(args)
    except SystemExit as err:
        if err.code is None:
            return EXIT_OK
        return err.code if isinstance(err.code, int) else EXIT_USAGE
    except CorruptRecordError as err:
        print(f"corrupt store record: {err}", file=sys.stderr)
        return EXIT_CORRUPT


if __name__ == "__main__":
    sys.exit(main())
