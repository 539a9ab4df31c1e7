"""Command-line entry point.

Subcommands:

* ``run``          one (algorithm, occupancy, seed) cell -> report file
* ``batch``        full experiment grid -> report file + per-cell summary
* ``oracle-check`` search-vs-brute-force suite on random instances
* ``report``       figures + summary from an existing report file

Exit codes: 0 success, 1 usage error, 2 validation error, 3 oracle
mismatch. Repeated invocations with identical flags write byte-identical
output files.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .analytics import REPORT_HEADER, SUMMARY_HEADER, parse_report_rows, summarize_rows
from .engine import event_log_rows, hazard_trace_rows
from .pipeline import (
    ExperimentConfig,
    run_cell,
    run_cell_detailed,
    run_experiment,
)
from .scenario import Scenario, ScenarioError, load_scenario

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_ORACLE_MISMATCH = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # usage errors exit 1, not 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="evacsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment cell")
    run_p.add_argument("--scenario", required=True, help="scenario document path")
    run_p.add_argument(
        "--algorithm", required=True, choices=("dsp", "cpnst", "cpnst-td")
    )
    run_p.add_argument("--evacuees", type=int, default=None,
                       help="override the scenario occupancy count")
    run_p.add_argument("--seed", type=int, default=0, help="cell seed")
    run_p.add_argument("--out", required=True, help="report file to write")
    run_p.add_argument("--fire-replay", choices=("shared", "independent"),
                       default="shared")
    run_p.add_argument("--reassign-static-timeline", action="store_true",
                       help="do not feed committed repair routes back into the queue record")
    run_p.add_argument("--tick-cap", type=int, default=None)
    run_p.add_argument("--event-log", default=None, help="optional event log path")
    run_p.add_argument("--hazard-trace", default=None, help="optional hazard trace path")
    run_p.add_argument("--plan-trace", default=None,
                       help="optional repair-route dump (cpnst-td only)")

    batch_p = sub.add_parser("batch", help="run the experiment grid")
    batch_p.add_argument("--scenario", required=True)
    batch_p.add_argument("--algorithms", default="dsp,cpnst,cpnst-td",
                         help="comma-separated algorithm list")
    batch_p.add_argument("--occupancies", default="30,60,90,120",
                         help="comma-separated occupancy list")
    batch_p.add_argument("--runs", type=int, default=5)
    batch_p.add_argument("--seed", type=int, default=0, help="base seed")
    batch_p.add_argument("--out", required=True)
    batch_p.add_argument("--fire-replay", choices=("shared", "independent"),
                         default="shared")
    batch_p.add_argument("--reassign-static-timeline", action="store_true")
    batch_p.add_argument("--tick-cap", type=int, default=None)
    batch_p.add_argument("--workers", type=int, default=1)

    oracle_p = sub.add_parser("oracle-check",
                              help="compare the time-dependent search against brute force")
    oracle_p.add_argument("--count", type=int, default=200)
    oracle_p.add_argument("--seed", type=int, default=0)

    report_p = sub.add_parser("report", help="render figures from a report file")
    report_p.add_argument("--in", dest="input", required=True, help="report file")
    report_p.add_argument("--out-dir", required=True, help="directory for figures")

    return parser


def _load_scenario_file(path: str) -> Scenario:
    p = Path(path)
    if not p.is_file():
        raise ScenarioError(f"scenario file not found: {path}")
    return load_scenario(p.read_text(encoding="utf-8"))


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        template = _load_scenario_file(args.scenario)
    except ScenarioError as exc:
        print(f"evacsim: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    # --evacuees regenerates the occupancy from the derived cell seed;
    # without it the scenario document's own placements are used.
    positions = template.initial_positions if args.evacuees is None else None
    occupancy = args.evacuees if args.evacuees is not None else template.evacuee_count
    config = ExperimentConfig(
        occupancies=(occupancy,),
        runs=1,
        seed_base=args.seed,
        algorithms=(args.algorithm,),
        fire_replay="shared-seed" if args.fire_replay == "shared" else "independent",
        update_reassign_timeline=not args.reassign_static_timeline,
        tick_cap=args.tick_cap,
    )
    row, outcome, plan = run_cell_detailed(
        template,
        args.algorithm,
        occupancy,
        0,
        config,
        positions=positions,
        record_events=bool(args.event_log),
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        fh.write(REPORT_HEADER + "\n")
        fh.write(row.to_csv() + "\n")
    if args.event_log:
        path = Path(args.event_log)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            fh.write("tick,evacuee,event,vertex\n")
            for tick, eid, kind, vid in event_log_rows(outcome):
                fh.write(f"{tick},{eid},{kind},{vid}\n")
    if args.hazard_trace:
        path = Path(args.hazard_trace)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            fh.write("vertex,tick,intensity\n")
            for vid, tick, value in hazard_trace_rows(outcome):
                fh.write(f"{vid},{tick},{value:.6f}\n")
    if args.plan_trace:
        from .routing import timed_path_rows

        path = Path(args.plan_trace)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            fh.write("evacuee,step,vertex,planned_tick\n")
            if plan is not None:
                for eid, step, vid, tick in timed_path_rows(plan.reassigned):
                    fh.write(f"{eid},{step},{vid},{tick}\n")
    print(row.to_csv())
    return EXIT_OK


def _cmd_batch(args: argparse.Namespace) -> int:
    try:
        template = _load_scenario_file(args.scenario)
        algorithms = tuple(a.strip() for a in args.algorithms.split(",") if a.strip())
        occupancies = tuple(int(x) for x in args.occupancies.split(",") if x.strip())
        config = ExperimentConfig(
            occupancies=occupancies,
            runs=args.runs,
            seed_base=args.seed,
            algorithms=algorithms,
            fire_replay="shared-seed" if args.fire_replay == "shared" else "independent",
            update_reassign_timeline=not args.reassign_static_timeline,
            tick_cap=args.tick_cap,
        )
    except (ScenarioError, ValueError) as exc:
        print(f"evacsim: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    rows = []
    with out.open("w", encoding="utf-8") as fh:
        fh.write(REPORT_HEADER + "\n")
        fh.flush()
        if args.workers <= 1:
            from .pipeline import iter_cells

            for cell in iter_cells(template, config):
                row = run_cell(*cell)
                rows.append(row)
                fh.write(row.to_csv() + "\n")
                fh.flush()
        else:
            rows = run_experiment(template, config, workers=args.workers)
            for row in rows:
                fh.write(row.to_csv() + "\n")
                fh.flush()

    summary_path = out.with_suffix(out.suffix + ".summary.csv")
    with summary_path.open("w", encoding="utf-8") as fh:
        fh.write(SUMMARY_HEADER + "\n")
        for srow in summarize_rows(rows):
            fh.write(srow.to_csv() + "\n")
    print(f"wrote {len(rows)} rows to {out} and summary to {summary_path}")
    return EXIT_OK


def _cmd_oracle_check(args: argparse.Namespace) -> int:
    from . import oracle

    if args.count <= 0:
        print("oracle-check: no instances")
        return EXIT_OK
    total, mismatches = oracle.run_oracle_check(args.count, args.seed)
    if not mismatches:
        print(f"oracle-check: {total} instances, all exit arrivals exact")
        return EXIT_OK
    for mm in mismatches:
        print(
            f"oracle-check: MISMATCH seed={mm.seed} search={mm.search_tick} "
            f"brute-force={mm.brute_tick}",
            file=sys.stderr,
        )
        print(mm.instance.to_json(), file=sys.stderr)
    print(
        f"oracle-check: {len(mismatches)} of {total} instances disagree",
        file=sys.stderr,
    )
    return EXIT_ORACLE_MISMATCH


def _cmd_report(args: argparse.Namespace) -> int:
    path = Path(args.input)
    if not path.is_file():
        print(f"evacsim: report file not found: {path}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        rows = parse_report_rows(path.read_text(encoding="utf-8").splitlines())
    except ValueError as exc:
        print(f"evacsim: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    from .report import render_report

    written = render_report(rows, Path(args.out_dir))
    for item in written:
        print(f"wrote {item}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "batch":
        return _cmd_batch(args)
    if args.command == "oracle-check":
        return _cmd_oracle_check(args)
    if args.command == "report":
        return _cmd_report(args)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
