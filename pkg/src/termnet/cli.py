"""Command line around the simulator.

Subcommands::

    termnet run SCENARIO.json     simulate, write report/trace/series files
    termnet campaign              reference 22-agent experiment table
    termnet find-tight N D        search a worst-case persistence witness
    termnet gen-topology KIND N   emit a graph as JSON
    termnet validate SCENARIO     parse and validate without running

Exit codes: 0 success, 2 invalid input, 3 iteration budget exhausted,
4 a protocol check failed, 5 search budget exhausted.  Output locations
come from ``--out`` or the ``TERMNET_OUTPUT_DIR`` environment variable;
nothing else is read from the environment here (the kernel backend picks
up ``TERMNET_BACKEND`` on import).  Reports are plain JSON with sorted
keys and no timestamps, so reruns diff clean.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from .campaign import run_reference_campaign
from .errors import ScenarioError, TermnetError
from .graph import make_topology
from .sim import (TraceConfig, assert_propositions, failed_checks, run,
                  savings_fraction)
from .scenario_io import load_scenario
from .tightness import find_tight_instance

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_EXHAUSTED = 3
EXIT_CHECK_FAILED = 4
EXIT_SEARCH_EXHAUSTED = 5

OUTPUT_DIR_ENV = "TERMNET_OUTPUT_DIR"


def _out_dir(arg: str | None) -> Path:
    path = Path(arg or os.environ.get(OUTPUT_DIR_ENV) or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _write_series(path: Path, report) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "locally_satisfied", "full_vector",
                         "terminated"])
        for idx in range(len(report.counts_locally_satisfied)):
            writer.writerow([
                idx + 1,
                report.counts_locally_satisfied[idx],
                report.counts_full_vector[idx],
                report.counts_stopped[idx],
            ])


def _cmd_run(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except (ScenarioError, TermnetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.execution:
        scenario.execution = args.execution
    out = _out_dir(args.out)
    stem = scenario.name or Path(args.scenario).stem

    trace = None
    if not args.no_trace:
        suffix = "csv" if args.trace_format == "csv" else "jsonl"
        trace = TraceConfig(path=out / f"{stem}.trace.{suffix}",
                            fmt=args.trace_format)
    report = run(scenario, trace=trace)
    checks = assert_propositions(report)

    report_data = report.to_dict()
    report_data["checks"] = [c.__dict__ for c in checks]
    _write_json(out / f"{stem}.report.json", report_data)
    _write_series(out / f"{stem}.series.csv", report)

    for warning in report.warnings:
        print(f"warning: {warning}")
    print(f"scenario {stem}: method={report.method} agents={report.agent_count} "
          f"diameter={report.diameter}")
    if report.common_stop is not None:
        line = (f"terminated simultaneously at iteration {report.common_stop} "
                f"(global criterion at {report.global_iteration})")
        if report.flags.get("reduced_computation"):
            line += f", savings fraction {savings_fraction(report):.3f}"
        print(line)
    elif report.exhausted:
        print(f"iteration budget {scenario.max_iterations} exhausted "
              f"(stops so far: {report.stop_iterations})")
    else:
        print(f"stops: {report.stop_iterations}")
    if report.faulty_agents:
        print(f"faulty agents {report.faulty_agents}: "
              f"max false-entry persistence {report.max_single_persistence}, "
              f"clamped clears {report.clamp_count}, "
              f"accusations {len(report.fault_reports)}")
    for c in checks:
        print(f"[{c.status.upper():4s}] {c.check}: {c.detail}")

    if failed_checks(checks):
        return EXIT_CHECK_FAILED
    if report.exhausted:
        return EXIT_EXHAUSTED
    return EXIT_OK


def _cmd_campaign(args) -> int:
    result = run_reference_campaign(
        topology_seed=args.topology_seed,
        schedule_seed=args.schedule_seed,
        execution=args.execution or "vectorized",
        include_basic=not args.skip_basic,
    )
    out = _out_dir(args.out)
    _write_json(out / "campaign.json", result.to_dict())
    header = (f"{'run':44s} {'stop':>5s} {'want':>5s} {'pers':>4s} "
              f"{'clamp':>5s} accused")
    print(header)
    for row in result.rows:
        print(f"{row.name:44s} {str(row.common_stop):>5s} "
              f"{row.expected_stop:>5d} {row.max_single_persistence:>4d} "
              f"{row.clamp_count:>5d} {row.accused}")
        for name in row.check_failures:
            print(f"    check failed: {name}")
    if not result.all_clean():
        return EXIT_CHECK_FAILED
    return EXIT_OK


def _cmd_find_tight(args) -> int:
    witness = find_tight_instance(args.agents, args.diameter,
                                  budget=args.budget, seed=args.seed)
    if witness is None:
        print(f"no witness for {args.agents} agents, diameter "
              f"{args.diameter} within budget {args.budget}")
        return EXIT_SEARCH_EXHAUSTED
    out = _out_dir(args.out)
    _write_json(out / "tight_witness.json", witness.to_dict())
    print(f"witness: faulty agent {witness.script.agent} asserting subject "
          f"{witness.subject} reaches persistence {witness.persistence} "
          f"(bound {witness.bound})")
    print(f"graph edges: {witness.graph.edges}")
    return EXIT_OK


def _cmd_gen_topology(args) -> int:
    try:
        graph = make_topology(args.kind, args.agents,
                              edge_prob=args.edge_prob, seed=args.seed,
                              diameter=args.diameter)
    except TermnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    data = graph.to_dict()
    data["diameter"] = graph.diameter()
    text = json.dumps(data, indent=2, sort_keys=True)
    if args.out_file and args.out_file != "-":
        Path(args.out_file).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except (ScenarioError, TermnetError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    for warning in scenario.validate():
        print(f"warning: {warning}")
    print(f"ok: {args.scenario} (method={scenario.method}, "
          f"agents={scenario.agent_count}, faults={len(scenario.faults)})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="termnet",
        description="distributed termination detection simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a scenario file")
    p.add_argument("scenario", help="path to a scenario JSON file")
    p.add_argument("--out", help="output directory (default: "
                   f"${OUTPUT_DIR_ENV} or current directory)")
    p.add_argument("--execution", choices=("vectorized", "serial", "parallel"),
                   help="override the scenario's execution route")
    p.add_argument("--trace-format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--no-trace", action="store_true",
                   help="skip writing the per-agent trace")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("campaign", help="run the reference experiment table")
    p.add_argument("--out", help="output directory")
    p.add_argument("--execution", choices=("vectorized", "serial", "parallel"))
    p.add_argument("--topology-seed", type=int, default=0)
    p.add_argument("--schedule-seed", type=int, default=7)
    p.add_argument("--skip-basic", action="store_true",
                   help="omit the basic-method baseline row")
    p.set_defaults(func=_cmd_campaign)

    p = sub.add_parser("find-tight",
                       help="search a worst-case persistence witness")
    p.add_argument("agents", type=int)
    p.add_argument("diameter", type=int)
    p.add_argument("--budget", type=int, default=400,
                   help="max simulated candidate placements")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=_cmd_find_tight)

    p = sub.add_parser("gen-topology", help="emit a graph as JSON")
    p.add_argument("kind", choices=("ring", "path", "star", "complete",
                                    "random", "random_diameter"))
    p.add_argument("agents", type=int)
    p.add_argument("--edge-prob", type=float, default=0.2)
    p.add_argument("--seed", type=int)
    p.add_argument("--diameter", type=int,
                   help="target diameter (random_diameter only)")
    p.add_argument("--out-file", help="write here instead of stdout ('-')")
    p.set_defaults(func=_cmd_gen_topology)

    p = sub.add_parser("validate", help="check a scenario file without running")
    p.add_argument("scenario")
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TermnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
