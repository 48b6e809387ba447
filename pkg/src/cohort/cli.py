"""Command line entry points: run, serve, replay, bench.

Exit codes: 0 success, 1 expectation failure, 2 configuration or parse error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import bench, linear_fit
from .scenario import ScenarioError, run_scenario
from .session import ConfigError, CorruptLogError, replay

EXIT_OK = 0
EXIT_EXPECTATION_FAILURE = 1
EXIT_CONFIG_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cohort",
        description="Deterministic runtime for coordinated multi-agent embodied conversation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario script and check its expectations")
    run_p.add_argument("--scenario", required=True, help="path to a scenario YAML file")
    run_p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run_p.add_argument("--log", default=None, help="event log path (default: under COHORT_LOG_DIR)")
    run_p.add_argument(
        "--no-figure",
        action="store_true",
        help="skip rendering the final world figure next to the log",
    )

    serve_p = sub.add_parser("serve", help="serve the HTTP API and event stream")
    serve_p.add_argument("--port", type=int, required=True)
    serve_p.add_argument("--scenario", required=True, help="scenario YAML providing the session config")
    serve_p.add_argument("--backend", choices=("scripted", "http"), default=None)
    serve_p.add_argument(
        "--time-dilation",
        type=float,
        default=1.0,
        help="wall seconds per simulated second (0 runs instantly; default 1.0)",
    )
    serve_p.add_argument("--host", default="127.0.0.1")

    replay_p = sub.add_parser("replay", help="rebuild final state from an event log")
    replay_p.add_argument("--log", required=True)

    bench_p = sub.add_parser("bench", help="measure arbitration overhead vs. roster size")
    bench_p.add_argument(
        "--agents",
        required=True,
        help="roster size, or a comma-separated list of sizes (e.g. 2,4,8)",
    )
    bench_p.add_argument("--turns", type=int, required=True)
    bench_p.add_argument("--csv", default=None, help="write rows here, with a PNG figure alongside")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        result = run_scenario(args.scenario, seed=args.seed, log_path=args.log)
    except (ScenarioError, ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    for index, record in enumerate(result.turns):
        selected = " ".join(record.selected) or "(nobody)"
        print(f"turn {index}: {record.trigger.text!r} -> {selected} [{record.reason.value}]")
    print(f"log: {result.log_path}")
    if not args.no_figure and result.log_path is not None:
        from .report import render_world_figure

        figure = render_world_figure(
            result.session.world, result.log_path.with_suffix(".png"), title="Final world"
        )
        print(f"figure: {figure}")
    if not result.passed:
        for failure in result.failures:
            print(f"FAIL {failure}", file=sys.stderr)
        return EXIT_EXPECTATION_FAILURE
    print(f"passed: {len(result.turns)} turns")
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    try:
        app = create_app(args.scenario, time_dilation=args.time_dilation, backend=args.backend)
    except (ScenarioError, ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def _cmd_replay(args: argparse.Namespace) -> int:
    try:
        result = replay(args.log)
    except (CorruptLogError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    print(f"session: {result.session_id}")
    print(f"events: {len(result.events)}")
    print(f"final clock: {result.world.clock_ms} ms")
    print(f"transcript: {len(result.context.transcript)} utterances")
    for agent_id, body in sorted(result.world.agents.items()):
        pose = body.pose
        print(f"  {agent_id}: ({pose.x:.2f}, {pose.y:.2f}) heading {pose.heading_deg:.0f} deg")
    return EXIT_OK


def _cmd_bench(args: argparse.Namespace) -> int:
    try:
        counts = [int(part) for part in args.agents.split(",") if part.strip()]
        if not counts:
            raise ValueError("no roster sizes given")
        rows = [bench(count, args.turns) for count in counts]
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    print(f"{'agents':>8} {'turns':>8} {'mean_ms':>10} {'p95_ms':>10}")
    for row in rows:
        print(f"{row.agents:>8} {row.turns:>8} {row.mean_ms:>10.3f} {row.p95_ms:>10.3f}")
    if len(rows) >= 2:
        slope, _, r_squared = linear_fit(
            [float(row.agents) for row in rows], [row.mean_ms for row in rows]
        )
        print(f"fit: {slope * 1000:.1f} us/agent, R^2={r_squared:.3f}")
    if args.csv is not None:
        from .report import render_bench_figure, write_bench_csv

        csv_path = write_bench_csv(rows, args.csv)
        figure = render_bench_figure(rows, Path(args.csv).with_suffix(".png"))
        print(f"csv: {csv_path}")
        print(f"figure: {figure}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "serve": _cmd_serve,
        "replay": _cmd_replay,
        "bench": _cmd_bench,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
