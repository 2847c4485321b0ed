"""Command-line interface.

Subcommands::

    mfcg run --config PATH [--episodes N] [--runs R] [--seed S] [--out DIR]
    mfcg solve --benchmark {asymptotic_lq|trader} --config PATH [--out DIR]
    mfcg riccati-limit --c1 V --c2 V --T V --M 10,100,1000 [--mesh-step H]

``run`` executes the configured experiment, prints the comparison metrics,
and writes the four CSVs.  ``solve`` prints the analytic coefficients and
writes theory-only CSVs.  ``riccati-limit`` prints the finite-group
convergence gap table.  ``--config`` accepts a filesystem path or the name
of a bundled config (``asymptotic_lq``, ``trader_x0_0``, ``trader_x0_05``,
``trader_x0_1``).  Output directory resolution: ``--out`` flag, then the
config's ``output_dir``, then the ``MFCG_OUT_DIR`` environment variable,
then ``./mfcg-out``.

Exit codes: 0 success, 1 configuration/usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
from importlib import resources
from pathlib import Path

from .errors import ConfigError, MfcgError
from .harness import (
    compare_to_theory,
    emit_csv,
    emit_theory_csv,
    load_config,
    resolve_output_dir,
    run_experiment,
    solve_benchmark,
)

_USAGE_EXIT = 1
_RUNTIME_EXIT = 2


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage failures exit 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(_USAGE_EXIT)


def _resolve_config_path(raw: str) -> Path:
    """Filesystem path first; fall back to a bundled config name."""
    path = Path(raw)
    if path.is_file():
        return path
    name = raw if raw.endswith(".cfg") else raw + ".cfg"
    bundle = resources.files("mfcg") / "configs" / name
    if bundle.is_file():
        return Path(str(bundle))
    raise ConfigError(
        f"config not found: {raw!r} is neither a file nor a bundled config name"
    )


def _build_parser() -> _Parser:
    parser = _Parser(prog="mfcg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    run_p = sub.add_parser("run", help="run a learning experiment and emit CSVs")
    run_p.add_argument("--config", required=True,
                       help="config file path or bundled config name")
    run_p.add_argument("--episodes", type=int, default=None,
                       help="override experiment.episodes")
    run_p.add_argument("--runs", type=int, default=None,
                       help="override experiment.runs")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override experiment.base_seed")
    run_p.add_argument("--tail-window", type=int, default=None,
                       help="override experiment.tail_window")
    run_p.add_argument("--out", default=None, help="output directory")

    solve_p = sub.add_parser("solve", help="print analytic solution, emit theory CSVs")
    solve_p.add_argument("--benchmark", required=True,
                         choices=("asymptotic_lq", "trader"))
    solve_p.add_argument("--config", required=True,
                         help="config file path or bundled config name")
    solve_p.add_argument("--out", default=None, help="output directory")

    ric_p = sub.add_parser("riccati-limit",
                           help="finite-group convergence gap table")
    ric_p.add_argument("--c1", type=float, required=True,
                       help="individual-term cost coefficient")
    ric_p.add_argument("--c2", type=float, required=True,
                       help="mean-interaction cost coefficient")
    ric_p.add_argument("--T", type=float, required=True, dest="horizon",
                       help="terminal time")
    ric_p.add_argument("--M", required=True, dest="group_counts",
                       help="comma-separated group counts, e.g. 10,100,1000")
    ric_p.add_argument("--mesh-step", type=float, default=1e-4,
                       help="RK4 mesh width (default 1e-4)")
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(_resolve_config_path(args.config))
    tail_window = args.tail_window
    if tail_window is None and args.episodes is not None:
        # A bare --episodes override shrinks the configured window to fit;
        # an explicit --tail-window is still validated against episodes.
        tail_window = min(cfg.tail_window, args.episodes)
    cfg = cfg.with_overrides(
        episodes=args.episodes,
        runs=args.runs,
        base_seed=args.seed,
        tail_window=tail_window,
    )
    out_dir = resolve_output_dir(args.out, cfg, os.environ.get("MFCG_OUT_DIR"))
    results = run_experiment(cfg)
    report = compare_to_theory(results)
    paths = emit_csv(results, report, out_dir)
    print(f"benchmark: {cfg.benchmark}  episodes: {cfg.episodes}  "
          f"runs: {cfg.runs}  base_seed: {cfg.base_seed}")
    for name, value in report.rows():
        print(f"{name}: {value:.9g}")
    print("wrote: " + "  ".join(str(p) for p in paths.values()))
    return 0


def _cmd_solve(args) -> int:
    cfg = load_config(_resolve_config_path(args.config))
    if cfg.benchmark != args.benchmark:
        raise ConfigError(
            f"experiment.benchmark: config is {cfg.benchmark!r} but "
            f"--benchmark asked for {args.benchmark!r}"
        )
    sol = solve_benchmark(cfg)
    if cfg.benchmark == "asymptotic_lq":
        print(f"value curvature: {sol.curvature:.9g}")
        print(f"value slope: {sol.slope:.9g}")
        print(f"value offset: {sol.offset:.9g}")
        print(f"fixed-point mean: {sol.mean:.9g}")
        print(f"stationary variance: {sol.variance:.9g}")
    else:
        print(f"drift root plus: {sol.delta_plus:.9g}")
        print(f"drift root minus: {sol.delta_minus:.9g}")
        print(f"mean-field gain at 0: {float(sol.mean_field_gain(0.0)):.9g}")
        print(f"individual gain at 0: {float(sol.individual_gain(0.0)):.9g}")
        print(f"control intercept at 0: {float(sol.intercept(0.0)):.9g}")
        print(f"state mean at horizon: {float(sol.state_mean(sol.horizon)):.9g}")
    out_dir = resolve_output_dir(args.out, cfg, os.environ.get("MFCG_OUT_DIR"))
    paths = emit_theory_csv(cfg, out_dir)
    print("wrote: " + "  ".join(str(p) for p in paths.values()))
    return 0


def _cmd_riccati(args) -> int:
    from .analytic import riccati_limit_gap

    try:
        group_counts = [int(part) for part in args.group_counts.split(",") if part]
    except ValueError as exc:
        raise ConfigError(
            f"--M: expected comma-separated integers, got {args.group_counts!r}"
        ) from exc
    if not group_counts:
        raise ConfigError("--M: at least one group count required")
    rows = riccati_limit_gap(args.c1, args.c2, args.horizon, group_counts,
                             mesh_step=args.mesh_step)
    print("group_count,coupling_sup,mean_gain_gap_sup")
    for row in rows:
        print(f"{int(row.group_count)},{row.zeta_sup:.9g},{row.phi_gap_sup:.9g}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return _USAGE_EXIT
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "solve":
            return _cmd_solve(args)
        return _cmd_riccati(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return _USAGE_EXIT
    except (MfcgError, OSError, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return _RUNTIME_EXIT


if __name__ == "__main__":
    sys.exit(main())
