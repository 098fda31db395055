"""Command-line front end.

Subcommands:
    run              run an experiment config and write reports
    validate-config  parse a config (and its scenarios) without running
    plot-data        derive plot-ready CSVs from a finished run
    demo             run the built-in scenario suite

Exit codes: 0 success, 1 configuration error, 2 runtime/IO error,
3 invariant breach (a metric came out non-finite).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import (
    ConfigError,
    ExperimentConfig,
    InvariantBreach,
    emit_plot_data,
    load_experiment_config,
    run_experiment,
)
from .presets import demo_cases
from .rppg import PipelineConfig
from .scenario_io import ScenarioFormatError, save_scenario


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pulsecam",
        description="Exposure-strategy comparison harness on synthetic driving scenes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment config")
    run_p.add_argument("--config", required=True, help="experiment config JSON")
    run_p.add_argument("--out", default=None, help="output directory (overrides config)")
    run_p.add_argument("--seed", type=int, default=None, help="run a single seed")
    run_p.add_argument("--strategy", default=None, help="run only the named strategy")

    val_p = sub.add_parser("validate-config", help="check a config without running it")
    val_p.add_argument("--config", required=True)

    plot_p = sub.add_parser("plot-data", help="emit plot-ready CSV files")
    plot_p.add_argument("--report", required=True, help="experiment output directory")
    plot_p.add_argument("--kind", required=True, choices=("cdf", "timeseries", "spectrogram"))
    plot_p.add_argument("--out", default=None, help="destination directory")

    demo_p = sub.add_parser("demo", help="run the built-in scenario suite")
    demo_p.add_argument("--out", default="demo-out", help="output directory")
    demo_p.add_argument("--case", default=None, help="run a single case by name")
    demo_p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    demo_p.add_argument("--strategy", default=None, help="run only the named strategy")
    demo_p.add_argument(
        "--emit-scenarios", action="store_true",
        help="also write the scenario files next to the results",
    )
    return parser


def _cmd_run(args) -> int:
    config = load_experiment_config(args.config, args.out, args.seed, args.strategy)
    summary = run_experiment(config)
    for row in summary["cells"]:
        print(
            f"{row['scenario']:>16s}  {row['strategy']:<14s} seed={row['seed']:<3d} "
            f"MAE={row['mae_bpm']:6.2f} bpm  SR={row['success_rate_pct']:5.1f} %  "
            f"SNR={row['snr_db']:6.2f} dB"
        )
    print(f"summary written to {config.output_dir / 'summary.json'}")
    return 0


def _cmd_validate(args) -> int:
    config = load_experiment_config(args.config)
    n_cells = len(config.scenarios) * len(config.strategies) * len(config.seeds)
    print(
        f"ok: {len(config.scenarios)} scenario(s), {len(config.strategies)} strategy(ies), "
        f"{len(config.seeds)} seed(s) -> {n_cells} cells"
    )
    return 0


def _cmd_plot(args) -> int:
    written = emit_plot_data(args.report, args.kind, args.out)
    for path in written:
        print(path)
    return 0


def _cmd_demo(args) -> int:
    cases = demo_cases()
    if args.case is not None:
        if args.case not in cases:
            raise ConfigError(f"unknown case {args.case!r}; available: {sorted(cases)}")
        cases = {args.case: cases[args.case]}
    out_root = Path(args.out)
    for name, case in cases.items():
        if args.seed is not None:
            case.params.seed = args.seed
        strategies = case.strategies
        if args.strategy is not None:
            strategies = [s for s in strategies if s.name == args.strategy]
            if not strategies:
                raise ConfigError(f"case {name} has no strategy named {args.strategy!r}")
        if args.emit_scenarios:
            scen_dir = out_root / "scenarios"
            scen_dir.mkdir(parents=True, exist_ok=True)
            save_scenario(case.params, scen_dir / f"{name}.scn")
        config = ExperimentConfig(
            scenarios=[case.params.build()],
            strategies=strategies,
            sensor=case.sensor,
            pipeline=PipelineConfig(),
            seeds=[case.params.seed],
            output_dir=out_root / name,
        )
        summary = run_experiment(config)
        print(f"[{name}] {case.note}")
        for row in summary["cells"]:
            print(
                f"    {row['strategy']:<14s} MAE={row['mae_bpm']:6.2f} bpm  "
                f"SR={row['success_rate_pct']:5.1f} %  SNR={row['snr_db']:6.2f} dB"
            )
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "validate-config": _cmd_validate,
        "plot-data": _cmd_plot,
        "demo": _cmd_demo,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, ScenarioFormatError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except InvariantBreach as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
