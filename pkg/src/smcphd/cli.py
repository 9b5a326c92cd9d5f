"""Command-line interface for the benchmark harness.

Subcommands: run (Monte Carlo comparison of the configured variants),
sweep (gain ratio across jitter levels), scenario (dump one realization's
truth and scans), selftest (built-in oracle and invariant checks).
"""

import argparse
import sys
from pathlib import Path

from .config import PRESETS, load_preset, load_run_config, with_overrides
from .harness import (
    run,
    sweep,
    write_summary_table,
    write_sweep_table,
    write_trials_table,
)
from .rng import TrialStreams
from .scenario import generate_truth, simulate_scans, write_scans, write_truth
from .selftest import run_selftest


def _add_common(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--config", type=Path, help="key/value config file")
    group.add_argument(
        "--preset",
        choices=sorted(PRESETS),
        help="named built-in configuration (default: paper-np200)",
    )
    parser.add_argument("--seed", type=int, help="override the master seed")
    parser.add_argument("--trials", type=int, help="override the trial count")
    parser.add_argument("--out", type=Path, default=Path("results"), help="output directory")


def _load_config(args):
    if args.config is not None:
        config = load_run_config(args.config)
    else:
        config = load_preset(args.preset or "paper-np200")
    return with_overrides(config, trials=args.trials, master_seed=args.seed)


def _cmd_run(args) -> int:
    config = _load_config(args)
    summary, results = run(config, workers=args.workers)
    args.out.mkdir(parents=True, exist_ok=True)
    trials_path = args.out / "trials.txt"
    summary_path = args.out / "summary.txt"
    with open(trials_path, "w", encoding="utf-8", newline="\n") as fh:
        write_trials_table(results, config.variant_names(), fh)
    with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
        write_summary_table(summary, fh)
    print(f"trials={summary.trials} steps={summary.steps} seed={summary.master_seed}")
    for name in summary.variant_names:
        print(
            f"{name}: mean OSPA {summary.mean_ospa[name]:.4f}"
            f"  gain ratio {summary.gain_ratios[name]:+.4f}"
        )
    print(f"wrote {trials_path} and {summary_path}")
    return 0


def _cmd_sweep(args) -> int:
    config = _load_config(args)
    result, summary, results = sweep(config, workers=args.workers)
    args.out.mkdir(parents=True, exist_ok=True)
    sweep_path = args.out / "sweep.txt"
    trials_path = args.out / "trials.txt"
    summary_path = args.out / "summary.txt"
    with open(sweep_path, "w", encoding="utf-8", newline="\n") as fh:
        write_sweep_table(result, fh)
    with open(trials_path, "w", encoding="utf-8", newline="\n") as fh:
        write_trials_table(results, summary.variant_names, fh)
    with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
        write_summary_table(summary, fh)
    print(f"baseline mean OSPA {result.mean_ospa_basic:.4f}")
    for delta in result.grid:
        line = f"delta_r={delta:g}:"
        for mode in result.modes:
            line += f"  {mode} gain {result.gain_ratios[(mode, delta)]:+.4f}"
        print(line)
    print(f"wrote {sweep_path}, {summary_path} and {trials_path}")
    return 0


def _cmd_scenario(args) -> int:
    config = _load_config(args)
    streams = TrialStreams(config.master_seed, args.trial)
    truth = generate_truth(config.scenario, streams.truth)
    scans = simulate_scans(
        truth,
        config.scenario,
        streams.detection,
        streams.measurement,
        streams.clutter,
        streams.shuffle,
    )
    args.out.mkdir(parents=True, exist_ok=True)
    truth_path = args.out / "truth.txt"
    scans_path = args.out / "scans.txt"
    with open(truth_path, "w", encoding="utf-8", newline="\n") as fh:
        write_truth(truth, fh)
    with open(scans_path, "w", encoding="utf-8", newline="\n") as fh:
        write_scans(scans, fh)
    print(f"wrote {truth_path} and {scans_path} (trial {args.trial})")
    return 0


def _cmd_selftest(args) -> int:
    results = run_selftest()
    failed = 0
    for name, passed, detail in results:
        status = "PASS" if passed else "FAIL"
        print(f"{status}  {name}: {detail}")
        failed += 0 if passed else 1
    if failed:
        print(f"{failed} of {len(results)} checks failed")
        return 1
    print(f"all {len(results)} checks passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smcphd",
        description="Particle intensity-filter benchmark: basic vs. roughened variants",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="Monte Carlo comparison run")
    _add_common(p_run)
    p_run.add_argument("--workers", type=int, default=1, help="parallel trial processes")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="gain ratio across jitter levels")
    _add_common(p_sweep)
    p_sweep.add_argument("--workers", type=int, default=1, help="parallel trial processes")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_scen = sub.add_parser("scenario", help="dump one realization's truth and scans")
    _add_common(p_scen)
    p_scen.add_argument("--trial", type=int, default=0, help="trial index to realize")
    p_scen.set_defaults(func=_cmd_scenario)

    p_self = sub.add_parser("selftest", help="built-in oracle and invariant checks")
    p_self.set_defaults(func=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, NotImplementedError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
