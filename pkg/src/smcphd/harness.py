"""Monte Carlo benchmark driver.

Runs every configured filter variant over shared per-trial realizations
(paired comparison: identical truth and scans within a trial), aggregates
per-step cardinality and miss-distance records, and writes fixed-format
text tables that are byte-identical for a given config and master seed,
serial or parallel.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import RunConfig, VariantSpec
from .extraction import extract_states
from .filter import estimate_cardinality, predict, update
from .metrics import gain_ratio, ospa
from .particles import empty_set
from .resampling import resample
from .rng import TrialStreams
from .roughening import RougheningConfig, separate_roughen
from .scenario import ScanData, generate_truth, simulate_scans

logger = logging.getLogger(__name__)


@dataclass
class TrialResult:
    trial: int
    scan_hash: str
    true_counts: np.ndarray  # (steps,)
    est_counts: dict  # variant name -> (steps,)
    ospa_values: dict  # variant name -> (steps,)
    collapsed_at: dict  # variant name -> step or None


@dataclass
class RunSummary:
    variant_names: list
    baseline_name: str
    steps: int
    trials: int
    master_seed: int
    mean_true_counts: np.ndarray  # (steps,)
    mean_est_counts: dict  # variant -> (steps,)
    mean_step_ospa: dict  # variant -> (steps,)
    mean_ospa: dict  # variant -> grand mean over steps and trials
    gain_ratios: dict  # variant -> reduction vs. baseline


@dataclass
class SweepResult:
    grid: tuple
    modes: tuple  # ("separate", "direct")
    mean_ospa_basic: float
    mean_ospa: dict  # (mode, delta) -> float
    gain_ratios: dict  # (mode, delta) -> float


def _run_variant(scans: ScanData, config: RunConfig, roughening: RougheningConfig, streams: TrialStreams):
    """Run one filter variant over a trial's scans.

    Returns per-step cardinality estimates, per-step state estimates, and
    the step at which the posterior mass collapsed to zero (None if never).
    After a collapse the variant stops filtering; remaining steps report an
    empty estimate.
    """
    models = config.scenario.models
    steps = config.scenario.steps
    pset = empty_set(step=0)
    est_counts = np.zeros(steps, dtype=int)
    est_states = [None] * steps
    collapsed_at = None
    for step in range(1, steps + 1):
        if collapsed_at is not None:
            est_states[step - 1] = np.empty((0, 4))
            continue
        pset = predict(pset, models, config.filter, roughening, streams.prediction)
        pset = update(pset, scans.at(step), models, config.filter)
        n_hat = estimate_cardinality(pset)
        estimate = extract_states(pset, n_hat, streams.extraction)
        est_counts[step - 1] = n_hat
        est_states[step - 1] = estimate.states
        if pset.total_weight() <= 0:
            collapsed_at = step
            logger.warning("track loss: posterior mass collapsed to zero at step %d", step)
            continue
        pset = resample(pset, config.resample, streams.resampling)
        if roughening.mode == "separate":
            pset = separate_roughen(
                pset, roughening, models.motion, models.measurement, streams.roughening
            )
    return est_counts, est_states, collapsed_at


def run_trial(config: RunConfig, trial_index: int) -> TrialResult:
    """One trial: one realization, every variant on the same scans.

    All random streams are derived from (master_seed, trial, purpose) only,
    so a variant's draws do not depend on which other variants run, and two
    variants with identical roughening configs produce identical columns.
    """
    scenario_streams = TrialStreams(config.master_seed, trial_index)
    truth = generate_truth(config.scenario, scenario_streams.truth)
    scans = simulate_scans(
        truth,
        config.scenario,
        scenario_streams.detection,
        scenario_streams.measurement,
        scenario_streams.clutter,
        scenario_streams.shuffle,
    )
    scan_hash = scans.content_hash()

    steps = config.scenario.steps
    true_counts = np.array([truth.count_at(k) for k in range(1, steps + 1)])
    if config.ospa_full_state:
        true_points = [truth.states_at(k) for k in range(1, steps + 1)]
    else:
        true_points = [truth.positions_at(k) for k in range(1, steps + 1)]

    est_counts: dict = {}
    ospa_values: dict = {}
    collapsed: dict = {}
    for variant in config.variants:
        streams = TrialStreams(config.master_seed, trial_index)
        counts, states, collapsed_at = _run_variant(scans, config, variant.roughening, streams)
        values = np.empty(steps)
        for k in range(steps):
            if collapsed_at is not None and (k + 1) > collapsed_at:
                values[k] = config.ospa.cutoff
                continue
            points = states[k] if config.ospa_full_state else states[k][:, [0, 2]]
            values[k] = ospa(points, true_points[k], config.ospa)
        est_counts[variant.name] = counts
        ospa_values[variant.name] = values
        collapsed[variant.name] = collapsed_at
    return TrialResult(
        trial=trial_index,
        scan_hash=scan_hash,
        true_counts=true_counts,
        est_counts=est_counts,
        ospa_values=ospa_values,
        collapsed_at=collapsed,
    )


def _trial_task(item) -> TrialResult:
    config, index = item
    return run_trial(config, index)


def run_trials(config: RunConfig, workers: int = 1) -> list:
    """All trials, optionally across processes; order is by trial index
    either way, so downstream output is identical."""
    indices = list(range(config.trials))
    if workers <= 1:
        return [run_trial(config, i) for i in indices]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_trial_task, [(config, i) for i in indices], chunksize=1))
    results.sort(key=lambda r: r.trial)
    return results


def summarize(config: RunConfig, results: list) -> RunSummary:
    names = config.variant_names()
    steps = config.scenario.steps
    mean_true = np.mean([r.true_counts for r in results], axis=0)
    mean_est = {
        name: np.mean([r.est_counts[name] for r in results], axis=0) for name in names
    }
    mean_step_ospa = {
        name: np.mean([r.ospa_values[name] for r in results], axis=0) for name in names
    }
    mean_ospa = {
        name: float(
            math.fsum(math.fsum(r.ospa_values[name].tolist()) for r in results)
            / (len(results) * steps)
        )
        for name in names
    }
    baseline = config.baseline_name
    gains = {name: gain_ratio(mean_ospa[baseline], mean_ospa[name]) for name in names}
    return RunSummary(
        variant_names=names,
        baseline_name=baseline,
        steps=steps,
        trials=len(results),
        master_seed=config.master_seed,
        mean_true_counts=mean_true,
        mean_est_counts=mean_est,
        mean_step_ospa=mean_step_ospa,
        mean_ospa=mean_ospa,
        gain_ratios=gains,
    )


def run(config: RunConfig, workers: int = 1):
    results = run_trials(config, workers)
    return summarize(config, results), results


# --- roughening-degree sweep --------------------------------------------------

SWEEP_MODES = ("separate", "direct")


def sweep_variants(config: RunConfig) -> list:
    """Expanded variant list: the baseline plus each mode at each grid value.

    The baseline arm keeps its configured name; sweep arms are named
    mode@delta.  Because random streams do not depend on the variant list,
    running the grid as one paired run is equivalent to separate runs per
    delta while sharing the baseline computation.
    """
    baseline = next(v for v in config.variants if v.roughening.mode == "none")
    variants = [baseline]
    for delta in config.sweep_grid:
        for mode in SWEEP_MODES:
            variants.append(
                VariantSpec(
                    name=f"{mode}@{delta:g}",
                    roughening=RougheningConfig(mode=mode, jitter_std=float(delta)),
                )
            )
    return variants


def sweep(config: RunConfig, workers: int = 1):
    """Gain ratio of both roughening modes at each jitter level."""
    from dataclasses import replace

    sweep_config = replace(config, variants=sweep_variants(config))
    summary, results = run(sweep_config, workers)
    baseline = summary.mean_ospa[sweep_config.baseline_name]
    mean_ospa = {}
    gains = {}
    for delta in sweep_config.sweep_grid:
        for mode in SWEEP_MODES:
            name = f"{mode}@{delta:g}"
            mean_ospa[(mode, delta)] = summary.mean_ospa[name]
            gains[(mode, delta)] = summary.gain_ratios[name]
    return (
        SweepResult(
            grid=sweep_config.sweep_grid,
            modes=SWEEP_MODES,
            mean_ospa_basic=baseline,
            mean_ospa=mean_ospa,
            gain_ratios=gains,
        ),
        summary,
        results,
    )


# --- fixed-format output tables -----------------------------------------------


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def write_trials_table(results: list, variant_names: list, fileobj) -> None:
    """Long-format per-trial table: trial step variant true_n est_n ospa."""
    fileobj.write("trial\tstep\tvariant\ttrue_n\test_n\tospa\n")
    for result in results:
        steps = len(result.true_counts)
        for k in range(steps):
            for name in variant_names:
                fileobj.write(
                    f"{result.trial}\t{k + 1}\t{name}\t{result.true_counts[k]}"
                    f"\t{result.est_counts[name][k]}\t{_fmt(result.ospa_values[name][k])}\n"
                )


def write_variant_table(results: list, variant_name: str, fileobj) -> None:
    """Single-variant extract of the trials table (no variant column);
    lets two variants' outputs be compared byte for byte."""
    fileobj.write("trial\tstep\ttrue_n\test_n\tospa\n")
    for result in results:
        steps = len(result.true_counts)
        for k in range(steps):
            fileobj.write(
                f"{result.trial}\t{k + 1}\t{result.true_counts[k]}"
                f"\t{result.est_counts[variant_name][k]}"
                f"\t{_fmt(result.ospa_values[variant_name][k])}\n"
            )


def write_summary_table(summary: RunSummary, fileobj) -> None:
    """Per-variant per-step means with the variant-level aggregates repeated
    on every row: variant step mean_true_n mean_est_n mean_ospa
    overall_mean_ospa gain_ratio."""
    fileobj.write(
        "variant\tstep\tmean_true_n\tmean_est_n\tmean_ospa\toverall_mean_ospa\tgain_ratio\n"
    )
    for name in summary.variant_names:
        for k in range(summary.steps):
            fileobj.write(
                f"{name}\t{k + 1}\t{_fmt(summary.mean_true_counts[k])}"
                f"\t{_fmt(summary.mean_est_counts[name][k])}"
                f"\t{_fmt(summary.mean_step_ospa[name][k])}"
                f"\t{_fmt(summary.mean_ospa[name])}"
                f"\t{_fmt(summary.gain_ratios[name])}\n"
            )


def write_sweep_table(result: SweepResult, fileobj) -> None:
    """Sweep table: delta_r mode mean_ospa gain_ratio (plus baseline row)."""
    fileobj.write("delta_r\tmode\tmean_ospa\tgain_ratio\n")
    fileobj.write(f"-\tbasic\t{_fmt(result.mean_ospa_basic)}\t{_fmt(0.0)}\n")
    for delta in result.grid:
        for mode in result.modes:
            fileobj.write(
                f"{delta:g}\t{mode}\t{_fmt(result.mean_ospa[(mode, delta)])}"
                f"\t{_fmt(result.gain_ratios[(mode, delta)])}\n"
            )
