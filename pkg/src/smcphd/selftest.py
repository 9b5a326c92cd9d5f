"""Built-in oracle and invariant checks, runnable from the CLI.

A compact, deterministic subset of the test suite: each check returns
(name, passed, detail) so the CLI can print one line per check and exit
nonzero on any failure.  The full pytest suite is the authoritative gate;
this exists for quick field verification of an installed package.
"""

import io
import math
from dataclasses import replace

import numpy as np

from .config import VariantSpec, benchmark_preset
from .filter import measurement_mass_terms, update
from .harness import run, write_variant_table
from .metrics import OspaParams, ospa, ospa_bruteforce
from .models import MeasurementModel, MotionModel
from .particles import ParticleSet
from .resampling import ResampleConfig, multinomial_indices, resample
from .roughening import RougheningConfig, gordon_std, separate_roughen, velocity_jitter
from .scenario import ScenarioConfig, TargetScript


def _random_points(rng, max_size):
    return rng.uniform(-100, 100, size=(rng.integers(0, max_size + 1), 2))


def check_ospa_oracle(instances: int = 2000, seed: int = 7):
    rng = np.random.default_rng(seed)
    params = OspaParams(cutoff=100.0, order=2.0)
    worst = 0.0
    for _ in range(instances):
        x, y = _random_points(rng, 5), _random_points(rng, 5)
        worst = max(worst, abs(ospa(x, y, params) - ospa_bruteforce(x, y, params)))
    return worst < 1e-9, f"max |assignment - enumeration| = {worst:.3g}"


def check_ospa_axioms(triples: int = 500, seed: int = 11):
    rng = np.random.default_rng(seed)
    params = OspaParams(cutoff=100.0, order=2.0)
    for _ in range(triples):
        x, y, z = (_random_points(rng, 4) for _ in range(3))
        if abs(ospa(x, y, params) - ospa(y, x, params)) > 0:
            return False, "symmetry violated"
        if len(x) and ospa(x, x, params) != 0:
            return False, "identity violated"
        if ospa(x, z, params) > ospa(x, y, params) + ospa(y, z, params) + 1e-9:
            return False, "triangle inequality violated"
    return True, f"{triples} random triples"


def check_update_mass(seed: int = 3):
    rng = np.random.default_rng(seed)
    cfg = benchmark_preset()
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 200))
        pset = ParticleSet(
            states=rng.uniform(-50, 50, size=(n, 4)), weights=rng.uniform(0, 0.05, size=n)
        )
        scan = rng.uniform(-60, 60, size=(int(rng.integers(0, 8)), 2))
        post = update(pset, scan, cfg.scenario.models, cfg.filter)
        terms = measurement_mass_terms(pset, scan, cfg.scenario.models, cfg.filter)
        if np.any(terms < 0) or np.any(terms > 1):
            return False, "per-measurement contribution outside [0, 1]"
        expected = (1 - cfg.filter.detection.p_detect) * pset.total_weight() + math.fsum(terms)
        if expected > 0:
            worst = max(worst, abs(post.total_weight() - expected) / expected)
    return worst < 1e-10, f"max relative mass error = {worst:.3g}"


def check_resampling(seed: int = 5):
    rng = np.random.default_rng(seed)
    config = ResampleConfig(scheme="systematic", particles_per_target=100)
    for _ in range(100):
        n = int(rng.integers(2, 300))
        pset = ParticleSet(states=rng.normal(size=(n, 4)), weights=rng.uniform(0, 0.02, size=n))
        total = pset.total_weight()
        if total == 0:
            continue
        out = resample(pset, config, rng)
        if out.total_weight() != total:
            return False, "mass not preserved exactly"
        expected = len(out) * pset.weights / total
        counts = np.bincount(out.ancestry, minlength=n)
        if np.any(counts < np.floor(expected)) or np.any(counts > np.ceil(expected)):
            return False, "systematic copy count outside floor/ceil bounds"
    weights = np.array([0.9, 0.1])
    reps, draws = 2000, 10
    mean_first = np.mean(
        [np.sum(multinomial_indices(weights, draws, rng) == 0) for _ in range(reps)]
    )
    if abs(mean_first - 9.0) > 0.15:
        return False, f"multinomial copy mean {mean_first:.3f} far from 9"
    return True, "mass exact, counts within bounds, multinomial unbiased"


def check_roughening_moments(seed: int = 9):
    rng = np.random.default_rng(seed)
    n = 100_000
    pset = ParticleSet(
        states=np.tile([1.0, 2.0, 3.0, 4.0], (n, 1)),
        weights=np.full(n, 1e-3),
        ancestry=np.zeros(n, dtype=np.intp),
    )
    cfg = RougheningConfig(mode="separate", jitter_std=velocity_jitter(0.4))
    out = separate_roughen(pset, cfg, MotionModel(), MeasurementModel(), rng)
    if not np.array_equal(out.states[:, [0, 2]], pset.states[:, [0, 2]]):
        return False, "position components changed"
    dv = out.states[:, [1, 3]] - pset.states[:, [1, 3]]
    mean_err = np.abs(dv.mean(axis=0)).max()
    std_err = np.abs(dv.std(axis=0) - 0.4).max()
    return (
        mean_err < 0.005 and std_err < 0.004,
        f"jitter mean err {mean_err:.4f}, std err {std_err:.4f}",
    )


def check_gordon():
    val = gordon_std(0.2, 10.0, 100, 4)
    expected = 0.2 * 10.0 * 100 ** (-0.25)
    ok = abs(float(val) - expected) < 1e-12 and float(gordon_std(0.0, 5.0, 10, 4)) == 0.0
    return ok, f"K=0.2 E=10 N=100 d=4 -> {float(val):.6f}"


def check_zero_roughening_equivalence():
    cfg = benchmark_preset(particles_per_target=50, trials=3)
    scenario = ScenarioConfig(
        steps=12,
        targets=[TargetScript(1, 12), TargetScript(1, 8), TargetScript(4, 12)],
        models=cfg.scenario.models,
    )
    cfg = replace(
        cfg,
        scenario=scenario,
        variants=[
            VariantSpec("basic", RougheningConfig(mode="none")),
            VariantSpec("sep0", RougheningConfig(mode="separate", jitter_std=0.0)),
            VariantSpec("dir0", RougheningConfig(mode="direct", jitter_std=0.0)),
        ],
    )
    _, results = run(cfg)
    tables = {}
    for name in ("basic", "sep0", "dir0"):
        buf = io.StringIO()
        write_variant_table(results, name, buf)
        tables[name] = buf.getvalue()
    ok = tables["sep0"] == tables["basic"] and tables["dir0"] == tables["basic"]
    return ok, "zero-jitter variants reproduce the baseline byte for byte"


CHECKS = [
    ("ospa-oracle", check_ospa_oracle),
    ("ospa-axioms", check_ospa_axioms),
    ("update-mass", check_update_mass),
    ("resampling", check_resampling),
    ("roughening-moments", check_roughening_moments),
    ("gordon-bandwidth", check_gordon),
    ("zero-roughening-equivalence", check_zero_roughening_equivalence),
]


def run_selftest():
    """Run all checks; returns list of (name, passed, detail)."""
    results = []
    for name, fn in CHECKS:
        try:
            passed, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append((name, passed, detail))
    return results
