import math

import numpy as np
import pytest

from smcphd.filter import (
    FilterConfig,
    estimate_cardinality,
    measurement_mass_terms,
    predict,
    update,
)
from smcphd.models import (
    BirthModel,
    ClutterModel,
    DetectionModel,
    MeasurementModel,
    ModelSet,
    MotionModel,
)
from smcphd.particles import ParticleSet, empty_set
from smcphd.roughening import RougheningConfig, velocity_jitter

NO_ROUGHENING = RougheningConfig(mode="none")


def _models(**overrides):
    base = dict(
        motion=MotionModel(sigma_v1=1.0, sigma_v2=0.1),
        measurement=MeasurementModel(sigma_w1=2.5, sigma_w2=2.5),
        birth=BirthModel(mass=0.2),
        clutter=ClutterModel(rate=10.0, region=(-100, 100, -100, 100)),
        detection=DetectionModel(p_survive=0.95, p_detect=0.95),
    )
    base.update(overrides)
    return ModelSet(**base)


def _config(**overrides):
    kwargs = dict(particles_per_target=200, detection=DetectionModel())
    kwargs.update(overrides)
    return FilterConfig(**kwargs)


def test_predict_survivor_weights_are_exact_products():
    rng = np.random.default_rng(0)
    prev = ParticleSet(states=rng.normal(size=(50, 4)), weights=rng.uniform(0, 0.1, 50))
    out = predict(prev, _models(), _config(), NO_ROUGHENING, np.random.default_rng(1))
    assert out.survivor_count == 50
    assert np.array_equal(out.weights[:50], 0.95 * prev.weights)
    single = ParticleSet(states=np.zeros((1, 4)), weights=[0.04])
    out = predict(single, _models(), _config(), NO_ROUGHENING, np.random.default_rng(2))
    assert out.weights[0] == 0.95 * 0.04


def test_predict_birth_mass_and_weights():
    out = predict(empty_set(), _models(), _config(), NO_ROUGHENING, np.random.default_rng(3))
    assert len(out) == 40  # round(0.2 * 200)
    assert out.survivor_count == 0
    assert np.all(out.weights == 0.2 / 40)
    assert math.fsum(out.weights.tolist()) == 0.2
    assert out.step == 1


def test_predict_survivor_mass_exact_for_dyadic_weights():
    # Power-of-two weights make the per-particle products exact, so the
    # survivor-mass identity holds with zero tolerance.
    weights = np.array([0.5, 0.25, 0.125, 0.0625, 0.03125])
    prev = ParticleSet(states=np.zeros((5, 4)), weights=weights)
    models = _models(birth=BirthModel(mass=0.0))
    out = predict(prev, models, _config(), NO_ROUGHENING, np.random.default_rng(4))
    assert math.fsum(out.weights.tolist()) == 0.95 * math.fsum(weights.tolist())


def test_predict_zero_survival_and_no_births():
    models = _models(birth=BirthModel(mass=0.0), detection=DetectionModel(p_survive=0.0))
    config = _config(detection=DetectionModel(p_survive=0.0))
    rng = np.random.default_rng(5)
    prev = ParticleSet(states=rng.normal(size=(10, 4)), weights=np.full(10, 0.1))
    out = predict(prev, models, config, NO_ROUGHENING, rng)
    assert out.total_weight() == 0.0
    assert len(out) == 10


def test_predict_empty_input_zero_birth_gives_empty_output():
    models = _models(birth=BirthModel(mass=0.0))
    out = predict(empty_set(), models, _config(), NO_ROUGHENING, np.random.default_rng(6))
    assert len(out) == 0
    assert out.step == 1


def test_predict_rejects_spawn_kernel():
    models = _models(birth=BirthModel(mass=0.2, spawn_kernel=object()))
    with pytest.raises(NotImplementedError):
        predict(empty_set(), models, _config(), NO_ROUGHENING, np.random.default_rng(7))


def test_predict_direct_zero_jitter_bitwise_equals_basic():
    rng = np.random.default_rng(8)
    prev = ParticleSet(states=rng.normal(size=(30, 4)), weights=np.full(30, 0.05))
    basic = predict(prev, _models(), _config(), NO_ROUGHENING, np.random.default_rng(9))
    direct0 = predict(
        prev,
        _models(),
        _config(),
        RougheningConfig(mode="direct", jitter_std=0.0),
        np.random.default_rng(9),
    )
    assert np.array_equal(basic.states, direct0.states)
    assert np.array_equal(basic.weights, direct0.weights)


def test_predict_direct_inflates_velocity_noise():
    n = 50_000
    prev = ParticleSet(states=np.zeros((n, 4)), weights=np.full(n, 1e-4))
    models = _models(birth=BirthModel(mass=0.0))
    direct = RougheningConfig(mode="direct", jitter_std=velocity_jitter(0.4))
    out = predict(prev, models, _config(), direct, np.random.default_rng(10))
    expected = [math.sqrt(1.0 + 0.16), math.sqrt(0.01 + 0.16)]
    assert np.allclose(out.states[:, [1, 3]].std(axis=0), expected, rtol=0.01)


def test_update_identity_when_undetectable():
    rng = np.random.default_rng(11)
    pred = ParticleSet(states=rng.normal(size=(20, 4)), weights=rng.uniform(0, 1, 20))
    config = _config(detection=DetectionModel(p_detect=0.0))
    out = update(pred, rng.uniform(-50, 50, (5, 2)), _models(), config)
    assert np.array_equal(out.weights, pred.weights)


def test_update_empty_scan_scales_by_missed_detection():
    rng = np.random.default_rng(12)
    pred = ParticleSet(states=rng.normal(size=(20, 4)), weights=rng.uniform(0, 1, 20))
    out = update(pred, np.empty((0, 2)), _models(), _config())
    assert np.allclose(out.weights, 0.05 * pred.weights, rtol=1e-15)


def test_update_single_particle_hand_computed():
    # Arrange g(z|x) = 0.1 exactly at the likelihood mode by solving
    # 1/(2 pi s^2) = 0.1, with clutter intensity 10/200^2 = 2.5e-4.
    sigma = math.sqrt(1.0 / (0.2 * math.pi))
    models = _models(measurement=MeasurementModel(sigma_w1=sigma, sigma_w2=sigma))
    pred = ParticleSet(states=np.zeros((1, 4)), weights=[1.0])
    out = update(pred, np.zeros((1, 2)), models, _config())
    g = 0.1
    c = 0.95 * g * 1.0
    expected = (1 - 0.95 + 0.95 * g / (2.5e-4 + c)) * 1.0
    assert expected == pytest.approx(1.04737, rel=1e-5)  # cross-check the scalar path
    assert out.weights[0] == pytest.approx(expected, rel=1e-12)


def test_update_mass_decomposition_identity():
    rng = np.random.default_rng(13)
    models = _models()
    config = _config()
    for _ in range(200):
        n = int(rng.integers(1, 300))
        pred = ParticleSet(
            states=rng.uniform(-80, 80, size=(n, 4)),
            weights=rng.uniform(0, 0.05, size=n),
        )
        scan = rng.uniform(-90, 90, size=(int(rng.integers(0, 10)), 2))
        post = update(pred, scan, models, config)
        terms = measurement_mass_terms(pred, scan, models, config)
        assert np.all(terms >= 0.0) and np.all(terms <= 1.0)
        expected = 0.05 * pred.total_weight() + math.fsum(terms)
        assert post.total_weight() == pytest.approx(expected, rel=1e-10)


def test_update_never_moves_particles():
    rng = np.random.default_rng(14)
    pred = ParticleSet(states=rng.normal(size=(40, 4)), weights=np.full(40, 0.02))
    before = pred.states.copy()
    out = update(pred, rng.uniform(-5, 5, (3, 2)), _models(), _config())
    assert np.array_equal(out.states, before)


def test_update_huge_clutter_discounts_measurements():
    # kappa -> infinity: the posterior mass tends to (1 - p_D) * prior mass.
    rng = np.random.default_rng(15)
    area = 200.0 * 200.0
    models = _models(clutter=ClutterModel(rate=1e12 * area, region=(-100, 100, -100, 100)))
    pred = ParticleSet(
        states=rng.uniform(-50, 50, size=(100, 4)), weights=rng.uniform(0, 0.05, 100)
    )
    scan = rng.uniform(-50, 50, size=(6, 2))
    out = update(pred, scan, models, _config())
    assert out.total_weight() == pytest.approx(0.05 * pred.total_weight(), rel=1e-9)


def test_update_zero_denominator_contributes_nothing():
    # No clutter and a measurement with zero likelihood support under
    # far-away particles flushed to zero: the term is dropped, not a crash.
    models = _models(clutter=ClutterModel(rate=0.0, region=(-100, 100, -100, 100)))
    pred = ParticleSet(states=np.full((3, 4), 1e4), weights=np.full(3, 0.1))
    out = update(pred, np.array([[-1e4, -1e4]]), models, _config())
    assert np.allclose(out.weights, 0.05 * pred.weights, rtol=1e-15)


def test_estimate_cardinality_rounding():
    def pset_with_mass(mass, n=8):
        return ParticleSet(states=np.zeros((n, 4)), weights=np.full(n, mass / n))

    assert estimate_cardinality(pset_with_mass(3.6)) == 4
    assert estimate_cardinality(pset_with_mass(0.4)) == 0
    assert estimate_cardinality(ParticleSet(states=np.zeros((1, 4)), weights=[2.5])) == 3
    assert estimate_cardinality(empty_set()) == 0


def test_filter_config_defaults_and_validation():
    config = FilterConfig(particles_per_target=200)
    assert config.min_particles == 100
    assert config.birth_particle_count(0.2) == 40
    assert FilterConfig(particles_per_target=1000).birth_particle_count(0.2) == 200
    assert FilterConfig(particles_per_target=200, birth_particles=17).birth_particle_count(0.2) == 17
    with pytest.raises(NotImplementedError):
        FilterConfig(proposal="optimal")
    with pytest.raises(NotImplementedError):
        FilterConfig(birth_proposal="measurement-driven")
    with pytest.raises(ValueError):
        FilterConfig(particles_per_target=0)


def test_predict_direct_with_adaptive_bandwidth():
    from smcphd.roughening import GordonConfig

    rng = np.random.default_rng(16)
    prev = ParticleSet(states=rng.normal(size=(100, 4)), weights=np.full(100, 0.02))
    cfg = RougheningConfig(mode="direct", gordon=GordonConfig(tuning_constant=0.2))
    out = predict(prev, _models(), _config(), cfg, np.random.default_rng(17))
    assert len(out) == 140
    assert np.all(np.isfinite(out.states))
