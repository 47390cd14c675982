"""Diagnostics: F/G, correlations, moments, rates, defect, dJ/dt bound."""

import json

import numpy as np
import pytest

from lohesphere.dynamics import CouplingParams, Ensemble
from lohesphere.experiments import fd_r_squared_rate
from lohesphere.integrators import IntegratorConfig, integrate
from lohesphere.observables import (
    ObservableSeries,
    aggregation_defect,
    centroid,
    centroid_rate,
    correlations,
    dj_dt_norm_bound_check,
    functional_F,
    functional_G,
    j_vector,
    lp_distance,
    order_parameter,
    r_squared_rate,
)
from lohesphere.sampling import admissible_cap_states, random_sphere_states, sample_admissible
from lohesphere.transport import EmpiricalMeasure

E1 = np.array([1.0, 0.0], dtype=complex)
E2 = np.array([0.0, 1.0], dtype=complex)


def test_functionals_vanish_at_consensus():
    states = np.tile(E1, (4, 1))
    assert functional_F(states) == 0.0
    assert functional_G(states) == 0.0


def test_functionals_antipodal_pair():
    states = np.stack([E1, -E1])
    assert functional_F(states) == pytest.approx(2.0)
    assert functional_G(states) == pytest.approx(2.0)


def test_functionals_quarter_turn():
    states = np.stack([E1, 1j * E1])
    assert functional_F(states) == pytest.approx(np.sqrt(2.0))
    assert functional_G(states) == pytest.approx(np.sqrt(2.0))
    # and the pair inequality holds: sqrt(2) <= 2 * 2^(1/4)
    assert functional_G(states) <= 2.0 * np.sqrt(functional_F(states))


def test_pair_inequality_random():
    rng = np.random.default_rng(0)
    for _ in range(200):
        states = random_sphere_states(rng, int(rng.integers(2, 12)), 3)
        assert functional_G(states) <= 2.0 * np.sqrt(functional_F(states)) + 1e-12


def test_correlations_identity_at_consensus():
    states = np.tile(E1, (3, 1))
    corr = correlations(states)
    np.testing.assert_allclose(corr.h, np.ones((3, 3)))
    np.testing.assert_allclose(corr.i_part, np.zeros((3, 3)))
    np.testing.assert_allclose(corr.j_part, np.zeros((3, 3)))


def test_correlations_hermitian_symmetry_and_f():
    rng = np.random.default_rng(1)
    for _ in range(20):
        states = random_sphere_states(rng, 8, 4)
        corr = correlations(states)
        np.testing.assert_allclose(corr.h, corr.h.conj().T, atol=1e-14)
        assert corr.functional_f() == pytest.approx(functional_F(states), abs=1e-13)


def test_centroid_examples():
    states = np.tile(E1, (3, 1))
    np.testing.assert_allclose(centroid(states), E1)
    np.testing.assert_allclose(centroid(np.stack([E1, -E1])), np.zeros(2), atol=1e-16)
    np.testing.assert_allclose(centroid(np.stack([E1, E2])), [0.5, 0.5])


def test_j_vector_and_order_parameter():
    mu = EmpiricalMeasure.uniform(np.stack([E1, E2]))
    np.testing.assert_allclose(j_vector(mu), [0.5, 0.5])
    assert order_parameter(mu) == pytest.approx(1.0 / np.sqrt(2.0))
    assert order_parameter(EmpiricalMeasure.uniform(np.tile(E1, (5, 1)))) == pytest.approx(1.0)
    assert order_parameter(EmpiricalMeasure.uniform(np.stack([E1, -E1]))) == pytest.approx(0.0)


def test_j_vector_rejects_bad_weights():
    mu = EmpiricalMeasure.uniform(np.stack([E1, E2]))
    mu.weights = np.array([0.7, 0.6])
    with pytest.raises(ValueError, match="sum to 1"):
        j_vector(mu)


def test_r_squared_rate_trivial_cases():
    k0, k1 = 1.0, 0.3
    consensus = EmpiricalMeasure.uniform(np.tile(E1, (4, 1)))
    assert r_squared_rate(consensus, k0, k1) == pytest.approx(0.0, abs=1e-14)
    antipodal = EmpiricalMeasure.uniform(np.stack([E1, -E1]))
    assert r_squared_rate(antipodal, k0, k1) == pytest.approx(0.0, abs=1e-14)


def test_r_squared_rate_nonnegative_in_aligned_regime():
    rng = np.random.default_rng(2)
    for _ in range(100):
        states = random_sphere_states(rng, 10, 3)
        k0 = float(np.abs(rng.standard_normal()) + 0.1)
        k1 = float(rng.uniform(-0.5, 1.0)) * k0 / 2.0
        if k0 + 2 * k1 < 0:
            continue
        assert r_squared_rate(EmpiricalMeasure.uniform(states), k0, k1) >= -1e-12


def test_r_squared_rate_matches_finite_difference():
    rng = np.random.default_rng(3)
    for _ in range(5):
        states = admissible_cap_states(rng, 12, 4, 0.5)
        k0, k1 = 1.0, 0.2
        ens = Ensemble.zero_frequency(states, CouplingParams(k0, k1))
        analytic = r_squared_rate(EmpiricalMeasure.uniform(states), k0, k1)
        fd = fd_r_squared_rate(ens)
        assert abs(analytic - fd) <= 1e-5 * max(abs(analytic), 1e-12)


def test_centroid_rate_equals_measure_rate():
    rng = np.random.default_rng(4)
    for _ in range(100):
        states = random_sphere_states(rng, int(rng.integers(2, 16)), 3)
        k0, k1 = rng.standard_normal(2)
        measure_rate = r_squared_rate(EmpiricalMeasure.uniform(states), k0, k1)
        particle_rate = centroid_rate(states, k0, k1)
        assert abs(measure_rate - particle_rate) <= 1e-12


def test_centroid_rate_matches_finite_difference():
    rng = np.random.default_rng(5)
    states = admissible_cap_states(rng, 10, 3, 0.5)
    k0, k1 = 1.0, -0.1
    ens = Ensemble.zero_frequency(states, CouplingParams(k0, k1))
    fd = fd_r_squared_rate(ens)
    assert abs(centroid_rate(states, k0, k1) - fd) <= 1e-5 * abs(fd)


def test_aggregation_defect_examples():
    assert aggregation_defect(EmpiricalMeasure.uniform(np.tile(E1, (3, 1)))) == pytest.approx(
        0.0, abs=1e-14
    )
    bipolar = EmpiricalMeasure.uniform(np.stack([E1, -E1]))
    assert aggregation_defect(bipolar) == pytest.approx(0.0, abs=1e-14)
    # uniform over {e1, e2}: ||J||^2 = 1/2, z_j . J = 1/2, defect = 1/4
    mu = EmpiricalMeasure.uniform(np.stack([E1, E2]))
    assert aggregation_defect(mu) == pytest.approx(0.25)


def test_aggregation_defect_nonnegative():
    rng = np.random.default_rng(6)
    for _ in range(200):
        states = random_sphere_states(rng, int(rng.integers(1, 9)), 4)
        assert aggregation_defect(EmpiricalMeasure.uniform(states)) >= -1e-12


def test_dj_dt_bound_identical_states():
    value, bound = dj_dt_norm_bound_check(EmpiricalMeasure.uniform(np.tile(E1, (4, 1))), 1.0, 0.3)
    assert value == pytest.approx(0.0, abs=1e-14)
    assert bound == pytest.approx(2.6)


def test_dj_dt_bound_antipodal_pair():
    value, bound = dj_dt_norm_bound_check(EmpiricalMeasure.uniform(np.stack([E1, -E1])), 1.0, 0.0)
    assert value == pytest.approx(0.0, abs=1e-14)
    assert bound == pytest.approx(2.0)


def test_dj_dt_bound_random_ensembles():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        states = random_sphere_states(rng, int(rng.integers(2, 10)), 3)
        k0 = float(np.abs(rng.standard_normal()) + 0.05)
        k1 = float(rng.uniform(-0.5, 1.5)) * k0 / 2.0
        if k0 + 2 * k1 < 0:
            continue
        value, bound = dj_dt_norm_bound_check(EmpiricalMeasure.uniform(states), k0, k1)
        assert value <= bound + 1e-10


def test_dj_dt_bound_rejects_bad_gains():
    mu = EmpiricalMeasure.uniform(np.stack([E1, E2]))
    with pytest.raises(ValueError, match="kappa0"):
        dj_dt_norm_bound_check(mu, -1.0, 0.0)
    with pytest.raises(ValueError, match="kappa0"):
        dj_dt_norm_bound_check(mu, 1.0, -0.8)


def test_lp_distance_examples():
    states = np.stack([E1, E2])
    assert lp_distance(states, states, 2.0) == 0.0
    for p in (1.0, 2.0, 4.0):
        assert lp_distance(E1[None, :], E2[None, :], p) == pytest.approx(np.sqrt(2.0))


def test_lp_distance_p2_is_frobenius():
    rng = np.random.default_rng(8)
    a = random_sphere_states(rng, 7, 3)
    b = random_sphere_states(rng, 7, 3)
    frob = np.linalg.norm((a - b).ravel())
    assert lp_distance(a, b, 2.0) == pytest.approx(frob, rel=1e-14)


def test_lp_distance_validation():
    with pytest.raises(ValueError, match="mismatch"):
        lp_distance(np.ones((2, 2), complex), np.ones((3, 2), complex), 2.0)
    with pytest.raises(ValueError, match="p must be"):
        lp_distance(np.ones((2, 2), complex), np.ones((2, 2), complex), 0.5)


def test_pair_inequality_along_trajectory():
    ens = sample_admissible(12, 3, 1.0, 0.1, 0.2, seed=9)
    _, series = integrate(
        ens,
        IntegratorConfig(t_end=1.0, dt=1e-3, record_every=50),
        {"F": lambda t, s: functional_F(s), "G": lambda t, s: functional_G(s)},
    )
    gap = series.column("G") - 2.0 * np.sqrt(series.column("F"))
    assert np.max(gap) <= 1e-12


def test_observable_series_roundtrip(tmp_path):
    series = ObservableSeries(
        times=np.array([0.0, 0.5, 1.0]),
        series={"F": np.array([0.3, 0.2, 0.1]), "R": np.array([0.9, 0.95, 1.0])},
        metadata={"seed": 3},
    )
    csv_path = tmp_path / "series.csv"
    series.to_csv(csv_path)
    lines = csv_path.read_text().strip().split("\n")
    assert lines[0] == "time,F,R"
    assert len(lines) == 4

    json_path = tmp_path / "series.json"
    series.to_json(json_path)
    loaded = ObservableSeries.from_json(json_path)
    np.testing.assert_array_equal(loaded.times, series.times)
    np.testing.assert_array_equal(loaded.column("F"), series.column("F"))
    assert loaded.metadata == {"seed": 3}
    payload = json.loads(json_path.read_text())
    assert set(payload) == {"times", "series", "metadata"}


def test_observable_series_full_precision(tmp_path):
    value = 0.1234567890123456789
    series = ObservableSeries(times=np.array([0.0]), series={"x": np.array([value])})
    path = tmp_path / "precision.csv"
    series.to_csv(path)
    written = float(path.read_text().strip().split("\n")[1].split(",")[1])
    assert written == value


def test_observable_series_length_mismatch():
    with pytest.raises(ValueError, match="length"):
        ObservableSeries(times=np.array([0.0, 1.0]), series={"x": np.array([1.0])})
