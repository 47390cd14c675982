"""Right-hand sides: centroid reduction, real restriction, tensor model."""

import numpy as np
import pytest

from lohesphere.dynamics import (
    CouplingParams,
    Ensemble,
    TensorEnsemble,
    lhs_rhs,
    lhs_rhs_pairwise,
    ls_rhs,
    lt_rhs,
    mean_field_velocity,
)
from lohesphere.geometry import hermitian_inner
from lohesphere.integrators import rk4_step
from lohesphere.sampling import random_skew_hermitian, random_sphere_states
from lohesphere.transport import EmpiricalMeasure

PARAMS = CouplingParams(1.0, 0.3)


def _random_ensemble(rng, n, d, params=PARAMS, omega_scale=0.0, heterogeneous=False):
    states = random_sphere_states(rng, n, d)
    if heterogeneous:
        freqs = np.stack([random_skew_hermitian(rng, d, omega_scale) for _ in range(n)])
        return Ensemble(states, freqs, params)
    if omega_scale == 0.0:
        return Ensemble.zero_frequency(states, params)
    return Ensemble.with_common_frequency(states, random_skew_hermitian(rng, d, omega_scale), params)


def test_consensus_is_equilibrium():
    # dyadic entries keep every reduction exact, so consensus is an exact
    # equilibrium at the bit level, not a 1e-16 one
    state = np.array([0.5, 0.5j, 0.5, 0.5], dtype=complex)
    states = np.tile(state, (5, 1))
    ens = Ensemble.zero_frequency(states, PARAMS)
    assert np.all(lhs_rhs(ens) == 0.0)


def test_consensus_is_equilibrium_generic_count():
    state = np.array([0.6, 0.8j, 0.0], dtype=complex)
    states = np.tile(state, (5, 1))
    ens = Ensemble.zero_frequency(states, PARAMS)
    np.testing.assert_allclose(lhs_rhs(ens), np.zeros((5, 3)), atol=1e-15)


def test_antipodal_pair_is_equilibrium():
    states = np.array([[1.0, 0.0], [-1.0, 0.0]], dtype=complex)
    ens = Ensemble.zero_frequency(states, PARAMS)
    np.testing.assert_allclose(lhs_rhs(ens), np.zeros((2, 2)), atol=1e-16)
    np.testing.assert_allclose(lhs_rhs_pairwise(ens), np.zeros((2, 2)), atol=1e-15)


def test_single_particle_feels_only_free_flow():
    rng = np.random.default_rng(0)
    z = random_sphere_states(rng, 1, 4)
    omega = random_skew_hermitian(rng, 4, 1.0)
    ens = Ensemble.with_common_frequency(z, omega, PARAMS)
    expected = z @ omega.T
    np.testing.assert_allclose(lhs_rhs(ens), expected, atol=1e-16)
    np.testing.assert_allclose(lhs_rhs_pairwise(ens), expected, atol=1e-15)


def test_rhs_is_tangent():
    rng = np.random.default_rng(1)
    for het in (False, True):
        ens = _random_ensemble(rng, 24, 5, omega_scale=0.8, heterogeneous=het)
        rhs = lhs_rhs(ens)
        radial = np.einsum("jd,jd->j", np.conj(rhs), ens.states).real
        assert np.max(np.abs(radial)) < 1e-12


def test_centroid_reduction_matches_pairwise():
    rng = np.random.default_rng(2)
    for n in (2, 3, 17, 64):
        for _ in range(25):
            k0, k1 = rng.standard_normal(2)
            ens = _random_ensemble(rng, n, 4, CouplingParams(k0, k1), omega_scale=0.5)
            np.testing.assert_allclose(
                lhs_rhs(ens), lhs_rhs_pairwise(ens), atol=1e-12, rtol=0
            )


def test_permutation_equivariance():
    rng = np.random.default_rng(3)
    ens = _random_ensemble(rng, 12, 3, omega_scale=0.5, heterogeneous=True)
    perm = rng.permutation(12)
    permuted = Ensemble(ens.states[perm], ens.frequencies[perm], ens.params)
    np.testing.assert_allclose(lhs_rhs(permuted), lhs_rhs(ens)[perm], atol=1e-13)


def test_ls_matches_complex_rhs_on_real_data():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((10, 4))
    x /= np.linalg.norm(x, axis=1)[:, None]
    g = rng.standard_normal((4, 4))
    omega = 0.5 * (g - g.T)
    ens = Ensemble.with_common_frequency(x.astype(complex), omega.astype(complex), PARAMS)
    real = ls_rhs(ens)
    full = lhs_rhs(ens)
    np.testing.assert_allclose(real, full.real, atol=1e-13)
    assert np.max(np.abs(full.imag)) < 1e-13


def test_ls_consensus_is_equilibrium():
    x = np.tile(np.array([0.5, 0.5, 0.5, 0.5]), (6, 1)).astype(complex)
    ens = Ensemble.zero_frequency(x, PARAMS)
    assert np.all(ls_rhs(ens) == 0.0)


def test_ls_orthogonal_pair_hand_value():
    # x1 = e1, x2 = e2 on the circle: dx1/dt = kappa0 (x_c - (x_c . x1) x1)
    # with x_c = (e1 + e2)/2, so dx1/dt = kappa0 e2 / 2
    x = np.array([[1.0, 0.0], [0.0, 1.0]], dtype=complex)
    kappa0 = 0.8
    ens = Ensemble.zero_frequency(x, CouplingParams(kappa0, 0.0))
    out = ls_rhs(ens)
    np.testing.assert_allclose(out[0], [0.0, kappa0 / 2.0], atol=1e-15)
    np.testing.assert_allclose(out[1], [kappa0 / 2.0, 0.0], atol=1e-15)


def test_ls_rejects_complex_input():
    rng = np.random.default_rng(5)
    ens = _random_ensemble(rng, 4, 3)
    with pytest.raises(ValueError, match="real"):
        ls_rhs(ens)


def test_real_data_stay_real_over_many_steps():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((8, 3))
    x /= np.linalg.norm(x, axis=1)[:, None]
    ens = Ensemble.zero_frequency(x.astype(complex), CouplingParams(1.0, 0.4))
    states = ens.states

    def rhs(s):
        return lhs_rhs(ens.replace_states(s))

    for _ in range(10_000):
        states = rk4_step(states, 1e-3, rhs)
        states /= np.linalg.norm(states, axis=1)[:, None]
    assert np.max(np.abs(states.imag)) <= 1e-12


def _rank1_tensor_ensemble(rng, n, d, k0, k1):
    states = random_sphere_states(rng, n, d)
    freqs = np.stack([random_skew_hermitian(rng, d, 0.7) for _ in range(n)])
    ens = Ensemble(states, freqs, CouplingParams(k0, k1))
    tens = TensorEnsemble(states, freqs, {(0,): k0, (1,): k1})
    return ens, tens


def test_lt_rank1_reduction():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(2, 9))
        k0, k1 = np.abs(rng.standard_normal(2))
        ens, tens = _rank1_tensor_ensemble(rng, n, 4, k0, k1)
        np.testing.assert_allclose(lt_rhs(tens), lhs_rhs(ens), atol=1e-12, rtol=0)


def test_lt_identical_tensors_no_free_flow():
    t = np.zeros((2, 3), dtype=complex)
    t[:, 0] = 1.0
    freqs = np.zeros((2, 3, 3), dtype=complex)
    tens = TensorEnsemble(t, freqs, {(0,): 1.0, (1,): 0.5})
    np.testing.assert_allclose(lt_rhs(tens), np.zeros((2, 3)), atol=1e-15)


def test_lt_single_tensor_free_flow_only():
    rng = np.random.default_rng(8)
    states = random_sphere_states(rng, 1, 3)
    freqs = random_skew_hermitian(rng, 3, 1.0)[None]
    tens = TensorEnsemble(states, freqs, {(0,): 2.0, (1,): 1.0})
    np.testing.assert_allclose(lt_rhs(tens), states @ freqs[0].T, atol=1e-14)


def test_lt_rank2_norm_conservation():
    rng = np.random.default_rng(9)
    n, d1, d2 = 4, 3, 2
    t = rng.standard_normal((n, d1, d2)) + 1j * rng.standard_normal((n, d1, d2))
    t /= np.linalg.norm(t.reshape(n, -1), axis=1)[:, None, None]
    size = d1 * d2
    a = rng.standard_normal((n, size, size)) + 1j * rng.standard_normal((n, size, size))
    a = 0.5 * (a - np.conj(np.swapaxes(a, 1, 2)))
    freqs = a.reshape(n, d1, d2, d1, d2)
    couplings = {(0, 0): 1.0, (0, 1): 0.5, (1, 0): 0.25, (1, 1): 0.75}
    tens = TensorEnsemble(t, freqs, couplings)
    rhs = lt_rhs(tens)
    radial = np.einsum("jab,jab->j", np.conj(rhs), t).real
    assert np.max(np.abs(radial)) < 1e-12


def test_lt_warns_on_negative_coupling():
    rng = np.random.default_rng(10)
    states = random_sphere_states(rng, 3, 2)
    freqs = np.zeros((3, 2, 2), dtype=complex)
    with pytest.warns(UserWarning, match="negative coupling"):
        TensorEnsemble(states, freqs, {(0,): 1.0, (1,): -0.2})


def test_lt_rejects_incomplete_couplings():
    rng = np.random.default_rng(11)
    states = random_sphere_states(rng, 3, 2)
    freqs = np.zeros((3, 2, 2), dtype=complex)
    with pytest.raises(ValueError, match="index pattern"):
        TensorEnsemble(states, freqs, {(0,): 1.0})


def test_lt_rejects_non_unit_tensors():
    states = 2.0 * np.ones((2, 2), dtype=complex)
    freqs = np.zeros((2, 2, 2, 2, 2), dtype=complex)
    with pytest.raises(ValueError):
        TensorEnsemble(states, freqs, {(0,): 1.0, (1,): 1.0})


def test_mean_field_velocity_dirac_at_self():
    rng = np.random.default_rng(12)
    z = random_sphere_states(rng, 1, 4)[0]
    mu = EmpiricalMeasure.uniform(z[None, :])
    np.testing.assert_allclose(
        mean_field_velocity(mu, z, None, PARAMS), np.zeros(4), atol=1e-15
    )


def test_mean_field_velocity_matches_particle_rhs():
    rng = np.random.default_rng(13)
    ens = _random_ensemble(rng, 10, 3, omega_scale=0.6)
    mu = EmpiricalMeasure.uniform(ens.states)
    rhs = lhs_rhs(ens)
    omega = ens.frequencies[0]
    for j in range(10):
        v = mean_field_velocity(mu, ens.states[j], omega, ens.params)
        np.testing.assert_allclose(v, rhs[j], atol=1e-13)


def test_mean_field_velocity_vanishing_moment():
    states = np.array([[1.0, 0.0], [-1.0, 0.0]], dtype=complex)
    mu = EmpiricalMeasure.uniform(states)
    z = np.array([0.0, 1.0], dtype=complex)
    np.testing.assert_allclose(
        mean_field_velocity(mu, z, None, PARAMS), np.zeros(2), atol=1e-15
    )


def test_ensemble_validation():
    with pytest.raises(ValueError, match="unit norm"):
        Ensemble.zero_frequency(np.ones((3, 2), dtype=complex), PARAMS)
    states = np.eye(2, dtype=complex)
    with pytest.raises(ValueError, match="skew-Hermitian"):
        Ensemble.with_common_frequency(states, np.eye(2, dtype=complex), PARAMS)
    with pytest.raises(ValueError, match="finite"):
        CouplingParams(np.nan, 0.0)


def test_homogeneous_flag():
    rng = np.random.default_rng(14)
    states = random_sphere_states(rng, 3, 2)
    common = Ensemble.with_common_frequency(states, random_skew_hermitian(rng, 2, 1.0), PARAMS)
    assert common.homogeneous
    freqs = np.stack([random_skew_hermitian(rng, 2, 1.0) for _ in range(3)])
    mixed = Ensemble(states, freqs, PARAMS)
    assert not mixed.homogeneous
    with pytest.raises(ValueError, match="heterogeneous"):
        _ = mixed.common_frequency
