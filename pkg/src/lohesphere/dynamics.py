"""Right-hand sides of the aggregation models.

The core model couples N unit vectors in C^d through their centroid
``z_c = (1/N) sum_k z_k``:

    dz_j/dt = Omega_j z_j
              + kappa0 (<z_j, z_j> z_c - <z_c, z_j> z_j)
              + kappa1 (<z_j, z_c> - <z_c, z_j>) z_j

Every evaluation is O(N d) after one centroid reduction; the O(N^2)
pairwise form is kept solely as a correctness oracle.  The real
restriction (``ls_rhs``) and the rank-m tensor generalization
(``lt_rhs``, whose rank-1 case reproduces the model above) share the
same centroid structure.  All right-hand sides are tangent to the
sphere, which is what conserves the particle norms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from numpy.typing import NDArray

from .geometry import SKEW_TOL, UNIT_TOL

__all__ = [
    "CouplingParams",
    "Ensemble",
    "TensorEnsemble",
    "lhs_rhs",
    "lhs_rhs_pairwise",
    "ls_rhs",
    "lt_rhs",
    "mean_field_velocity",
]

#: tolerance for deciding that an ensemble's frequencies are all equal
HOMOGENEOUS_TOL = 1e-12

#: maximal imaginary part accepted by the real-restricted model
REAL_TOL = 1e-14


@dataclass(frozen=True)
class CouplingParams:
    """Coupling gains of the model: kappa0 (sphere gain) and kappa1 (rotational gain).

    Both carry units 1/time.  No sign restriction is imposed here; the
    exponential-aggregation regime allows kappa1 < 0.
    """

    kappa0: float
    kappa1: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.kappa0) and math.isfinite(self.kappa1)):
            raise ValueError(f"coupling gains must be finite, got {self}")


class Ensemble:
    """Full phase-space configuration: N unit states, N frequencies, couplings.

    states has shape (N, d) complex; frequencies is stored as (N, d, d)
    (a single (d, d) matrix is broadcast to all particles).  The
    ``homogeneous`` flag records whether all frequency matrices agree to
    Frobenius tolerance 1e-12 and is validated at construction.
    """

    __slots__ = ("states", "frequencies", "params", "homogeneous", "_omega_zero")

    def __init__(self, states, frequencies, params: CouplingParams):
        states = np.array(states, dtype=np.complex128)
        if states.ndim != 2:
            raise ValueError(f"states must have shape (N, d), got {states.shape}")
        n, d = states.shape
        norms = np.linalg.norm(states, axis=1)
        if not np.all(np.isfinite(norms)) or np.max(np.abs(norms - 1.0)) > UNIT_TOL:
            worst = float(np.max(np.abs(norms - 1.0)))
            raise ValueError(f"ensemble states must be unit norm, worst drift {worst:g}")

        frequencies = np.array(frequencies, dtype=np.complex128)
        if frequencies.shape == (d, d):
            frequencies = np.broadcast_to(frequencies, (n, d, d)).copy()
        if frequencies.shape != (n, d, d):
            raise ValueError(
                f"frequencies must have shape (d, d) or (N, d, d), got {frequencies.shape}"
            )
        skew_defect = np.linalg.norm(
            frequencies + np.conj(np.swapaxes(frequencies, 1, 2)), axis=(1, 2)
        )
        scale = np.maximum(1.0, np.linalg.norm(frequencies, axis=(1, 2)))
        if np.any(skew_defect > SKEW_TOL * scale):
            raise ValueError("ensemble frequencies must be skew-Hermitian")

        self.states = states
        self.frequencies = frequencies
        self.params = params
        spread = np.linalg.norm(frequencies - frequencies[0], axis=(1, 2))
        self.homogeneous = bool(np.max(spread) <= HOMOGENEOUS_TOL)
        self._omega_zero = bool(np.max(np.abs(frequencies)) == 0.0)

    @classmethod
    def with_common_frequency(cls, states, omega, params: CouplingParams) -> "Ensemble":
        """Ensemble in which every particle shares the frequency matrix omega."""
        states = np.asarray(states, dtype=np.complex128)
        return cls(states, np.asarray(omega, dtype=np.complex128), params)

    @classmethod
    def zero_frequency(cls, states, params: CouplingParams) -> "Ensemble":
        """Ensemble with Omega_j = 0 (the normal form of the homogeneous model)."""
        states = np.asarray(states, dtype=np.complex128)
        d = states.shape[1]
        return cls(states, np.zeros((d, d), dtype=np.complex128), params)

    @property
    def n_particles(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def common_frequency(self) -> NDArray[np.complexfloating]:
        if not self.homogeneous:
            raise ValueError("ensemble frequencies are heterogeneous")
        return self.frequencies[0]

    def replace_states(self, states: NDArray[np.complexfloating]) -> "Ensemble":
        """New ensemble sharing frequencies/params; skips frequency revalidation.

        Intended for the integrator hot path, where states were just
        renormalized and frequencies are untouched.
        """
        new = object.__new__(Ensemble)
        new.states = states
        new.frequencies = self.frequencies
        new.params = self.params
        new.homogeneous = self.homogeneous
        new._omega_zero = self._omega_zero
        return new


def _free_flow(ens: Ensemble, states: NDArray[np.complexfloating]) -> NDArray[np.complexfloating]:
    """Omega_j z_j for every particle (skipped entirely when all Omega_j = 0)."""
    if ens._omega_zero:
        return np.zeros_like(states)
    if ens.homogeneous:
        return states @ ens.frequencies[0].T
    return np.einsum("jab,jb->ja", ens.frequencies, states)


def coupling_rhs(
    states: NDArray[np.complexfloating], params: CouplingParams
) -> NDArray[np.complexfloating]:
    """Centroid-reduced coupling force, without the free flow.

    One reduction gives z_c; the per-particle force follows in O(N d).
    """
    zc = states.mean(axis=0)
    # Both reductions share one multiply-then-sum path so that the
    # self-coupling bracket cancels exactly when z_c coincides bitwise with a
    # state (consensus and N = 1 are exact equilibria, not 1e-16 ones).
    inner_cj = (states * np.conj(zc)[None, :]).sum(axis=1)    # <z_c, z_j>
    norm_sq = (states * np.conj(states)).sum(axis=1).real
    kappa0, kappa1 = params.kappa0, params.kappa1
    out = kappa0 * (norm_sq[:, None] * zc[None, :] - inner_cj[:, None] * states)
    if kappa1 != 0.0:
        # <z_j, z_c> - <z_c, z_j> = conj(a) - a = -2i Im(a) with a = <z_c, z_j>
        out += kappa1 * (-2j * inner_cj.imag)[:, None] * states
    return out


def lhs_rhs(ens: Ensemble) -> NDArray[np.complexfloating]:
    """Time derivative of every state under the centroid-reduced model."""
    return _free_flow(ens, ens.states) + coupling_rhs(ens.states, ens.params)


def lhs_rhs_pairwise(ens: Ensemble) -> NDArray[np.complexfloating]:
    """O(N^2) reference evaluation via the explicit double sum.

    Exists solely as the correctness oracle for the centroid reduction;
    agreement is required to 1e-12.
    """
    states = ens.states
    n = states.shape[0]
    kappa0, kappa1 = ens.params.kappa0, ens.params.kappa1
    gram = np.conj(states) @ states.T            # gram[k, j] = <z_k, z_j>
    norm_sq = np.diag(gram).real
    col_sum = gram.sum(axis=0)                   # sum_k <z_k, z_j>
    sum_states = states.sum(axis=0)
    out = _free_flow(ens, states)
    out += (kappa0 / n) * (norm_sq[:, None] * sum_states[None, :] - col_sum[:, None] * states)
    # sum_k (<z_j, z_k> - <z_k, z_j>) = conj(col_sum_j) - col_sum_j
    out += (kappa1 / n) * (np.conj(col_sum) - col_sum)[:, None] * states
    return out


def ls_rhs(ens: Ensemble) -> NDArray[np.floating]:
    """Real-restricted model on the real unit sphere.

    Requires real states and frequencies (imaginary parts below 1e-14).
    The rotational gain drops out identically for real data, so only the
    kappa0 term survives:  dx_j/dt = Omega_j x_j + kappa0 (<x_j,x_j> x_c - <x_c,x_j> x_j).
    """
    if np.max(np.abs(ens.states.imag)) > REAL_TOL:
        raise ValueError("real-restricted model requires real states")
    if np.max(np.abs(ens.frequencies.imag)) > REAL_TOL:
        raise ValueError("real-restricted model requires real frequency matrices")
    x = ens.states.real.copy()
    xc = x.mean(axis=0)
    inner_cj = (x * xc[None, :]).sum(axis=1)
    norm_sq = (x * x).sum(axis=1)
    out = ens.params.kappa0 * (norm_sq[:, None] * xc[None, :] - inner_cj[:, None] * x)
    if not ens._omega_zero:
        omegas = ens.frequencies.real
        if ens.homogeneous:
            out += x @ omegas[0].T
        else:
            out += np.einsum("jab,jb->ja", omegas, x)
    return out


class TensorEnsemble:
    """N rank-m complex tensors with unit Frobenius norm, skew frequency tensors
    and one coupling gain per index pattern in {0,1}^m.

    Restricted to m <= 3 and at most 10^4 entries per tensor: enough for
    desk-scale verification, and the general case adds only index bookkeeping.
    """

    __slots__ = ("tensors", "frequency_tensors", "couplings", "rank", "shape")

    MAX_RANK = 3
    MAX_SIZE = 10_000

    def __init__(self, tensors, frequency_tensors, couplings: Mapping[tuple, float]):
        tensors = np.array(tensors, dtype=np.complex128)
        if tensors.ndim < 2:
            raise ValueError("tensors must have shape (N, d1, ..., dm)")
        self.rank = tensors.ndim - 1
        self.shape = tensors.shape[1:]
        if self.rank > self.MAX_RANK:
            raise ValueError(f"rank {self.rank} exceeds supported maximum {self.MAX_RANK}")
        size = int(np.prod(self.shape))
        if size > self.MAX_SIZE:
            raise ValueError(f"tensor size {size} exceeds supported maximum {self.MAX_SIZE}")

        n = tensors.shape[0]
        norms = np.linalg.norm(tensors.reshape(n, -1), axis=1)
        if np.max(np.abs(norms - 1.0)) > UNIT_TOL:
            raise ValueError("tensors must have unit Frobenius norm")

        frequency_tensors = np.array(frequency_tensors, dtype=np.complex128)
        if frequency_tensors.shape != (n, *self.shape, *self.shape):
            raise ValueError(
                "frequency tensors must have shape (N, d1..dm, d1..dm), got "
                f"{frequency_tensors.shape}"
            )
        flat = frequency_tensors.reshape(n, size, size)
        defect = np.linalg.norm(flat + np.conj(np.swapaxes(flat, 1, 2)), axis=(1, 2))
        scale = np.maximum(1.0, np.linalg.norm(flat, axis=(1, 2)))
        if np.any(defect > SKEW_TOL * scale):
            raise ValueError("frequency tensors must satisfy conj(A)[b,g] = -A[g,b]")

        patterns = {tuple(int(b) for b in key) for key in couplings}
        expected = {tuple(bits) for bits in np.ndindex(*(2,) * self.rank)}
        if patterns != expected:
            raise ValueError(
                f"couplings must cover every index pattern in {{0,1}}^{self.rank}; "
                f"got {sorted(patterns)}"
            )
        self.couplings = {tuple(int(b) for b in k): float(v) for k, v in couplings.items()}
        if any(v < 0.0 for v in self.couplings.values()):
            warnings.warn(
                "negative coupling gain passed to the tensor model; the tensor-level "
                "theory assumes nonnegative gains (the rank-1 model is the path that "
                "supports negative rotational gain)",
                stacklevel=2,
            )
        self.tensors = tensors
        self.frequency_tensors = frequency_tensors

    @property
    def n_particles(self) -> int:
        return self.tensors.shape[0]


_OUT_LETTERS = "abc"
_SUM_LETTERS = "uvw"


def lt_rhs(tens: TensorEnsemble) -> NDArray[np.complexfloating]:
    """Component-wise rank-m tensor model with centroid T_c = (1/N) sum_k T_k.

    For each index pattern i in {0,1}^m the coupling contributes

        kappa_i sum_g ( T_c[sel(i)] conj(T_j)[g] T_j[sel(1-i)]
                        - T_j[sel(i)] conj(T_c)[g] T_j[sel(1-i)] )

    where sel(i) picks the free index in slot k when i_k = 0 and the summed
    index g_k when i_k = 1.  Pattern (0,...,0) is the sphere-type gain and
    (1,...,1) the rotational one; for m = 1 this reduces exactly to the
    rank-1 model under the correspondence kappa_(0) = kappa0, kappa_(1) = kappa1.
    """
    m = tens.rank
    out_idx = _OUT_LETTERS[:m]
    sum_idx = _SUM_LETTERS[:m]
    tensors = tens.tensors
    t_c = tensors.mean(axis=0)
    conj_t = np.conj(tensors)

    out = np.einsum(
        f"j{out_idx}{sum_idx},j{sum_idx}->j{out_idx}", tens.frequency_tensors, tensors
    )
    for pattern, kappa in tens.couplings.items():
        if kappa == 0.0:
            continue
        sel = "".join(out_idx[k] if pattern[k] == 0 else sum_idx[k] for k in range(m))
        sel_comp = "".join(sum_idx[k] if pattern[k] == 0 else out_idx[k] for k in range(m))
        term_c = np.einsum(
            f"{sel},j{sum_idx},j{sel_comp}->j{out_idx}", t_c, conj_t, tensors
        )
        term_j = np.einsum(
            f"j{sel},{sum_idx},j{sel_comp}->j{out_idx}", tensors, np.conj(t_c), tensors
        )
        out += kappa * (term_c - term_j)
    return out


def mean_field_velocity(measure, z, omega, params: CouplingParams) -> NDArray[np.complexfloating]:
    """Alignment force of an atomic measure at state z, plus the free flow.

    For a measure with first moment J the force is
    ``Omega z + kappa0 (J - <J, z> z) + kappa1 (<z, J> - <J, z>) z``;
    on a uniform measure over an ensemble this reproduces the coupling part
    of the particle right-hand side.
    """
    if measure.atoms.shape[0] == 0:
        raise ValueError("measure has empty support")
    z = np.asarray(z, dtype=np.complex128)
    j_mu = measure.weights @ measure.atoms
    inner_jz = complex(np.vdot(j_mu, z))       # <J, z>
    inner_zj = complex(np.vdot(z, j_mu))       # <z, J>
    out = params.kappa0 * (j_mu - inner_jz * z) + params.kappa1 * (inner_zj - inner_jz) * z
    if omega is not None:
        out = out + np.asarray(omega, dtype=np.complex128) @ z
    return out
