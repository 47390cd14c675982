"""Quantitative verification experiments.

Seven named experiments, each packaging one quantitative statement about
the aggregation model into a deterministic, seeded run with explicit
pass/fail verdicts:

  e1  exponential decay of the worst-pair functionals F and G
  e2  l^p stability of the particle flow with the constant exp(2T(|k0|+|k0+2k1|))
  e3  Cauchy property of nested empirical measures in W_2 (mean-field limit)
  e4  finite-time W_p stability of measure solutions under initial perturbations
  e5  order-parameter calculus: monotone R^2, analytic rate, defect decay, dJ/dt bound
  e6  complete aggregation vs an exactly antipodal exceptional atom (bi-polar limit)
  e7  solution splitting: rotating frame reproduces the zero-frequency flow

Every verdict cites the tolerance it used; each report serializes to JSON
with its time series as separate CSVs.  All randomness flows from the
config seed.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np
from numpy.typing import NDArray

from .dynamics import CouplingParams, Ensemble, lhs_rhs
from .geometry import matrix_exp_family
from .integrators import (
    IntegratorConfig,
    Trajectory,
    integrate,
    integrate_pair_distance,
    rk4_step,
)
from .observables import (
    ObservableSeries,
    aggregation_defect,
    dj_dt_norm_bound_check,
    functional_F,
    functional_G,
    j_vector,
    order_parameter,
    r_squared_rate,
)
from .sampling import (
    admissible_cap_states,
    admissible_threshold,
    jitter_states,
    random_skew_hermitian,
    random_sphere_states,
    sample_admissible,
)
from .transport import (
    EmpiricalMeasure,
    wasserstein_general,
    wasserstein_uniform,
    wasserstein_uniform_nested,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "CheckResult",
    "ExperimentReport",
    "EXPERIMENT_IDS",
    "run_experiment",
    "run_e1",
    "run_e2",
    "run_e3",
    "run_e4",
    "run_e5",
    "run_e6",
    "run_e7",
]


class ConfigError(ValueError):
    """Invalid experiment configuration (maps to CLI exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative experiment configuration (flat key-value tree).

    Shared keys cover the ensemble (n, d), gains (kappa0, kappa1, delta),
    stepping (dt, t_end, n_samples) and the seed; the remaining knobs apply
    to individual experiments and keep their defaults elsewhere.
    """

    experiment: str
    n: int = 64
    d: int = 4
    kappa0: float = 1.0
    kappa1: float = 0.0
    delta: float = 0.05
    dt: float = 1e-3
    t_end: float = 20.0
    seed: int = 7
    n_samples: int = 200
    omega_scale: float = 0.0
    heterogeneous: bool = False
    # e2 / e4: stability sweeps
    n_seeds: int = 20
    jitter: float = 1e-2
    horizons: tuple[float, ...] = (1.0, 2.0)
    p_values: tuple[float, ...] = (1.0, 2.0, 4.0)
    t_mid: float = 10.0
    t_long: float = 100.0
    # e3: nested ensemble sizes
    n_grid: tuple[int, ...] = (16, 32, 64, 128)
    # e6 scenario b: transverse spread of the mirror cluster
    cluster_spread: float = 0.2
    workers: int = 1

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENT_IDS:
            raise ConfigError(
                f"unknown experiment id {self.experiment!r}; expected one of {sorted(EXPERIMENT_IDS)}"
            )
        if self.n < 1 or self.d < 1:
            raise ConfigError("n and d must be positive")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.t_end < 0:
            raise ConfigError("t_end must be nonnegative")
        if self.n_samples < 2:
            raise ConfigError("n_samples must be at least 2")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if "experiment" not in raw:
            raise ConfigError("config is missing the 'experiment' key")
        experiment = raw["experiment"]
        if experiment not in DEFAULTS:
            raise ConfigError(
                f"unknown experiment id {experiment!r}; expected one of {sorted(EXPERIMENT_IDS)}"
            )
        known = {f.name: f for f in fields(cls)}
        merged: dict = dict(DEFAULTS[experiment])
        for key, value in raw.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            merged[key] = value
        merged["experiment"] = experiment
        coerced: dict = {}
        for key, value in merged.items():
            try:
                coerced[key] = _coerce(known[key].type, value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"config key {key!r}: {exc}") from exc
        return cls(**coerced)

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("horizons", "p_values", "n_grid"):
            out[key] = list(out[key])
        return out


def _coerce(type_name: str, value):
    if type_name == "int":
        if isinstance(value, bool) or int(value) != value:
            raise ValueError(f"expected an integer, got {value!r}")
        return int(value)
    if type_name == "float":
        return float(value)
    if type_name == "bool":
        if not isinstance(value, bool):
            raise ValueError(f"expected a boolean, got {value!r}")
        return value
    if type_name == "str":
        return str(value)
    if type_name.startswith("tuple"):
        seq = tuple(value)
        if "int" in type_name:
            return tuple(int(v) for v in seq)
        return tuple(float(v) for v in seq)
    return value


@dataclass
class CheckResult:
    """One asserted bound: observed value, limit, and the tolerance used.

    gating=False marks report-only observations that do not affect the
    experiment verdict (used where only an empirical trend is recorded).
    """

    name: str
    passed: bool
    observed: float
    limit: float
    comparator: str
    tolerance: float
    gating: bool = True
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "observed": self.observed,
            "limit": self.limit,
            "comparator": self.comparator,
            "tolerance": self.tolerance,
            "gating": self.gating,
            "detail": self.detail,
        }


def _check_le(name, observed, limit, tolerance, gating=True, detail="") -> CheckResult:
    return CheckResult(
        name=name,
        passed=bool(observed <= limit + tolerance),
        observed=float(observed),
        limit=float(limit),
        comparator="<=",
        tolerance=float(tolerance),
        gating=gating,
        detail=detail,
    )


def _check_ge(name, observed, limit, tolerance, gating=True, detail="") -> CheckResult:
    return CheckResult(
        name=name,
        passed=bool(observed >= limit - tolerance),
        observed=float(observed),
        limit=float(limit),
        comparator=">=",
        tolerance=float(tolerance),
        gating=gating,
        detail=detail,
    )


@dataclass
class ExperimentReport:
    """Experiment output: config snapshot, verdicts, summary data, series."""

    experiment: str
    config: dict
    seed: int
    checks: list[CheckResult] = field(default_factory=list)
    data: dict = field(default_factory=dict)
    series: dict[str, ObservableSeries] = field(default_factory=dict)
    wall_clock: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.gating)

    def to_payload(self) -> dict:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "data": _jsonable(self.data),
            "wall_clock_seconds": self.wall_clock,
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------


def _integrator_config(cfg: ExperimentConfig, t_end: float | None = None) -> IntegratorConfig:
    t_end = cfg.t_end if t_end is None else t_end
    n_steps = max(int(round(t_end / cfg.dt)), 1)
    record_every = max(n_steps // (cfg.n_samples - 1), 1)
    return IntegratorConfig(t_end=t_end, dt=cfg.dt, record_every=record_every)


def standard_observers(params: CouplingParams, with_dj: bool) -> dict:
    """Observer set recorded along every experiment trajectory."""

    def as_measure(states):
        return EmpiricalMeasure.uniform(states)

    obs = {
        "F": lambda t, s: functional_F(s),
        "G": lambda t, s: functional_G(s),
        "R": lambda t, s: order_parameter(as_measure(s)),
        "R2": lambda t, s: order_parameter(as_measure(s)) ** 2,
        "defect": lambda t, s: aggregation_defect(as_measure(s)),
    }
    if with_dj:
        obs["dj_norm"] = lambda t, s: dj_dt_norm_bound_check(
            as_measure(s), params.kappa0, params.kappa1
        )[0]
    return obs


def pair_inequality_check(series: ObservableSeries, tolerance: float = 1e-12) -> CheckResult:
    """G <= 2 sqrt(F) at every recorded time."""
    gap = np.max(series.column("G") - 2.0 * np.sqrt(np.maximum(series.column("F"), 0.0)))
    return _check_le(
        "pair_inequality",
        gap,
        0.0,
        tolerance,
        detail="max over recorded times of G - 2 sqrt(F)",
    )


def fd_r_squared_rate(ens: Ensemble, h: float = 1e-3) -> float:
    """Centered finite difference of R^2 along the flow, Richardson-extrapolated once."""

    def rhs(states):
        return lhs_rhs(ens.replace_states(states))

    def r2_after(step_h: float) -> float:
        states = rk4_step(ens.states, step_h, rhs) if step_h != 0.0 else ens.states
        zc = states.mean(axis=0)
        return float(np.vdot(zc, zc).real)

    def centered(step_h: float) -> float:
        return (r2_after(step_h) - r2_after(-step_h)) / (2.0 * step_h)

    d_h = centered(h)
    d_h2 = centered(h / 2.0)
    return (4.0 * d_h2 - d_h) / 3.0


def fit_decay_rate(times: NDArray, values: NDArray, floor: float = 1e-300) -> float:
    """Least-squares slope of log(values); returns the positive decay rate."""
    mask = values > max(floor, values[0] * 1e-12)
    if np.count_nonzero(mask) < 2:
        return 0.0
    slope = np.polyfit(times[mask], np.log(values[mask]), 1)[0]
    return float(-slope)


def _admissible_ensemble(cfg: ExperimentConfig) -> Ensemble:
    try:
        return sample_admissible(
            cfg.n,
            cfg.d,
            cfg.kappa0,
            cfg.kappa1,
            cfg.delta,
            cfg.seed,
            omega_scale=cfg.omega_scale,
            heterogeneous=cfg.heterogeneous,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# E1: exponential aggregation
# ---------------------------------------------------------------------------


def run_e1(cfg: ExperimentConfig) -> ExperimentReport:
    """Exponential decay of F and G for admissible data.

    Asserts F(t) <= F0 exp(-2 kappa0 delta t) and
    G(t) <= 2 sqrt(F0) exp(-kappa0 delta t) at every recorded time, checks the
    differential inequality of F by finite differences, and fits the empirical
    decay exponent (report-only against the guaranteed rate).
    """
    ens = _admissible_ensemble(cfg)
    params = ens.params
    f0 = functional_F(ens.states)
    icfg = _integrator_config(cfg)
    _, series = integrate(ens, icfg, standard_observers(params, with_dj=False))

    times = series.times
    f_vals = series.column("F")
    g_vals = series.column("G")
    rate = 2.0 * cfg.kappa0 * cfg.delta
    f_bound = f0 * np.exp(-rate * times)
    g_bound = 2.0 * math.sqrt(f0) * np.exp(-0.5 * rate * times)

    checks = [
        _check_le(
            "F_exponential_bound",
            np.max(f_vals - f_bound),
            0.0,
            1e-12,
            detail=f"max_t F(t) - F0 exp(-{rate:g} t); first violation would be reported",
        ),
        _check_le(
            "G_exponential_bound",
            np.max(g_vals - g_bound),
            0.0,
            1e-12,
            detail=f"max_t G(t) - 2 sqrt(F0) exp(-{rate / 2:g} t)",
        ),
        pair_inequality_check(series),
    ]
    bad = np.nonzero(f_vals > f_bound + 1e-12)[0]
    if bad.size:
        checks[0].detail += f"; first violating time t = {times[bad[0]]:g}"

    # differential inequality of F, discretization error absorbed by 1e-3 slack
    ratio = 2.0 * abs(cfg.kappa1) / cfg.kappa0
    if len(times) >= 3:
        fdot = (f_vals[2:] - f_vals[:-2]) / (times[2:] - times[:-2])
        f_mid = f_vals[1:-1]
        rhs = -2.0 * cfg.kappa0 * (1.0 - f_mid - ratio) * f_mid + 1e-3 * (1.0 + np.abs(fdot))
        checks.append(
            _check_le(
                "f_differential_inequality",
                np.max(fdot - rhs),
                0.0,
                0.0,
                detail="dF/dt <= -2 kappa0 (1 - F - 2|kappa1|/kappa0) F + 1e-3 (1 + |dF/dt|)",
            )
        )

    fitted = fit_decay_rate(times, f_vals)
    checks.append(
        _check_ge(
            "fitted_decay_rate",
            fitted,
            rate,
            0.0,
            gating=False,
            detail="least-squares exponent of F vs the guaranteed rate (report-only)",
        )
    )

    return ExperimentReport(
        experiment="e1",
        config=cfg.to_dict(),
        seed=cfg.seed,
        checks=checks,
        data={"f0": f0, "guaranteed_rate": rate, "fitted_rate": fitted},
        series={"observables": series},
    )


# ---------------------------------------------------------------------------
# E2: l^p stability
# ---------------------------------------------------------------------------


def _stability_constant(kappa0: float, kappa1: float, horizon: float) -> float:
    return math.exp(2.0 * horizon * (abs(kappa0) + abs(kappa0 + 2.0 * kappa1)))


def run_e2(cfg: ExperimentConfig) -> ExperimentReport:
    """l^p stability of the particle flow.

    For generic (not necessarily admissible) data and every p in p_values,
    T in horizons:  sup_{t<=T} ||Z - Z~||_p <= exp(2T(|k0|+|k0+2k1|)) ||Z0 - Z~0||_p
    across n_seeds independent draws.  Identical initial data must stay
    identical to 1e-9.  For admissible data the p = 2 ratio saturates: the
    sup over t <= t_long exceeds the sup over t <= t_mid by at most 5%.
    """
    params = CouplingParams(cfg.kappa0, cfg.kappa1)
    t_max = max(cfg.horizons)
    icfg = _integrator_config(cfg, t_end=t_max)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_seeds + 1)

    worst: dict[tuple[float, float], float] = {
        (horizon, p): 0.0 for horizon in cfg.horizons for p in cfg.p_values
    }
    refined_delta = 0.0
    for k in range(cfg.n_seeds):
        rng = np.random.default_rng(seeds[k])
        states = random_sphere_states(rng, cfg.n, cfg.d)
        other = jitter_states(rng, states, cfg.jitter)
        if cfg.heterogeneous:
            freqs = np.stack(
                [random_skew_hermitian(rng, cfg.d, cfg.omega_scale) for _ in range(cfg.n)]
            )
        else:
            freqs = np.broadcast_to(
                random_skew_hermitian(rng, cfg.d, cfg.omega_scale), (cfg.n, cfg.d, cfg.d)
            ).copy()
        ens_a = Ensemble(states, freqs, params)
        ens_b = Ensemble(other, freqs, params)
        times, dists = integrate_pair_distance(ens_a, ens_b, icfg, cfg.p_values)
        for p in cfg.p_values:
            track = dists[p]
            initial = track[0]
            for horizon in cfg.horizons:
                sup = float(np.max(track[times <= horizon + 1e-12]))
                bound = _stability_constant(cfg.kappa0, cfg.kappa1, horizon) * initial
                worst[(horizon, p)] = max(worst[(horizon, p)], sup / bound)
        if k == 0:
            # grid-density cross-check: the sup changes little at double density
            dense = replace(icfg, record_every=max(icfg.record_every // 2, 1))
            _, dists_d = integrate_pair_distance(ens_a, ens_b, dense, (2.0,))
            sup_coarse = float(np.max(dists[2.0]))
            sup_dense = float(np.max(dists_d[2.0]))
            refined_delta = abs(sup_dense - sup_coarse) / max(sup_coarse, 1e-300)

    checks = [
        _check_le(
            f"lp_bound_T{horizon:g}_p{p:g}",
            worst[(horizon, p)],
            1.0,
            0.0,
            detail=(
                f"worst seed ratio sup_t ||Z-Z~||_p / (G_T ||Z0-Z~0||_p), "
                f"G_T = exp(2*{horizon:g}*(|kappa0|+|kappa0+2 kappa1|)) "
                f"= {_stability_constant(cfg.kappa0, cfg.kappa1, horizon):.6g}"
            ),
        )
        for horizon in cfg.horizons
        for p in cfg.p_values
    ]
    checks.append(
        _check_le(
            "grid_density_cross_check",
            refined_delta,
            0.01,
            0.0,
            gating=False,
            detail="relative change of the p=2 sup at doubled sample density (report-only)",
        )
    )

    # identical initial data stay identical (uniqueness of the flow)
    rng = np.random.default_rng(seeds[-1])
    states = random_sphere_states(rng, cfg.n, cfg.d)
    ens_a = Ensemble.zero_frequency(states, params)
    ens_b = Ensemble.zero_frequency(states.copy(), params)
    _, dists = integrate_pair_distance(ens_a, ens_b, icfg, (2.0,))
    checks.append(
        _check_le(
            "identical_data_stay_identical",
            float(np.max(dists[2.0])),
            0.0,
            1e-9,
            detail="sup_t ||Z - Z~||_2 for Z~0 = Z0",
        )
    )

    # admissible long-run saturation of the p = 2 ratio
    adm_cfg = replace(cfg, heterogeneous=False, omega_scale=0.0)
    ens = _admissible_ensemble(adm_cfg)
    rng = np.random.default_rng(seeds[-1].spawn(1)[0])
    other = jitter_states(rng, ens.states, cfg.jitter)
    ens_b = Ensemble.zero_frequency(other, params)
    long_cfg = _integrator_config(cfg, t_end=cfg.t_long)
    times, dists = integrate_pair_distance(ens, ens_b, long_cfg, (2.0,))
    track = dists[2.0] / dists[2.0][0]
    sup_mid = float(np.max(track[times <= cfg.t_mid + 1e-12]))
    sup_long = float(np.max(track))
    checks.append(
        _check_le(
            "admissible_uniform_in_time",
            sup_long,
            1.05 * sup_mid,
            0.0,
            detail=(
                f"admissible p=2 ratio: sup over t <= {cfg.t_long:g} vs "
                f"1.05 * sup over t <= {cfg.t_mid:g}"
            ),
        )
    )

    return ExperimentReport(
        experiment="e2",
        config=cfg.to_dict(),
        seed=cfg.seed,
        checks=checks,
        data={
            "worst_ratios": {f"T{h:g}_p{p:g}": worst[(h, p)] for (h, p) in worst},
            "admissible_sup_mid": sup_mid,
            "admissible_sup_long": sup_long,
        },
    )


# ---------------------------------------------------------------------------
# E3: mean-field Cauchy property
# ---------------------------------------------------------------------------


def _nested_trajectories(
    cfg: ExperimentConfig, states: NDArray, freqs: NDArray | None, t_end: float
) -> dict[int, Trajectory]:
    params = CouplingParams(cfg.kappa0, cfg.kappa1)
    out: dict[int, Trajectory] = {}
    icfg = _integrator_config(cfg, t_end=t_end)
    for n in sorted(set(cfg.n_grid)):
        if freqs is None:
            ens = Ensemble.zero_frequency(states[:n], params)
        else:
            ens = Ensemble(states[:n], freqs[:n], params)
        traj, _ = integrate(ens, icfg)
        out[n] = traj
    return out


def run_e3(cfg: ExperimentConfig) -> ExperimentReport:
    """Cauchy property of nested empirical measures in W_2.

    Builds nested admissible ensembles (each doubled ensemble keeps the
    smaller one's atoms and adds fresh draws from the same cap), integrates
    them with a common frequency, and checks that
    sup_{t<=T} W_2(mu^N_t, mu^{2N}_t) is nonincreasing across the pairs and
    uniformly controlled by the initial distances with one fitted constant.
    A heterogeneous-frequency variant over a short horizon is evaluated and
    reported without gating.
    """
    threshold = _threshold_or_config_error(cfg)
    rng = np.random.default_rng(cfg.seed)
    n_max = max(cfg.n_grid)
    if any(2 * n not in cfg.n_grid and 2 * n <= n_max for n in cfg.n_grid):
        raise ConfigError("n_grid must consist of consecutive doublings, e.g. 16,32,64,128")
    states = admissible_cap_states(rng, n_max, cfg.d, threshold)

    trajectories = _nested_trajectories(cfg, states, None, cfg.t_end)
    pairs = [(n, 2 * n) for n in cfg.n_grid if 2 * n in cfg.n_grid]

    sups: list[float] = []
    initials: list[float] = []
    tracks: dict[str, NDArray] = {}
    grid = trajectories[pairs[0][0]].times
    for n_small, n_big in pairs:
        small, big = trajectories[n_small], trajectories[n_big]
        vals = np.array(
            [
                wasserstein_uniform_nested(
                    EmpiricalMeasure.uniform(small.snapshots[k]),
                    EmpiricalMeasure.uniform(big.snapshots[k]),
                    2.0,
                )
                for k in range(len(grid))
            ]
        )
        tracks[f"w2_{n_small}_{n_big}"] = vals
        sups.append(float(np.max(vals)))
        initials.append(float(vals[0]))

    sups_arr = np.asarray(sups)
    initials_arr = np.asarray(initials)
    fitted_c = float(np.sum(sups_arr * initials_arr) / np.sum(initials_arr**2))
    checks = [
        _check_le(
            "cauchy_nonincreasing",
            float(np.max(np.diff(sups_arr))) if len(sups_arr) > 1 else 0.0,
            0.0,
            0.0,
            detail="max increase of sup_t W2(mu^N, mu^2N) across consecutive pairs",
        ),
        _check_le(
            "uniform_bound_fitted_constant",
            float(np.max(sups_arr - fitted_c * initials_arr)),
            0.05,
            0.0,
            detail=f"sup_t W2 <= C * W2(0) + 0.05 with single fitted C = {fitted_c:.6g}",
        ),
    ]

    # heterogeneous-frequency variant over a short horizon (report-only)
    rng_h = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(1)[0])
    freqs = np.stack([random_skew_hermitian(rng_h, cfg.d, 0.5) for _ in range(n_max)])
    t_short = 2.0
    het = _nested_trajectories(cfg, states, freqs, t_short)
    bound_const = _stability_constant(cfg.kappa0, cfg.kappa1, t_short)
    het_margin = -np.inf
    for n_small, n_big in pairs:
        small, big = het[n_small], het[n_big]
        vals = [
            wasserstein_uniform_nested(
                EmpiricalMeasure.uniform(small.snapshots[k], frequencies=freqs[:n_small]),
                EmpiricalMeasure.uniform(big.snapshots[k], frequencies=freqs[:n_big]),
                2.0,
            )
            for k in range(len(small.times))
        ]
        het_margin = max(het_margin, float(np.max(vals) - (bound_const * vals[0] + 0.05)))
    checks.append(
        _check_le(
            "heterogeneous_finite_time",
            het_margin,
            0.0,
            0.0,
            gating=False,
            detail=(
                "heterogeneous frequencies, sup_{t<=2} W2 vs G_T W2(0) + 0.05 "
                "(reported, not asserted)"
            ),
        )
    )

    series = ObservableSeries(
        times=grid,
        series=tracks,
        metadata={"kappa0": cfg.kappa0, "kappa1": cfg.kappa1, "seed": cfg.seed},
    )

    return ExperimentReport(
        experiment="e3",
        config=cfg.to_dict(),
        seed=cfg.seed,
        checks=checks,
        data={
            "pairs": [list(p) for p in pairs],
            "sup_w2": sups,
            "initial_w2": initials,
            "fitted_constant": fitted_c,
        },
        series={"wasserstein": series},
    )


def _threshold_or_config_error(cfg: ExperimentConfig) -> float:
    try:
        return admissible_threshold(cfg.kappa0, cfg.kappa1, cfg.delta)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# E4: finite-time stability of measure solutions
# ---------------------------------------------------------------------------


def run_e4(cfg: ExperimentConfig) -> ExperimentReport:
    """W_p stability of empirical-measure solutions under initial perturbation.

    Two atomic measures whose initial states differ by a small jitter are
    integrated with identical frequencies; asserts
    W_p(mu_t, nu_t) <= max(G_T, 1) W_p(mu_0, nu_0) for t <= T over the
    horizons and p values, and in the admissible homogeneous case that the
    p = 2 ratio at t_long exceeds the t_mid ratio by at most 5%.
    """
    ens = _admissible_ensemble(cfg)
    params = ens.params
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(1)[0])
    other = jitter_states(rng, ens.states, cfg.jitter)
    ens_b = Ensemble(other, ens.frequencies, params)

    t_max = max(cfg.horizons)
    icfg = _integrator_config(cfg, t_end=t_max)
    traj_a, _ = integrate(ens, icfg)
    traj_b, _ = integrate(ens_b, icfg)
    times = traj_a.times

    w_tracks = {
        p: np.array(
            [
                wasserstein_uniform(
                    EmpiricalMeasure.uniform(traj_a.snapshots[k]),
                    EmpiricalMeasure.uniform(traj_b.snapshots[k]),
                    p,
                )
                for k in range(len(times))
            ]
        )
        for p in cfg.p_values
    }
    checks = []
    for horizon in cfg.horizons:
        bound_const = max(_stability_constant(cfg.kappa0, cfg.kappa1, horizon), 1.0)
        for p in cfg.p_values:
            track = w_tracks[p]
            sup = float(np.max(track[times <= horizon + 1e-12]))
            if track[0] > 1e-12:
                checks.append(
                    _check_le(
                        f"wp_stability_T{horizon:g}_p{p:g}",
                        sup,
                        bound_const * track[0],
                        0.0,
                        detail=f"sup_t W_p vs max(G_T, 1) W_p(0) with G_T = {bound_const:.6g}",
                    )
                )
            else:
                # degenerate perturbation (nu0 = mu0): the flow is unique, so
                # the measures must simply stay together
                checks.append(
                    _check_le(
                        f"wp_stability_T{horizon:g}_p{p:g}",
                        sup,
                        0.0,
                        1e-9,
                        detail="identical initial measures stay identical (W_p(0) = 0)",
                    )
                )

    long_cfg = _integrator_config(cfg, t_end=cfg.t_long)
    traj_a, _ = integrate(ens, long_cfg)
    traj_b, _ = integrate(ens_b, long_cfg)
    times_l = traj_a.times
    w2 = np.array(
        [
            wasserstein_uniform(
                EmpiricalMeasure.uniform(traj_a.snapshots[k]),
                EmpiricalMeasure.uniform(traj_b.snapshots[k]),
                2.0,
            )
            for k in range(len(times_l))
        ]
    )
    if w2[0] > 1e-12:
        ratio = w2 / w2[0]
        sup_mid = float(np.max(ratio[times_l <= cfg.t_mid + 1e-12]))
        sup_long = float(np.max(ratio))
        checks.append(
            _check_le(
                "admissible_t_independent_constant",
                sup_long,
                1.05 * sup_mid,
                0.0,
                detail=(
                    f"admissible homogeneous case: sup ratio over t <= {cfg.t_long:g} vs "
                    f"1.05 * sup over t <= {cfg.t_mid:g} (p = 2)"
                ),
            )
        )
    else:
        ratio = w2
        sup_mid = sup_long = float(np.max(w2))
        checks.append(
            _check_le(
                "admissible_t_independent_constant",
                sup_long,
                0.0,
                1e-9,
                detail="identical initial measures: sup_t W_2 stays at zero",
            )
        )

    series = ObservableSeries(
        times=times_l,
        series={"w2_ratio": ratio},
        metadata={"jitter": cfg.jitter, "seed": cfg.seed},
    )
    return ExperimentReport(
        experiment="e4",
        config=cfg.to_dict(),
        seed=cfg.seed,
        checks=checks,
        data={"sup_ratio_mid": sup_mid, "sup_ratio_long": sup_long},
        series={"w2_ratio": series},
    )


# ---------------------------------------------------------------------------
# E5: order-parameter calculus
# ---------------------------------------------------------------------------


def run_e5(cfg: ExperimentConfig) -> ExperimentReport:
    """Order-parameter calculus along an admissible aligned-regime run.

    Asserts (a) R^2 nondecreasing per recorded step, (b) the analytic R^2
    rate matches centered finite differences, (c) the aggregation defect
    decays by six orders at t_end, (d) ||dJ/dt|| stays below 2 (kappa0 +
    kappa1) at every sample, and reports the observed bound on the second
    difference of R^2 (its theoretical constant is never pinned down).
    """
    if not cfg.kappa0 > 0 or cfg.kappa0 + 2.0 * cfg.kappa1 < 0:
        raise ConfigError("e5 requires kappa0 > 0 and kappa0 + 2 kappa1 >= 0")
    # the defect-decay claim needs admissible data; monotonicity, the rate
    # identity and the dJ/dt bound hold for any data in the aligned regime
    # (including the boundary kappa1 = -kappa0/2, where no cap is admissible)
    admissible_mode = abs(cfg.kappa1) < cfg.kappa0 / 2.0 and 0.0 < cfg.delta < (
        1.0 - 2.0 * abs(cfg.kappa1) / cfg.kappa0
    )
    if admissible_mode:
        ens = _admissible_ensemble(cfg)
    else:
        rng = np.random.default_rng(cfg.seed)
        states = random_sphere_states(rng, cfg.n, cfg.d)
        ens = Ensemble.zero_frequency(states, CouplingParams(cfg.kappa0, cfg.kappa1))
    params = ens.params
    icfg = _integrator_config(cfg)
    traj, series = integrate(ens, icfg, standard_observers(params, with_dj=True))

    times = series.times
    r2 = series.column("R2")
    defect = series.column("defect")
    dj = series.column("dj_norm")

    checks = [
        _check_ge(
            "r_squared_nondecreasing",
            float(np.min(np.diff(r2))) if len(r2) > 1 else 0.0,
            0.0,
            1e-10,
            detail="min per-step increment of R^2 over recorded times",
        ),
        _check_le(
            "dj_dt_bound",
            float(np.max(dj)),
            2.0 * (cfg.kappa0 + cfg.kappa1),
            1e-8,
            detail="max_t ||dJ/dt|| (particle form) vs 2 (kappa0 + kappa1) + 1e-8",
        ),
        pair_inequality_check(series),
    ]
    if admissible_mode:
        checks.append(
            _check_le(
                "defect_decay",
                defect[-1],
                1e-6 * max(defect[0], 1e-12),
                0.0,
                detail=f"defect({cfg.t_end:g}) vs 1e-6 * max(defect(0), 1e-12)",
            )
        )

    # analytic rate vs centered finite differences at early probes
    n_probes = min(10, len(times))
    rel_errs = []
    for k in range(n_probes):
        snap_ens = ens.replace_states(traj.snapshots[k])
        analytic = r_squared_rate(
            EmpiricalMeasure.uniform(traj.snapshots[k]), cfg.kappa0, cfg.kappa1
        )
        fd = fd_r_squared_rate(snap_ens, h=1e-3)
        rel_errs.append(abs(analytic - fd) / max(abs(analytic), 1e-12))
    checks.append(
        _check_le(
            "rate_matches_finite_difference",
            float(np.max(rel_errs)),
            1e-5,
            0.0,
            detail=f"relative error over the first {n_probes} recorded states",
        )
    )

    if len(times) >= 3:
        step = float(np.mean(np.diff(times)))
        second = np.abs(np.diff(r2, 2)) / step**2
        checks.append(
            _check_le(
                "r_squared_second_derivative_bounded",
                float(np.max(second)),
                math.inf,
                0.0,
                gating=False,
                detail="observed sup |d2 R^2/dt^2|; its theoretical constant is not pinned",
            )
        )

    return ExperimentReport(
        experiment="e5",
        config=cfg.to_dict(),
        seed=cfg.seed,
        checks=checks,
        data={
            "defect_initial": float(defect[0]),
            "defect_final": float(defect[-1]),
            "max_dj_norm": float(np.max(dj)),
            "dj_bound": 2.0 * (cfg.kappa0 + cfg.kappa1),
        },
        series={"observables": series},
    )


# ---------------------------------------------------------------------------
# E6: complete aggregation and the bi-polar exceptional set
# ---------------------------------------------------------------------------


def _mirror_cluster_states(
    rng: np.random.Generator, n: int, d: int, spread: float
) -> NDArray:
    """Real configuration: a mirror-symmetric cluster near +y and one atom at -y.

    Pairs normalize(y + spread u) / normalize(y - spread u) with u orthogonal
    to y keep the centroid exactly on the y axis for all time, so the
    antipodal atom sits on the exceptional stable manifold: it is a genuine
    equilibrium of the induced flow up to rounding.
    """
    if n < 3:
        raise ConfigError("scenario b needs at least 3 particles")
    y = rng.standard_normal(d)
    y /= np.linalg.norm(y)
    cluster = n - 1
    states = [(-y).copy()]
    if cluster % 2 == 1:
        states.append(y.copy())
    for _ in range(cluster // 2):
        u = rng.standard_normal(d)
        u -= (u @ y) * y
        u /= np.linalg.norm(u)
        plus = y + spread * u
        minus = y - spread * u
        states.append(plus / np.linalg.norm(plus))
        states.append(minus / np.linalg.norm(minus))
    out = np.asarray(states, dtype=np.complex128)
    return out


def run_e6(cfg: ExperimentConfig) -> ExperimentReport:
    """Complete aggregation vs the antipodal exceptional atom.

    Scenario (a): admissible data fully aggregate onto the direction of J
    (no mass ends up at -J).  Scenario (b): real data with one atom placed
    exactly antipodal to a mirror-symmetric cluster converge to the two-point
    configuration (1 - 1/N) delta_y + (1/N) delta_-y, the antipodal atom never
    leaving its exceptional position.
    """
    params = CouplingParams(cfg.kappa0, cfg.kappa1)
    checks: list[CheckResult] = []

    # scenario (a): admissible data -> Dirac limit along J
    ens = _admissible_ensemble(cfg)
    icfg = _integrator_config(cfg)
    traj, series = integrate(ens, icfg, standard_observers(params, with_dj=False))
    final = traj.snapshots[-1]
    j_final = j_vector(EmpiricalMeasure.uniform(final))
    j_hat = j_final / np.linalg.norm(j_final)
    alignment = float(np.min((np.conj(final) @ j_hat).real))
    checks.append(
        _check_ge(
            "a_alignment",
            alignment,
            1.0,
            1e-4,
            detail="min_j z_j . (J/||J||) at t_end (complete aggregation, no antipodal mass)",
        )
    )
    dirac = EmpiricalMeasure.uniform(j_hat[None, :])
    w2_final, _ = wasserstein_general(EmpiricalMeasure.uniform(final), dirac, 2.0)
    checks.append(
        _check_le(
            "a_dirac_convergence",
            w2_final,
            1e-3,
            0.0,
            detail="W2(mu_t_end, delta_{J/||J||})",
        )
    )
    checks.append(pair_inequality_check(series))

    # scenario (b): real flow with an exactly antipodal exceptional atom
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(2)[1])
    t_end_b = min(cfg.t_end, 20.0)
    states_b = _mirror_cluster_states(rng, cfg.n, cfg.d, cfg.cluster_spread)
    ens_b = Ensemble.zero_frequency(states_b, CouplingParams(cfg.kappa0, 0.0))
    icfg_b = _integrator_config(cfg, t_end=t_end_b)
    traj_b, _ = integrate(ens_b, icfg_b)

    antipodal_gap = 0.0
    for snap in traj_b.snapshots:
        j_hat_t = snap[1:].mean(axis=0)
        j_hat_t = j_hat_t / np.linalg.norm(j_hat_t)
        antipodal_gap = max(
            antipodal_gap, 1.0 + float((np.conj(snap[0]) @ j_hat_t).real)
        )
    final_b = traj_b.snapshots[-1]
    y_hat = final_b[1:].mean(axis=0)
    y_hat /= np.linalg.norm(y_hat)
    two_point = float(
        np.max(
            np.minimum(
                np.linalg.norm(final_b - y_hat[None, :], axis=1),
                np.linalg.norm(final_b + y_hat[None, :], axis=1),
            )
        )
    )
    checks.extend(
        [
            _check_le(
                "b_antipodal_persistence",
                antipodal_gap,
                0.0,
                1e-8,
                detail="max_t (1 + x_antipodal . y_hat(t)): the exceptional atom stays put",
            ),
            _check_le(
                "b_two_point_limit",
                two_point,
                1e-4,
                0.0,
                detail="max_j distance of final states to the {y, -y} pair",
            ),
            _check_le(
                "b_cluster_aggregation",
                functional_F(final_b[1:]),
                1e-6,
                0.0,
                detail="worst-pair defect of the cluster at t_end",
            ),
            _check_le(
                "b_real_invariance",
                float(np.max(np.abs(traj_b.snapshots.imag))),
                0.0,
                1e-12,
                detail="real initial data keep zero imaginary parts along the run",
            ),
        ]
    )

    return ExperimentReport(
        experiment="e6",
        config=cfg.to_dict(),
        seed=cfg.seed,
        checks=checks,
        data={
            "a_alignment": alignment,
            "a_w2_final": w2_final,
            "b_antipodal_mass": 1.0 / cfg.n,
            "b_two_point_gap": two_point,
        },
        series={"observables": series},
    )


# ---------------------------------------------------------------------------
# E7: solution splitting
# ---------------------------------------------------------------------------


def run_e7(cfg: ExperimentConfig) -> ExperimentReport:
    """Solution splitting: the rotating frame of a homogeneous run solves the
    zero-frequency system.

    Runs the same initial data with common frequency Omega and with Omega = 0,
    then asserts max_j ||z_j(t) - exp(Omega t) w_j(t)|| <= 1e-6 on t <= t_end
    and that the scalar observables F, G, R agree between the runs to 1e-8.
    """
    params = CouplingParams(cfg.kappa0, cfg.kappa1)
    rng = np.random.default_rng(cfg.seed)
    states = random_sphere_states(rng, cfg.n, cfg.d)
    scale = cfg.omega_scale if cfg.omega_scale > 0 else 1.0
    omega = random_skew_hermitian(rng, cfg.d, scale)

    icfg = _integrator_config(cfg)
    ens_full = Ensemble.with_common_frequency(states, omega, params)
    ens_zero = Ensemble.zero_frequency(states.copy(), params)
    traj_full, series_full = integrate(ens_full, icfg, standard_observers(params, False))
    traj_zero, series_zero = integrate(ens_zero, icfg, standard_observers(params, False))

    propagator = matrix_exp_family(omega)
    deviation = 0.0
    for k, t in enumerate(traj_full.times):
        rotated = traj_zero.snapshots[k] @ propagator(float(t)).T
        deviation = max(
            deviation, float(np.max(np.linalg.norm(traj_full.snapshots[k] - rotated, axis=1)))
        )

    obs_gap = max(
        float(np.max(np.abs(series_full.column(name) - series_zero.column(name))))
        for name in ("F", "G", "R")
    )
    checks = [
        _check_le(
            "splitting_max_deviation",
            deviation,
            1e-6,
            0.0,
            detail="max_{t, j} ||z_j(t) - exp(Omega t) w_j(t)||",
        ),
        _check_le(
            "observable_agreement",
            obs_gap,
            1e-8,
            0.0,
            detail="max_t |F/G/R of the rotating run minus the zero-frequency run|",
        ),
        pair_inequality_check(series_full),
    ]
    return ExperimentReport(
        experiment="e7",
        config=cfg.to_dict(),
        seed=cfg.seed,
        checks=checks,
        data={"max_deviation": deviation, "max_observable_gap": obs_gap},
        series={"observables": series_full},
    )


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

DEFAULTS: dict[str, dict] = {
    "e1": {"n": 64, "d": 4, "kappa0": 1.0, "kappa1": -0.2, "delta": 0.05, "t_end": 20.0},
    "e2": {
        "n": 16,
        "d": 4,
        "kappa0": 1.0,
        "kappa1": 0.2,
        "delta": 0.5,
        "t_end": 2.0,
        "omega_scale": 0.5,
        "heterogeneous": True,
        "jitter": 1e-2,
    },
    "e3": {
        "n": 128,
        "d": 4,
        "kappa0": 1.0,
        "kappa1": 0.1,
        "delta": 0.3,
        "t_end": 50.0,
        "n_grid": (16, 32, 64, 128),
    },
    "e4": {
        "n": 16,
        "d": 4,
        "kappa0": 1.0,
        "kappa1": 0.1,
        "delta": 0.3,
        "t_end": 2.0,
        "jitter": 1e-3,
    },
    "e5": {"n": 32, "d": 4, "kappa0": 1.0, "kappa1": 0.1, "delta": 0.3, "t_end": 50.0},
    "e6": {
        "n": 16,
        "d": 4,
        "kappa0": 1.0,
        "kappa1": 0.1,
        "delta": 0.3,
        "t_end": 50.0,
        "cluster_spread": 0.2,
    },
    "e7": {
        "n": 32,
        "d": 4,
        "kappa0": 1.0,
        "kappa1": 0.2,
        "delta": 0.1,
        "t_end": 10.0,
        "omega_scale": 1.0,
    },
}

EXPERIMENT_IDS = frozenset(DEFAULTS)

_RUNNERS = {
    "e1": run_e1,
    "e2": run_e2,
    "e3": run_e3,
    "e4": run_e4,
    "e5": run_e5,
    "e6": run_e6,
    "e7": run_e7,
}


def run_experiment(cfg: ExperimentConfig | dict) -> ExperimentReport:
    """Dispatch an experiment by id, timing the run."""
    if isinstance(cfg, dict):
        cfg = ExperimentConfig.from_dict(cfg)
    runner = _RUNNERS[cfg.experiment]
    start = time.perf_counter()
    report = runner(cfg)
    report.wall_clock = time.perf_counter() - start
    return report
