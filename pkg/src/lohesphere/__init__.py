"""Aggregation dynamics of unit vectors in C^d and their mean-field diagnostics.

A numpy/scipy laboratory for the centroid-coupled aggregation model on the
complex unit sphere: structure-preserving integration, order-parameter and
correlation diagnostics, exact Wasserstein distances between empirical
measures, and seven verification experiments with quantitative pass/fail
bounds.
"""

__version__ = "0.1.0"

from .dynamics import (
    CouplingParams,
    Ensemble,
    TensorEnsemble,
    lhs_rhs,
    lhs_rhs_pairwise,
    ls_rhs,
    lt_rhs,
    mean_field_velocity,
)
from .geometry import (
    embed,
    hermitian_inner,
    matrix_exp,
    matrix_exp_family,
    project_phase,
    project_tangent,
    q_map,
    real_dot,
    unembed,
)
from .integrators import (
    IntegratorConfig,
    IntegrationError,
    Trajectory,
    integrate,
    split_transform,
    step_rk4,
)
from .observables import (
    CorrelationData,
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
from .sampling import AdmissibilityCheck, sample_admissible
from .transport import (
    EmpiricalMeasure,
    SupportSizeError,
    TransportPlan,
    wasserstein_bruteforce,
    wasserstein_general,
    wasserstein_uniform,
    wasserstein_uniform_nested,
    xi_distance,
)
from .experiments import (
    ConfigError,
    ExperimentConfig,
    ExperimentReport,
    run_experiment,
)

__all__ = [
    "__version__",
    "CouplingParams",
    "Ensemble",
    "TensorEnsemble",
    "lhs_rhs",
    "lhs_rhs_pairwise",
    "ls_rhs",
    "lt_rhs",
    "mean_field_velocity",
    "embed",
    "hermitian_inner",
    "matrix_exp",
    "matrix_exp_family",
    "project_phase",
    "project_tangent",
    "q_map",
    "real_dot",
    "unembed",
    "IntegratorConfig",
    "IntegrationError",
    "Trajectory",
    "integrate",
    "split_transform",
    "step_rk4",
    "CorrelationData",
    "ObservableSeries",
    "aggregation_defect",
    "centroid",
    "centroid_rate",
    "correlations",
    "dj_dt_norm_bound_check",
    "functional_F",
    "functional_G",
    "j_vector",
    "lp_distance",
    "order_parameter",
    "r_squared_rate",
    "AdmissibilityCheck",
    "sample_admissible",
    "EmpiricalMeasure",
    "SupportSizeError",
    "TransportPlan",
    "wasserstein_bruteforce",
    "wasserstein_general",
    "wasserstein_uniform",
    "wasserstein_uniform_nested",
    "xi_distance",
    "ConfigError",
    "ExperimentConfig",
    "ExperimentReport",
    "run_experiment",
]
