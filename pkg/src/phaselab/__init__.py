"""phaselab: phaseless and rank-one measurement operators, constrained lq
recovery, and Monte Carlo certificates for their stability behavior."""

from .adversarial import (
    AdversarialInstance,
    gamma_moment,
    make_matrix_noise,
    make_phase_noise,
    sharpness_experiment,
)
from .certificates import (
    CertificateEstimate,
    ChaosBounds,
    chaos_S,
    compare_chaos_bounds,
    corollary_checks,
    embed_bounds,
    injectivity_constant_lower,
    measurement_ratio,
    rademacher_R,
    small_ball_Q,
    stability_constant_lower,
)
from .ensembles import (
    COMPLEX,
    DiscreteSymmetric,
    EnsembleSpec,
    GAUSSIAN,
    MeasurementMatrix,
    MomentReport,
    REAL,
    UNIFORM_SYMMETRIC,
    amplitude_op,
    estimate_moments,
    intensity_op,
    lifting_op,
    load_measurements,
    rank_one_op,
    sample_ensemble,
    sample_vectors,
    save_measurements,
)
from .estimators import MatrixRecovery, PhaseRetrieval
from .exceptions import (
    ConfigError,
    DegenerateSample,
    DegenerateSet,
    DimensionMismatch,
    EigenFailure,
    EquivalentTargets,
    InvalidDistribution,
    InvalidExponent,
    NonFinite,
    NotSymmetric,
    PhaseLabError,
    ZeroPerturbation,
)
from .geometry import (
    FiniteSet,
    FullSet,
    FullSymmetricSet,
    LowRankSet,
    MatrixBudget,
    PhaseDistancePair,
    SparseLowRankSet,
    SparseSet,
    descriptor_from_dict,
    descriptor_from_json,
    descriptor_to_dict,
    descriptor_to_json,
    dist_d1,
    dist_d2,
    gamma2_budget,
    matrix_budget,
    phase_distances,
    project,
    project_matrix,
    sample_cone_sphere,
    sample_difference_sphere,
)
from .solvers import (
    SolverConfig,
    SolverReport,
    matrix_spectral_init,
    solve_finite_oracle,
    solve_matrix,
    solve_phase,
    spectral_init,
)
from .version import __version__

__all__ = [
    "AdversarialInstance",
    "CertificateEstimate",
    "ChaosBounds",
    "ConfigError",
    "COMPLEX",
    "DegenerateSample",
    "DegenerateSet",
    "DimensionMismatch",
    "DiscreteSymmetric",
    "EigenFailure",
    "EnsembleSpec",
    "EquivalentTargets",
    "FiniteSet",
    "FullSet",
    "FullSymmetricSet",
    "GAUSSIAN",
    "InvalidDistribution",
    "InvalidExponent",
    "LowRankSet",
    "MatrixBudget",
    "MatrixRecovery",
    "MeasurementMatrix",
    "MomentReport",
    "NonFinite",
    "NotSymmetric",
    "PhaseDistancePair",
    "PhaseLabError",
    "PhaseRetrieval",
    "REAL",
    "SolverConfig",
    "SolverReport",
    "SparseLowRankSet",
    "SparseSet",
    "UNIFORM_SYMMETRIC",
    "ZeroPerturbation",
    "amplitude_op",
    "chaos_S",
    "compare_chaos_bounds",
    "corollary_checks",
    "descriptor_from_dict",
    "descriptor_from_json",
    "descriptor_to_dict",
    "descriptor_to_json",
    "dist_d1",
    "dist_d2",
    "embed_bounds",
    "estimate_moments",
    "gamma2_budget",
    "gamma_moment",
    "injectivity_constant_lower",
    "intensity_op",
    "lifting_op",
    "load_measurements",
    "make_matrix_noise",
    "make_phase_noise",
    "matrix_budget",
    "matrix_spectral_init",
    "measurement_ratio",
    "phase_distances",
    "project",
    "project_matrix",
    "rademacher_R",
    "rank_one_op",
    "sample_cone_sphere",
    "sample_difference_sphere",
    "sample_ensemble",
    "sample_vectors",
    "save_measurements",
    "sharpness_experiment",
    "small_ball_Q",
    "solve_finite_oracle",
    "solve_matrix",
    "solve_phase",
    "spectral_init",
    "stability_constant_lower",
]
