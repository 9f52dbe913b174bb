"""Random-feature ReLU networks for KL divergence and mutual information estimation."""

__version__ = "0.1.0"

from .approx_verify import (
    ApproximationTrial,
    CertifiedError,
    RepresentationDensity,
    approximation_trial,
    build_representation,
    certified_linf_error,
    coefficient_bound,
    gaussian_pair_spectrum,
    gaussian_spectrum,
    measure_linf_error,
    prop1_bound,
    sample_coefficients,
)
from .baseline import KnnConfig, knn_kl
from .constants import (
    BoundReport,
    OptimizerConstants,
    ProblemConstants,
    c_theta,
    constants_grid,
    half_integral_constant,
    kappa,
    schedule,
    sphere_area,
    spectral_mass_factor,
    theorem_bound,
)
from .distributions import (
    CorrelatedGaussianBox,
    DistributionPair,
    TruncatedGaussianBox,
    UniformBox,
    exact_kl,
    kl_monte_carlo,
    mutual_information_truth,
)
from .errors import (
    ConfigError,
    DimensionMismatch,
    DomainViolation,
    EmptySampleSet,
    ExponentOverflow,
    InsufficientSamples,
    InvalidArgument,
    NumericalFailure,
    QuadratureFailure,
    RfdivError,
)
from .estimator import DvEstimate, dv_estimate, mi_estimate, negative_objective
from .features import FeatureMap, phi, psi, sample_feature_map
from .optimizer import RunTrace, TrainConfig, run

__all__ = [
    "__version__",
    "ApproximationTrial",
    "CertifiedError",
    "RepresentationDensity",
    "approximation_trial",
    "build_representation",
    "certified_linf_error",
    "coefficient_bound",
    "gaussian_pair_spectrum",
    "gaussian_spectrum",
    "measure_linf_error",
    "prop1_bound",
    "sample_coefficients",
    "KnnConfig",
    "knn_kl",
    "BoundReport",
    "OptimizerConstants",
    "ProblemConstants",
    "c_theta",
    "constants_grid",
    "half_integral_constant",
    "kappa",
    "schedule",
    "sphere_area",
    "spectral_mass_factor",
    "theorem_bound",
    "CorrelatedGaussianBox",
    "DistributionPair",
    "TruncatedGaussianBox",
    "UniformBox",
    "exact_kl",
    "kl_monte_carlo",
    "mutual_information_truth",
    "ConfigError",
    "DimensionMismatch",
    "DomainViolation",
    "EmptySampleSet",
    "ExponentOverflow",
    "InsufficientSamples",
    "InvalidArgument",
    "NumericalFailure",
    "QuadratureFailure",
    "RfdivError",
    "DvEstimate",
    "dv_estimate",
    "mi_estimate",
    "negative_objective",
    "FeatureMap",
    "phi",
    "psi",
    "sample_feature_map",
    "RunTrace",
    "TrainConfig",
    "run",
]
