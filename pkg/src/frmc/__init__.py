"""Forward-reverse Monte Carlo for conditional diffusion functionals.

Estimates E[g(path) | X(T) = y] (or X(T) in a set) for multidimensional
SDEs by pairing unconditional forward trajectories with an auxiliary
reverse process through a kernel at a matching time, self-normalizing the
ratio. No bridge dynamics are simulated and no transition densities are
required.
"""

from .errors import (
    ConfigurationError,
    DegenerateDenominatorError,
    FrmcError,
    NumericError,
    UsageError,
    ValidationError,
)
from .estimator import (
    EstimateResult,
    EstimatorConfig,
    PathFunctional,
    StudyResult,
    StudyRow,
    build_pair_index,
    constant_one,
    convergence_study,
    estimate_density,
    estimate_point,
    estimate_set,
    fit_loglog_slope,
    pair_weight,
)
from .grids import TimeGrid, make_grid, reverse_times, uniform_grid
from .kernels import (
    EPANECHNIKOV,
    GAUSSIAN,
    KernelSpec,
    bandwidth,
    kernel_value,
    truncated,
    truncation_radius,
)
from .matcher import SpatialIndex, build_index, query_ball
from .models import (
    DerivativeBundle,
    ModelSpec,
    ReverseSpec,
    brownian,
    fd_derivatives,
    heston,
    ornstein_uhlenbeck,
    reverse_coefficients,
)
from .paths import (
    ForwardBatch,
    HyperplaneSampler,
    ReverseBatch,
    dump_csv,
    simulate_forward,
    simulate_reverse,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "DegenerateDenominatorError",
    "FrmcError",
    "NumericError",
    "UsageError",
    "ValidationError",
    "EstimateResult",
    "EstimatorConfig",
    "PathFunctional",
    "StudyResult",
    "StudyRow",
    "build_pair_index",
    "constant_one",
    "convergence_study",
    "estimate_density",
    "estimate_point",
    "estimate_set",
    "fit_loglog_slope",
    "pair_weight",
    "TimeGrid",
    "make_grid",
    "reverse_times",
    "uniform_grid",
    "EPANECHNIKOV",
    "GAUSSIAN",
    "KernelSpec",
    "bandwidth",
    "kernel_value",
    "truncated",
    "truncation_radius",
    "SpatialIndex",
    "build_index",
    "query_ball",
    "DerivativeBundle",
    "ModelSpec",
    "ReverseSpec",
    "brownian",
    "fd_derivatives",
    "heston",
    "ornstein_uhlenbeck",
    "reverse_coefficients",
    "ForwardBatch",
    "HyperplaneSampler",
    "ReverseBatch",
    "dump_csv",
    "simulate_forward",
    "simulate_reverse",
]
