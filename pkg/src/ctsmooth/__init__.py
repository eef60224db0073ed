"""Dirichlet-smoothed estimation of association and symmetry measures for two-way tables."""

from ._backend import name as backend
from .calculus import (
    DerivativeBundle,
    MseCoefficients,
    derivatives,
    finite_difference_derivatives,
    mse_coefficients,
    optimal_alpha,
)
from .errors import (
    AllDiagonalError,
    AllZeroTableError,
    BoundaryPointError,
    CtSmoothError,
    DegenerateMarginalsError,
    DivergenceUndefinedError,
    MeasureDomainError,
    NegativeAlphaError,
    NonPositiveParameterError,
    NotSquareError,
    RaggedRowsError,
    SumOutOfToleranceError,
    TableError,
)
from .estimators import AlphaRule, EstimateResult, estimate, fienberg_holland_alpha
from .measures import MeasureKind, MeasureSpec, cramer_v, measure_value, power_divergence, symmetry_phi
from .montecarlo import (
    ExperimentConfig,
    ExperimentResult,
    run_experiment,
    sample_multinomial,
    validate_expansion,
)
from .posterior import CredibleInterval, credible_interval, sample_dirichlet
from .tables import (
    CountTable,
    Dims,
    ProbTable,
    parse_count_table,
    parse_prob_table,
    posterior_mean,
    sample_proportions,
)

__version__ = "0.1.0"
