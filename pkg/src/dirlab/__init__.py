"""Numerical laboratory for Dirichlet series in the critical strip."""

from .acceptance import CriterionResult, run_all
from .abscissa import (
    AbscissaEstimate,
    OrderFunctionEstimate,
    OrderFunctionPoint,
    ProfileCache,
    convexity_bound,
    estimate_mu,
    estimate_sigma_k,
    estimate_sigma_k_alpha,
    order_function_profile,
)
from .diagnostics import (
    RatioBracket,
    SequenceReport,
    TheoremChain,
    TheoremPipelineReport,
    UpperBoundReport,
    check_concavity_in_k,
    check_convexity_in_alpha,
    functional_equation_gap,
    lindelof_form,
    predict_linear_mu,
    theorem_pipeline,
    upper_bound_check,
)
from .errors import (
    AccuracyError,
    BracketNotFoundError,
    CoefficientOverflowError,
    ConfigurationError,
    DataError,
    DegenerateDataError,
    DirlabError,
    DomainError,
    InsufficientCoverageError,
    QuadratureError,
    UnsupportedSeriesError,
)
from .cache import ScanCache, canonical_key
from .fits import GrowthFit, envelope_growth_fit, growth_exponent
from .moments import (
    LargeValueMeasure,
    MomentSample,
    MomentScan,
    TailExtrapolation,
    large_value_measure,
    mean_square_moment,
    mean_value_target,
    parseval_gap,
    tail_extrapolate,
    weight_integral,
    weighted_moment,
)
from .riesz import (
    RieszMeanSample,
    SummabilityAbscissaEstimate,
    g_growth_exponent,
    kernel_samples,
    mellin_pair_gap,
    riesz_kernel,
    riesz_sum,
)
from .series import (
    SeriesSpec,
    character_series,
    character_values,
    coefficients,
    custom_series,
    eta_series,
    evaluate,
    evaluate_batch,
    evaluate_power,
    polynomial_series,
)

__version__ = "0.1.0"
