"""Coin-tossing Markov chain approximations of one-dimensional diffusions.

A diffusion on an interval is specified by its speed measure — a density,
point masses, and optionally a singular-continuous part.  The package
computes the state-dependent step size that matches a time budget h per
coin toss, simulates the resulting chains (including reflecting models via
unfolding), estimates terminal laws and convergence rates by Monte Carlo,
and writes reproducible report tables with rendered figures.
"""

from .errors import NumericError
from .measures import (
    Boundary,
    ConstantDensity,
    Density,
    FunctionDensity,
    InverseSquareDensity,
    MirroredDensity,
    PiecewiseConstantDensity,
    SpeedMeasure,
    StateSpace,
    TiledDensity,
    TiledSpeedMeasure,
    as_density,
    condition_a_diagnostic,
    exit_time_functional,
    green_exit_expectation,
    measure_from_config,
    measure_of_open_interval,
    q_function,
    space_from_config,
)
from .quadrature import adaptive_simpson
from .scale import (
    CantorLevel,
    Emcel,
    GbmClosedForm,
    ScaleFactor,
    StickyClosedForm,
    WeakEuler,
    build_scale_factor,
    closed_form_gbm,
    closed_form_sticky,
    solve_cantor,
    solve_emcel,
)
from .chains import (
    ChainPath,
    FoldingMap,
    extend_measure,
    fold_path,
    interpolate,
    sign_stream,
    simulate_path,
)
from .models import (
    ModelSpec,
    cantor_cdf,
    cantor_cdf_bound_check,
    cantor_cdf_deviation,
    cantor_level_cdf,
    cantor_set_intervals,
    default_cantor_level,
    folded_normal_mean,
    gbm_cdf,
    make_model,
    model_names,
    normal_cdf,
    reflected_sticky_cdf,
    reflected_sticky_mean,
    sticky_cdf,
)
from .montecarlo import (
    McSummary,
    RateFit,
    empirical_cdf,
    estimate_functional,
    prepare_chain,
    rate_fit,
    resolve_steps,
    simulate_terminal,
)
from .reports import config_hash, read_table, validate_table, write_table

__version__ = "0.1.0"

__all__ = [
    "Boundary",
    "CantorLevel",
    "ChainPath",
    "ConstantDensity",
    "Density",
    "Emcel",
    "FoldingMap",
    "FunctionDensity",
    "GbmClosedForm",
    "InverseSquareDensity",
    "McSummary",
    "MirroredDensity",
    "ModelSpec",
    "NumericError",
    "PiecewiseConstantDensity",
    "RateFit",
    "ScaleFactor",
    "SpeedMeasure",
    "StateSpace",
    "StickyClosedForm",
    "TiledDensity",
    "TiledSpeedMeasure",
    "WeakEuler",
    "adaptive_simpson",
    "as_density",
    "build_scale_factor",
    "cantor_cdf",
    "cantor_cdf_bound_check",
    "cantor_cdf_deviation",
    "cantor_level_cdf",
    "cantor_set_intervals",
    "closed_form_gbm",
    "closed_form_sticky",
    "condition_a_diagnostic",
    "config_hash",
    "default_cantor_level",
    "empirical_cdf",
    "estimate_functional",
    "exit_time_functional",
    "extend_measure",
    "fold_path",
    "folded_normal_mean",
    "gbm_cdf",
    "green_exit_expectation",
    "interpolate",
    "make_model",
    "measure_from_config",
    "measure_of_open_interval",
    "model_names",
    "normal_cdf",
    "prepare_chain",
    "q_function",
    "rate_fit",
    "read_table",
    "reflected_sticky_cdf",
    "reflected_sticky_mean",
    "resolve_steps",
    "sign_stream",
    "simulate_path",
    "simulate_terminal",
    "solve_cantor",
    "solve_emcel",
    "space_from_config",
    "sticky_cdf",
    "validate_table",
    "write_table",
    "__version__",
]
