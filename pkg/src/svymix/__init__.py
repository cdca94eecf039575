"""Bayesian density and probability-mass estimation from stratified survey
samples: weight-adjusted mixture models, a weighted-KDE baseline, regression
competitors, and a reproducible benchmarking harness."""

from .adjust import (
    AdjustedState,
    AdjustmentPrior,
    GridSummary,
    adjusted_density_at,
    adjusted_weights_step,
    coverage_metric,
    default_adjustment_prior,
    summarize_posterior,
    weighted_kde,
)
from .config import FitConfig, Schedule
from .counts import (
    INTEGER_CUTPOINTS,
    LOG_CUTPOINTS,
    CutpointScheme,
    count_interval,
    log_transform_competitor,
    pmf_from_state,
)
from .dpmm import DpmmPriors, MixtureState, density_at, gibbs_sweep, init_state
from .harness import (
    METHODS,
    RunReport,
    Scenario,
    autocorrelation_diagnostic,
    builtin_scenario,
    ise_metric,
    run_scenario,
)
from .samplers import RngStream
from .survey import (
    NormalMixture,
    PoissonMixture,
    Population,
    PopulationSpec,
    StratumSpec,
    SurveySample,
    draw_stratified_sample,
    effective_c,
    generate_population,
    load_sample,
    normalize_weights,
    save_sample,
)

__version__ = "0.1.0"

__all__ = [
    "AdjustedState",
    "AdjustmentPrior",
    "CutpointScheme",
    "DpmmPriors",
    "FitConfig",
    "GridSummary",
    "INTEGER_CUTPOINTS",
    "LOG_CUTPOINTS",
    "METHODS",
    "MixtureState",
    "NormalMixture",
    "PoissonMixture",
    "Population",
    "PopulationSpec",
    "RngStream",
    "RunReport",
    "Scenario",
    "Schedule",
    "StratumSpec",
    "SurveySample",
    "adjusted_density_at",
    "adjusted_weights_step",
    "autocorrelation_diagnostic",
    "builtin_scenario",
    "count_interval",
    "coverage_metric",
    "default_adjustment_prior",
    "density_at",
    "draw_stratified_sample",
    "effective_c",
    "generate_population",
    "gibbs_sweep",
    "init_state",
    "ise_metric",
    "load_sample",
    "log_transform_competitor",
    "normalize_weights",
    "pmf_from_state",
    "run_scenario",
    "save_sample",
    "summarize_posterior",
    "weighted_kde",
]
