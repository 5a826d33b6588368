"""Exact-arithmetic toolkit for universal sequence prediction: process
measures, cumulative KL divergence, normalized maximum likelihood, channel
capacity, greedy likelihood-ratio covers, and reproducible experiment
scenarios."""

from .measures import (
    GEOMETRIC,
    LOG_ZERO,
    QUADRATIC,
    Bernoulli,
    BudgetError,
    ConditioningError,
    Deterministic,
    ExplicitHorizonMeasure,
    IndependentBinary,
    LaplaceMeasure,
    Markov,
    Mixture,
    ProcessMeasure,
    UniformIID,
    WeightScheme,
    ZeroRunMixture,
    check_consistency,
    explicit_weights,
    mix,
)
from .divergence import (
    DivergenceReport,
    EntropyProfile,
    binary_h,
    dn_block,
    dn_monte_carlo,
    dn_stepwise,
    entropy_profile,
    partial_kl_lower_bound,
    tv_horizon,
)
from .nml import (
    FiniteClass,
    FullBernoulliClass,
    FullMarkovClass,
    NmlTable,
    ParametricClass,
    bernoulli_grid,
    build_nml_predictor,
    build_nml_table,
    negative_divergence_demo,
    normalizer_series,
    redundancy_bound,
)
from .capacity import (
    CapacityResult,
    MinimaxResult,
    blahut_arimoto,
    build_rho_capacity,
    capacity_growth_series,
    minimax_oracle,
    truncate_class,
)
from .cover import (
    CoverState,
    assemble_predictor,
    check_extension_bound,
    cover_distribution,
    dominant_set,
    greedy_cover,
)
from .classfiles import read_class_file, write_class_file
from .scenarios import SCENARIOS, ScenarioResult, write_csv

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
