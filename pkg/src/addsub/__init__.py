"""Additive-subordinated multiparameter Markov processes.

Factor-based multiparameter Ornstein-Uhlenbeck processes (and multiparameter
Brownian motion) time-changed component-by-component by tempered-stable Sato
subordinators.  The library constructs and simulates the processes and
evaluates their analytic objects -- characteristic functions, symbols,
generators, Levy triplets -- with every analytic route cross-validated
against Monte Carlo and brute-force numerical oracles.
"""

from .numerics import (  # noqa: F401
    DEFAULT_QUAD,
    DerivativeResult,
    IntegralResult,
    MCEstimate,
    NumericsError,
    QuadratureSpec,
    QuantileTable,
    RngStream,
    finite_diff_derivative,
    integrate,
    inverse_cdf_sample,
    invert_cf_to_cdf,
    mc_mean,
)
from .subordinator import (  # noqa: F401
    IncrementLaw,
    SatoSubordinatorSpec,
    TemperedStableSpec,
    etas_log_cf,
    increment_law,
    levy_density_t,
    marginal_levy_density,
    sample_increment,
    sato_marginal_cf,
    self_similarity_check,
)
from .ou_base import (  # noqa: F401
    BMBlock,
    FactorMOUSpec,
    LatentState,
    MatrixOUSpec,
    MultiparamBMSpec,
    OUSpec,
    matrix_ou_transition_moments,
    mbm_char_exponent,
    mou_char_exponent,
    ou_char_exponent,
    ou_sample_step,
    ou_transition_moments,
    scaled_marginal_params,
)
from .subordinated import (  # noqa: F401
    LevyTriplet,
    PathBundle,
    PathEnsemble,
    SubordinatedSpec,
    SymbolEval,
    bv_classify,
    cf_increment,
    generator_apply,
    sample_paths,
    symbol,
    term_structure,
    triplet,
)
from .config import (  # noqa: F401
    RunConfig,
    config_hash,
    parse_config,
    parse_config_text,
    serialize_config,
)

__version__ = "0.1.0"
