"""PAC-Bayesian risk bounds over finite classifier sets.

Evaluate and optimize PAC-Bayes bounds for five distance functions (linear,
quadratic, Pinsker-type, a sixth-order polynomial refinement, and the binary
kl), with exact log-space threshold constants, a fixed-point posterior
optimizer, a prefix search over risk-sorted subsets, and a synthetic profile
generator.  Hot kernels run under numba when available; set
PACBAYES_BACKEND=numpy to force the pure-numpy fallback.
"""

from .core import (
    BoundSpec,
    BoundValue,
    ClassifierEntry,
    ConstantPolicy,
    DiscreteDistribution,
    DistanceKind,
    FixedPointConfig,
    InitScheme,
    PacBayesError,
    PosteriorResult,
    RiskProfile,
    make_distribution,
    validate_profile,
)
from .special_fns import IkResult, ik_constant, log_binom, log_ik_at, log_sum_exp
from .distance import binary_kl, phi_eval
from .klinverse import (
    BoundSaturationWarning,
    KlRootRequest,
    kl_lower_root,
    kl_lower_root_batch,
    kl_upper_root,
    kl_upper_root_batch,
    kl_upper_root_complement,
    kl_upper_root_status,
)
from .bounds import (
    bound_raw_batch,
    evaluate_bound,
    kl_divergence,
    log_threshold,
    rch,
    rch_prime,
)
from .optimize import (
    complexity_free_objective,
    fp_solve,
    fp_step,
    grid_oracle,
    optimal_posterior_linear,
    prefix_search,
    stationarity_residual,
)
from .harness import (
    REPORT_KIND_ORDER,
    RNG_ALGORITHM,
    ComparisonReport,
    GeneratorSpec,
    ProfileShape,
    ReportRow,
    compare_all,
    generate_profile,
    gibbs_test_error,
    hhi,
    latent_risk_curve,
)
from . import backend

__version__ = "0.1.0"

__all__ = [
    "REPORT_KIND_ORDER",
    "RNG_ALGORITHM",
    "BoundSaturationWarning",
    "BoundSpec",
    "BoundValue",
    "ClassifierEntry",
    "ComparisonReport",
    "ConstantPolicy",
    "DiscreteDistribution",
    "DistanceKind",
    "FixedPointConfig",
    "GeneratorSpec",
    "IkResult",
    "InitScheme",
    "KlRootRequest",
    "PacBayesError",
    "PosteriorResult",
    "ProfileShape",
    "ReportRow",
    "RiskProfile",
    "backend",
    "binary_kl",
    "bound_raw_batch",
    "compare_all",
    "complexity_free_objective",
    "evaluate_bound",
    "fp_solve",
    "fp_step",
    "generate_profile",
    "gibbs_test_error",
    "grid_oracle",
    "hhi",
    "ik_constant",
    "kl_divergence",
    "kl_lower_root",
    "kl_lower_root_batch",
    "kl_upper_root",
    "kl_upper_root_batch",
    "kl_upper_root_complement",
    "kl_upper_root_status",
    "latent_risk_curve",
    "log_binom",
    "log_ik_at",
    "log_sum_exp",
    "log_threshold",
    "make_distribution",
    "optimal_posterior_linear",
    "phi_eval",
    "prefix_search",
    "rch",
    "rch_prime",
    "stationarity_residual",
    "validate_profile",
    "__version__",
]
