"""Stein-method error bounds for single-birth Markov chains.

Chains on the non-negative integers that move up by at most one level per
step admit an explicit solution of Poisson's equation. This package turns
that solution into computable bounds on total-variation distance
(convergence to stationarity, comparison of stationary laws, truncation
error) and checks every bound against exact brute-force values.

Distances are on the ``sup_{|h| <= 1}`` scale, ``sum_j |a_j - b_j|``.
"""

from .bounds import (
    BoundReport,
    ConvergenceCurve,
    SignWarning,
    bd_comparison_bound,
    convergence_curve,
    corollary1_bound,
    corollary2_dominated,
    corollary2_general,
    mm1_convergence_bound,
    mm1_geometric_bound,
    optimal_r,
    srw_convergence_bound,
    srw_geometric_bound,
    theorem1_bound,
    truncation_bound,
    truncation_bound_geometric,
    truncation_lower_bound,
)
from .chains import (
    BirthDeath,
    Domination,
    DominationCertificate,
    ExplicitChain,
    MM1Embedded,
    MonotonicityCertificate,
    ProbVector,
    ReflectedSRW,
    SingleBirthChain,
    TruncationPolicy,
    dominates,
    is_birth_death,
    is_stochastically_monotone,
    stationary,
    truncate_augment,
)
from .config import ConfigError, chain_from_dict, load_chain, load_test_function
from .errors import (
    BudgetExceeded,
    ChainError,
    InvalidParameter,
    NotBirthDeath,
    NotMonotone,
    NotOrdered,
    NotStationary,
    SingularSystem,
    StateOutOfRange,
    WindowTooSmall,
    ZeroBirthProbability,
)
from .kernels import BACKEND
from .oracle import (
    MarginalTrace,
    exact_stationary_finite,
    exact_tv,
    iterate_marginals,
    mean_increment,
    tv_bracket,
    verify_poisson,
)
from .poisson import (
    PoissonSolution,
    SteinFactor,
    SteinMethod,
    TestFunction,
    closed_form_stein_factor,
    solve_poisson,
    solve_poisson_many,
    stein_factor_bd,
    stein_factor_mm1,
    stein_factor_numerical,
)

__version__ = "0.1.0"
