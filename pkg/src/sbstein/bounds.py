"""Explicit total-variation bounds against a single-birth stationary law.

All bounds are on the ``sup_{|h| <= 1}`` scale, i.e. the full L1 distance
``sum_j |P(X = j) - pi_j|``. The Stein multiplier on that scale is
:attr:`SteinFactor.sup_norm_value`. The closed-form expressions for the
reflected walk and the M/M/1 chain are written for unit-oscillation test
functions; their values are exposed as ``components["unit_oscillation_bound"]``
and doubled to give ``bound_value``.

Infinite sums are windowed and the neglected part is bounded and added to
the bound, so every ``bound_value`` stays an upper bound.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .chains import (
    TOL_CMP,
    DominationCertificate,
    MonotonicityCertificate,
    ProbVector,
    SingleBirthChain,
    is_birth_death,
    is_stochastically_monotone,
    stationary,
)
from .errors import (
    InvalidParameter,
    NotBirthDeath,
    NotMonotone,
    NotOrdered,
    NotStationary,
    WindowTooSmall,
)
from .poisson import SteinFactor, stein_factor_bd, stein_factor_mm1

TOL_BOUND = 1e-10
SUP_NORM = 2.0  # |h| <= 1 has oscillation 2


class SignWarning(UserWarning):
    """A displayed inner term that should be non-negative came out negative."""


@dataclass(frozen=True)
class BoundReport:
    """A bound, its ingredients and, optionally, the exact value it covers."""

    bound_value: float
    components: dict = field(default_factory=dict)
    oracle_value: float | None = None
    holds: bool | None = None
    provenance: str = ""

    def __post_init__(self):
        if not self.bound_value >= 0:
            raise InvalidParameter(f"bound {self.bound_value!r} is negative")

    def check(self, exact: float, tol: float = TOL_CMP) -> "BoundReport":
        """Attach an oracle value and record whether the bound covers it."""
        return replace(self, oracle_value=float(exact), holds=bool(self.bound_value + tol >= exact))


@dataclass(frozen=True)
class ConvergenceCurve:
    """Bounds on ``d_TV(Z_t, pi)`` over ``t`` at a fixed rate parameter ``r``."""

    t_values: np.ndarray
    bounds: np.ndarray
    rate_r: float
    exact: np.ndarray | None = None

    @property
    def holds(self) -> np.ndarray | None:
        if self.exact is None:
            return None
        return self.bounds + TOL_CMP >= self.exact


# ---------------------------------------------------------------------------
# the master bound
# ---------------------------------------------------------------------------


def one_step_law(chain: SingleBirthChain, x_law: ProbVector) -> np.ndarray:
    """Window part of the law of one step of ``chain`` started from ``x_law``."""
    W = len(x_law)
    B = chain.block(W - 1)
    return x_law.probs @ B


def _survival(p: np.ndarray, n: int) -> np.ndarray:
    """``sum_{k > j} p[k]`` for ``j = 0..n-1``."""
    q = np.zeros(n + 1)
    m = min(n + 1, p.size)
    q[:m] = p[:m]
    return np.cumsum(q[::-1])[::-1][1:]


def theorem1_bound(
    chain: SingleBirthChain,
    sf: SteinFactor,
    x_law: ProbVector,
    horizon: int | None = None,
    tol_bound: float = TOL_BOUND,
) -> BoundReport:
    """Stein factor times ``sum_j |P(X > j) - P(X' > j)|``, ``X'`` one step from ``X``.

    Each term with ``j <= horizon`` is uncertain by at most the tail mass of
    ``X``; terms past the horizon are bounded by ``P(X > j) + P(X > j - 1)``.
    """
    W = len(x_law)
    H = W if horizon is None else int(horizon)
    if H < 0:
        raise InvalidParameter("horizon must be non-negative")
    y = one_step_law(chain, x_law)
    n = max(H + 1, y.size) + 1
    sx = x_law.survival(n)
    sy = _survival(y, n)
    terms = np.abs(sx - sy)
    inner = float(terms[: H + 1].sum())
    beyond = float((sx[H + 1:] + sy[H + 1:]).sum())
    tail = x_law.tail_mass
    tc = (H + 1) * tail + beyond + 2.0 * x_law.tail_moment_bound()
    if tail > 0:
        edge = float(terms[min(H, W - 1)])
        if edge > tol_bound / max(H, 1) or not math.isfinite(tc):
            raise WindowTooSmall(
                f"summand {edge:.3g} at j={min(H, W - 1)} has not decayed below "
                f"{tol_bound / max(H, 1):.3g}"
            )
    S = sf.sup_norm_value
    return BoundReport(
        S * (inner + tc),
        {
            "stein_factor": sf.value,
            "stein_factor_sup_norm": S,
            "discrepancy_sum": inner,
            "tail_correction": S * tc,
            "unit_oscillation_bound": sf.value * (inner + tc),
            "horizon": H,
        },
        provenance="master one-step bound",
    )


# ---------------------------------------------------------------------------
# convergence to stationarity
# ---------------------------------------------------------------------------


def corollary1_bound(
    chain: SingleBirthChain,
    sf: SteinFactor,
    delta_mean: float,
    certificate: MonotonicityCertificate | None = None,
    horizon: int = 200,
) -> BoundReport:
    """Stein factor times an upper bound on ``E Z_{t+1} - E Z_t``.

    Needs stochastic monotonicity; the certificate is computed over
    ``horizon`` when not supplied.
    """
    if delta_mean < 0:
        raise InvalidParameter("delta_mean must be non-negative")
    if certificate is None:
        certificate = is_stochastically_monotone(chain, horizon)
    if not certificate.holds:
        raise NotMonotone(
            f"{chain.description} is not stochastically monotone up to state {certificate.horizon}"
        )
    S = sf.sup_norm_value
    return BoundReport(
        S * delta_mean,
        {
            "stein_factor": sf.value,
            "stein_factor_sup_norm": S,
            "delta_mean": delta_mean,
            "monotone_horizon": certificate.horizon,
        },
        provenance="monotone convergence bound",
    )


def srw_admissible_r(p: float) -> tuple[float, float]:
    return 1.0, (4 * p * (1 - p)) ** -0.5


def mm1_admissible_r(rho: float) -> tuple[float, float]:
    return 1.0, (1 + rho) ** 2 / (4 * rho)


def _check_r(r, lo, hi):
    if not lo - 1e-12 <= r <= hi * (1 + 1e-12):
        raise InvalidParameter(f"r={r!r} outside the admissible interval [{lo}, {hi}]")


def srw_return_pgf(p: float, r: float) -> float:
    """``E r^T`` for the first return time of the coupled reflected walk."""
    if not 0.5 < p < 1:
        raise InvalidParameter(f"p={p!r} must lie in (1/2, 1)")
    _check_r(r, *srw_admissible_r(p))
    root = math.sqrt(max(0.0, 1 - 4 * p * (1 - p) * r * r))
    return (2 * p * r + 1 - root) / 2


def srw_mean_increment(p: float, t: int, r: float) -> float:
    """Coupling bound ``E Z_{t+1} - E Z_t <= P(T > t+1) <= E r^T / r^{t+2}``."""
    return srw_return_pgf(p, r) / r ** (t + 2)


def srw_convergence_bound(p: float, t: int, r: float) -> BoundReport:
    """Geometric-rate bound on ``d_TV(Z_t, pi)`` for the reflected walk from 0."""
    if t < 0:
        raise InvalidParameter("t must be non-negative")
    pgf = srw_return_pgf(p, r)
    unit = pgf / (r * r * (2 * p - 1)) * r ** (-t)
    return BoundReport(
        SUP_NORM * unit,
        {
            "E_r_T": pgf,
            "tail_prob_bound": pgf / r ** (t + 2),
            "stein_factor": 1 / (2 * p - 1),
            "rate_r": r,
            "unit_oscillation_bound": unit,
        },
        provenance="convergence, reflected walk coupling",
    )


def mm1_busy_pgf_term(rho: float, r: float) -> float:
    """``rho E r^N`` for the busy-period customer count ``N``."""
    if not 0 < rho < 1:
        raise InvalidParameter(f"rho={rho!r} must lie in (0, 1)")
    _check_r(r, *mm1_admissible_r(rho))
    root = math.sqrt(max(0.0, (1 + rho) ** 2 - 4 * rho * r))
    return (1 + rho - root) / 2


def mm1_mean_increment(rho: float, t: int, r: float) -> float:
    """Coupling bound ``E Z_{t+1} - E Z_t <= P(T > t+1) <= rho E r^N / ((1+rho) r^{t+1})``."""
    return mm1_busy_pgf_term(rho, r) / ((1 + rho) * r ** (t + 1))


def mm1_convergence_bound(rho: float, t: int, r: float) -> BoundReport:
    """Geometric-rate bound on ``d_TV(Z_t, pi)`` for the embedded M/M/1 chain from 0."""
    if t < 0:
        raise InvalidParameter("t must be non-negative")
    term = mm1_busy_pgf_term(rho, r)
    unit = (2 - rho**2) * term / (rho * (1 - rho) * (1 + rho) * r) * r ** (-t)
    return BoundReport(
        SUP_NORM * unit,
        {
            "rho_E_r_N": term,
            "tail_prob_bound": term / ((1 + rho) * r ** (t + 1)),
            "stein_factor": (2 - rho**2) / (rho * (1 - rho)),
            "rate_r": r,
            "unit_oscillation_bound": unit,
        },
        provenance="convergence, M/M/1 busy-period coupling",
    )


def r_grid(lo: float, hi: float, points: int = 100) -> np.ndarray:
    return np.linspace(lo, hi, points)


def optimal_r(bound_fn, param: float, t: int, lo: float, hi: float, points: int = 100) -> BoundReport:
    """Smallest bound over an evenly spaced grid of admissible ``r``."""
    reports = [bound_fn(param, t, float(r)) for r in r_grid(lo, hi, points)]
    return min(reports, key=lambda rep: rep.bound_value)


def convergence_curve(kind: str, param: float, t_values, r: float) -> ConvergenceCurve:
    fn = {"srw": srw_convergence_bound, "mm1": mm1_convergence_bound}[kind]
    t_values = np.asarray(list(t_values), dtype=int)
    b = np.array([fn(param, int(t), r).bound_value for t in t_values])
    return ConvergenceCurve(t_values, b, r)


# ---------------------------------------------------------------------------
# comparison of stationary laws
# ---------------------------------------------------------------------------


def _row_tails(chain: SingleBirthChain, n: int, width: int) -> np.ndarray:
    B = chain.block(n)
    M = np.zeros((n + 1, width + 1))
    m = min(width + 1, B.shape[1])
    M[:, :m] = B[:, :m]
    rev = np.cumsum(M[:, ::-1], axis=1)[:, ::-1]
    return rev[:, 1:]  # [i, j] = sum_{k > j}, j = 0..width-1


def corollary2_general(
    chain: SingleBirthChain,
    sf: SteinFactor,
    q_chain: SingleBirthChain,
    x_law: ProbVector,
    horizon: int | None = None,
    check_stationary: bool = False,
    tol_stationary: float = 1e-8,
) -> BoundReport:
    """Stein factor times ``sum_i P(X=i) sum_j |sum_{k>j} (Q[i][k] - P[i][k])|``.

    ``X`` should be stationary for ``q_chain``; set ``check_stationary`` to
    verify it on the window. States of ``X`` past ``horizon`` go to the tail,
    where each row contributes at most the two one-step means.
    """
    if horizon is not None:
        x_law = x_law.truncated(horizon + 1)
    W = len(x_law)
    if check_stationary:
        res = residual_l1(q_chain, x_law)
        if res > tol_stationary + x_law.tail_mass:
            raise NotStationary(f"||xQ - x||_1 = {res:.3g} on the window")
    width = W + 1
    for c in (chain, q_chain):
        if c.is_finite:
            width = max(width, c.n_states)
    TP = _row_tails(chain, W - 1, width)
    TQ = _row_tails(q_chain, W - 1, width)
    per_row = np.abs(TQ - TP).sum(axis=1)
    inner = float(x_law.probs @ per_row)
    tc = 2.0 * x_law.tail_moment_bound()
    if not math.isfinite(tc):
        raise WindowTooSmall("cannot bound the neglected rows of X")
    S = sf.sup_norm_value
    return BoundReport(
        S * (inner + tc),
        {
            "stein_factor": sf.value,
            "stein_factor_sup_norm": S,
            "discrepancy_sum": inner,
            "tail_correction": S * tc,
            "unit_oscillation_bound": sf.value * (inner + tc),
        },
        provenance="stationary comparison, general form",
    )


def residual_l1(chain: SingleBirthChain, x_law: ProbVector) -> float:
    """``||x P - x||_1`` over the window of ``x``."""
    y = one_step_law(chain, x_law)
    return float(np.abs(y - x_law.padded(y.size)).sum())


def one_step_means(chain: SingleBirthChain, n: int) -> np.ndarray:
    """``sum_j sum_{k > j} P[i][k] = E[next state | i]`` for ``i = 0..n``."""
    B = chain.block(n)
    return B @ np.arange(B.shape[1])


def corollary2_dominated(
    chain: SingleBirthChain,
    sf: SteinFactor,
    x_law: ProbVector,
    certificate: DominationCertificate,
) -> BoundReport:
    """Stein factor times ``|E X - E[mean of one P-step from X]|``.

    Requires a row-tail ordering between ``chain`` and the chain that ``X``
    is stationary for.
    """
    if certificate is None or not certificate.ordered:
        raise NotOrdered("a domination certificate is required")
    W = len(x_law)
    k = np.arange(W)
    ex = float(k @ x_law.probs)
    enext = float(x_law.probs @ one_step_means(chain, W - 1))
    signed = ex - enext
    tc = x_law.tail_moment_bound()
    if not math.isfinite(tc):
        raise WindowTooSmall("cannot bound the neglected rows of X")
    S = sf.sup_norm_value
    return BoundReport(
        S * (abs(signed) + tc),
        {
            "stein_factor": sf.value,
            "stein_factor_sup_norm": S,
            "E_X": ex,
            "E_one_step": enext,
            "signed_difference": signed,
            "tail_correction": S * tc,
            "unit_oscillation_bound": sf.value * (abs(signed) + tc),
            "relation": certificate.relation.value,
        },
        provenance="stationary comparison, dominated form",
    )


def _bd_rates(chain: SingleBirthChain, n: int) -> tuple[np.ndarray, np.ndarray]:
    B = chain.block(n)
    i = np.arange(n + 1)
    up = B[i, i + 1]
    down = np.zeros(n + 1)
    down[1:] = B[i[1:], i[1:] - 1]
    return up, down


def bd_comparison_bound(
    p_chain: SingleBirthChain,
    q_chain: SingleBirthChain,
    x_law: ProbVector,
    pi: ProbVector | None = None,
    horizon: int | None = None,
) -> BoundReport:
    """Birth-death Stein factor times ``E|d^P_X - d^Q_X| + E|b^P_X - b^Q_X|``.

    A death at state 0 is a reflection, so only the birth term counts there.
    """
    if horizon is not None:
        x_law = x_law.truncated(horizon + 1)
    W = len(x_law)
    for c in (p_chain, q_chain):
        if not is_birth_death(c, W):
            raise NotBirthDeath(f"{c.description} is not a birth-death chain")
    if pi is None and p_chain.closed_form_stationary() is None:
        pi = stationary(p_chain)
    sf = stein_factor_bd(p_chain, pi)
    bp, dp = _bd_rates(p_chain, W - 1)
    bq, dq = _bd_rates(q_chain, W - 1)
    death_term = float(x_law.probs @ np.abs(dp - dq))
    birth_term = float(x_law.probs @ np.abs(bp - bq))
    tc = 2.0 * x_law.tail_mass
    S = sf.sup_norm_value
    return BoundReport(
        S * (death_term + birth_term + tc),
        {
            "stein_factor": sf.value,
            "stein_factor_sup_norm": S,
            "death_term": death_term,
            "birth_term": birth_term,
            "tail_correction": S * tc,
            "unit_oscillation_bound": sf.value * (death_term + birth_term),
        },
        provenance="birth-death comparison",
    )


def srw_geometric_bound(
    p: float, x_law: ProbVector, certificate: DominationCertificate | None = None
) -> BoundReport:
    """``|1 - p/(2p-1) P(X=0)|`` approximation of ``X`` by ``Geom((2p-1)/p)``."""
    if not 0.5 < p < 1:
        raise InvalidParameter(f"p={p!r} must lie in (1/2, 1)")
    p0 = float(x_law.padded(1)[0])
    unit = abs(1 - p / (2 * p - 1) * p0)
    comps = {"P_X0": p0, "unit_oscillation_bound": unit, "stein_factor": 1 / (2 * p - 1)}
    if certificate is not None:
        comps["relation"] = certificate.relation.value
    return BoundReport(SUP_NORM * unit, comps, provenance="geometric approximation, reflected walk")


def mm1_geometric_bound(
    rho: float, x_law: ProbVector, horizon: int | None = None, tol_tail: float = 1e-8
) -> BoundReport:
    """M/M/1-based geometric approximation.

    The inner term ``(1-rho)/rho - E[(1+rho)^{-(X+1)}]/rho`` is non-negative
    whenever ``X`` is stationary for a chain satisfying the row condition. A
    negative value is reported (``components["signed_inner"]``) with a
    :class:`SignWarning`; the bound then uses its absolute value.
    """
    sf = stein_factor_mm1(rho)
    if horizon is not None:
        x_law = x_law.truncated(horizon + 1)
    if x_law.tail_mass > tol_tail:
        raise WindowTooSmall(f"tail mass {x_law.tail_mass:.3g} exceeds {tol_tail:g}")
    W = len(x_law)
    z = 1.0 / (1.0 + rho)
    e = float(x_law.probs @ z ** (np.arange(W) + 1.0))
    tail_e = x_law.tail_mass * z ** (W + 1)
    inner = (1 - rho) / rho - e / rho
    tc = tail_e / rho
    comps = {
        "stein_factor": sf.value,
        "E_z_pow": e,
        "signed_inner": inner,
        "tail_correction": SUP_NORM * sf.value * tc,
        "unit_oscillation_bound": sf.value * inner,
    }
    if inner < -TOL_CMP:
        comps["sign_violation"] = True
        warnings.warn(
            f"inner term {inner:.6g} is negative; X cannot be stationary for a chain "
            "satisfying the row condition",
            SignWarning,
            stacklevel=2,
        )
    return BoundReport(
        SUP_NORM * sf.value * (abs(inner) + tc),
        comps,
        provenance="geometric approximation, M/M/1",
    )


# ---------------------------------------------------------------------------
# truncation
# ---------------------------------------------------------------------------


def truncation_bound(
    chain: SingleBirthChain,
    sf: SteinFactor,
    n: int,
    nu: ProbVector,
    x_law: ProbVector,
) -> BoundReport:
    """Stein factor times ``P(X=n) (n + 1 - E nu) P[n][n+1]``.

    ``X`` is the stationary law of the augmented truncation at ``n``.
    """
    if nu.tail_mass > 0 or np.any(nu.probs[n + 1:] > 0):
        raise InvalidParameter(f"nu must be supported on 0..{n}")
    if x_law.tail_mass > 0 or np.any(x_law.probs[n + 1:] > TOL_CMP):
        raise InvalidParameter(f"X must be supported on 0..{n}")
    e_nu = float(np.arange(len(nu)) @ nu.probs)
    px_n = float(x_law.padded(n + 1)[n])
    lost = float(chain.block(n)[n, n + 1])
    S = sf.sup_norm_value
    core = px_n * (n + 1 - e_nu) * lost
    return BoundReport(
        S * core,
        {
            "stein_factor": sf.value,
            "stein_factor_sup_norm": S,
            "P_X_n": px_n,
            "E_nu": e_nu,
            "lost_mass": lost,
            "unit_oscillation_bound": sf.value * core,
        },
        provenance="truncation bound",
    )


def truncation_bound_geometric(
    alpha: float, n: int, e_nu: float, birth_n: float, inf_birth: float
) -> BoundReport:
    """Closed form for a monotone birth-death chain with ``Geom(alpha)`` stationary law."""
    if not 0 < alpha < 1:
        raise InvalidParameter("alpha must lie in (0, 1)")
    unit = (n + 1 - e_nu) * birth_n / (alpha * inf_birth) * (1 - alpha) ** (n + 1)
    return BoundReport(
        SUP_NORM * unit,
        {"unit_oscillation_bound": unit, "rate": 1 - alpha},
        provenance="truncation bound, geometric specialization",
    )


def truncation_lower_bound(alpha: float, n: int) -> float:
    """``P(pi > n) = (1 - alpha)^(n+1)``, the mass the truncation cannot reach."""
    return (1 - alpha) ** (n + 1)
