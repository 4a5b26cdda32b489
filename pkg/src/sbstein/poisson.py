"""Poisson's equation and Stein factors for single-birth chains.

For a test function ``h`` and centred ``hhat = h - E h(pi)``, Poisson's
equation ``hhat(i) = f(i) - sum_j P[i][j] f(j)`` with ``f(0) = 0`` has
increments ``f(j+1) - f(j) = -m_j(h)``. The increments satisfy a forward
recursion driven by the up-step probabilities, but evaluating it forward
amplifies rounding by the expected up-crossing time, which grows
geometrically for positive recurrent chains. The default solver therefore
works on the truncated system directly (:func:`sbstein.kernels.ul_poisson_solve`)
and the literal recursion is kept as ``method="recursion"`` for short windows.

Stein factors are reported for test functions of unit oscillation
(``0 <= h <= 1``), the class on which the birth-death and M/M/1 closed forms
hold. Functions with ``|h| <= 1`` have oscillation 2, so their factor is
:attr:`SteinFactor.sup_norm_value`, twice :attr:`SteinFactor.value`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import kernels
from .chains import (
    MM1Embedded,
    ProbVector,
    ReflectedSRW,
    SingleBirthChain,
    TOL_CMP,
    augmented_block,
    is_birth_death,
)
from .errors import InvalidParameter, NotBirthDeath, WindowTooSmall, ZeroBirthProbability

TOL_MEAN = 1e-10
TOL_POISSON = 1e-9


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A bounded function on ``Z+``: explicit values plus a default elsewhere."""

    __test__ = False  # not a pytest class

    values: Mapping[int, float] = field(default_factory=dict)
    default: float = 0.0
    bound: float | None = None

    def __post_init__(self):
        vals = {int(k): float(v) for k, v in dict(self.values).items()}
        if any(k < 0 for k in vals):
            raise InvalidParameter("test function keys must be non-negative")
        sup = max([abs(self.default)] + [abs(v) for v in vals.values()])
        bound = sup if self.bound is None else float(self.bound)
        if sup > bound + 1e-15:
            raise InvalidParameter(f"|h| reaches {sup!r} above its bound {bound!r}")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "bound", bound)

    @classmethod
    def from_array(cls, arr, default: float = 0.0, bound: float | None = None):
        return cls(dict(enumerate(np.asarray(arr, dtype=float))), default, bound)

    @classmethod
    def indicator(cls, states) -> "TestFunction":
        return cls({int(s): 1.0 for s in np.atleast_1d(states)}, 0.0, 1.0)

    @property
    def support_end(self) -> int:
        """One past the largest explicitly stored state."""
        return max(self.values) + 1 if self.values else 0

    def __call__(self, k: int) -> float:
        return self.values.get(k, self.default)

    def array(self, n: int) -> np.ndarray:
        out = np.full(n, self.default, dtype=float)
        for k, v in self.values.items():
            if k < n:
                out[k] = v
        return out

    def mean(self, pi: ProbVector) -> tuple[float, float]:
        """``E h(pi)`` over the window and a bound on the neglected part."""
        W = len(pi)
        val = float(self.array(W) @ pi.probs) + self.default * pi.tail_mass
        err = self.bound * pi.tail_mass if self.support_end > W else 0.0
        return val, err


@dataclass(frozen=True, eq=False)
class PoissonSolution:
    """Increments ``m[0..J]`` and ``f[0..J+1]`` with ``f[j+1] - f[j] = -m[j]``."""

    m: np.ndarray
    f: np.ndarray
    h_mean: float
    window: int
    method: str = "stable"
    solve_states: int = 0


def _solve_window(chain: SingleBirthChain, J: int, pi: ProbVector, margin: int | None) -> int:
    """Largest state of the truncated system used to get ``m[0..J]``."""
    if chain.is_finite:
        N = chain.n_states - 1
        if J > N - 1:
            raise WindowTooSmall(f"J={J} needs states up to {J + 1}; chain has {N + 1}")
        return N
    margin = max(32, len(pi)) if margin is None else margin
    return J + 1 + margin


def _system(chain: SingleBirthChain, N: int) -> np.ndarray:
    if chain.is_finite:
        return np.asarray(chain.matrix, dtype=float)[: N + 1, : N + 1]
    return augmented_block(chain, N)


def _check_births(Q: np.ndarray, upto: int):
    births = np.diagonal(Q, offset=1)[:upto]
    bad = np.flatnonzero(births <= 0)
    if bad.size:
        raise ZeroBirthProbability(f"P[{bad[0]}][{bad[0] + 1}] = {births[bad[0]]!r}")


def _centre(h: TestFunction, pi: ProbVector) -> float:
    mean, err = h.mean(pi)
    if err > TOL_MEAN:
        raise WindowTooSmall(
            f"E h(pi) uncertain by {err:.3g} > {TOL_MEAN:g}; supply a finer pi"
        )
    return mean


def solve_poisson(
    chain: SingleBirthChain,
    h: TestFunction,
    pi: ProbVector,
    J: int,
    method: str = "stable",
    margin: int | None = None,
) -> PoissonSolution:
    """Increments ``m_0(h), ..., m_J(h)`` of the solution of Poisson's equation.

    Parameters
    ----------
    chain : SingleBirthChain
    h : TestFunction
    pi : ProbVector
        Stationary law of ``chain``; used to centre ``h``.
    J : int
        Last increment index returned.
    method : {"stable", "recursion"}
        ``"stable"`` solves the truncated system from the top down;
        ``"recursion"`` runs the forward increment recursion literally.
    margin : int, optional
        Extra states above ``J + 1`` kept in the stable solve of an infinite
        chain. Defaults to the length of the ``pi`` window (at least 32).
    """
    if J < 0:
        raise InvalidParameter("J must be non-negative")
    h_mean = _centre(h, pi)

    if method == "recursion":
        N = J + 1 if not chain.is_finite else _solve_window(chain, J, pi, 0)
        Q = chain.block(J)
        _check_births(Q, J + 1)
        cum = np.cumsum(Q, axis=1)
        hhat = h.array(J + 1) - h_mean
        m = kernels.forward_increments(cum, Q[:, :].diagonal(1).copy(), hhat)
        f = np.concatenate([[0.0], -np.cumsum(m)])
        return PoissonSolution(m, f, h_mean, J, "recursion", N + 1)
    if method != "stable":
        raise InvalidParameter(f"unknown method {method!r}")

    N = _solve_window(chain, J, pi, margin)
    Q = _system(chain, N)
    _check_births(Q, J + 1)
    hhat = h.array(N + 1) - h_mean
    f_all = kernels.ul_poisson_solve(Q, hhat[:, None])[:, 0]
    m = f_all[: J + 1] - f_all[1 : J + 2]
    return PoissonSolution(m, f_all[: J + 2].copy(), h_mean, J, "stable", N + 1)


def solve_poisson_many(
    chain: SingleBirthChain,
    hs,
    pi: ProbVector,
    J: int,
    margin: int | None = None,
) -> list[PoissonSolution]:
    """Stable solve for several test functions with one factorization."""
    hs = list(hs)
    N = _solve_window(chain, J, pi, margin)
    Q = _system(chain, N)
    _check_births(Q, J + 1)
    means = [_centre(h, pi) for h in hs]
    rhs = np.stack([h.array(N + 1) - mu for h, mu in zip(hs, means)], axis=1)
    F = kernels.ul_poisson_solve(Q, rhs)
    out = []
    for c, mu in enumerate(means):
        f = F[:, c]
        out.append(PoissonSolution(f[: J + 1] - f[1 : J + 2], f[: J + 2].copy(), mu, J, "stable", N + 1))
    return out


# ---------------------------------------------------------------------------
# Stein factors
# ---------------------------------------------------------------------------


class SteinMethod(enum.Enum):
    CLOSED_FORM_BD = "ClosedFormBD"
    CLOSED_FORM_MM1 = "ClosedFormMM1"
    NUMERICAL_L1 = "NumericalL1"


@dataclass(frozen=True)
class SteinFactor:
    """Bound on ``sup_h sup_j |m_j(h)|`` over unit-oscillation test functions.

    ``sup_norm_value`` is the matching bound over ``|h| <= 1``.
    """

    value: float
    method: SteinMethod
    window: int | None = None
    tail_note: str = ""

    def __post_init__(self):
        if not self.value >= 0:
            raise InvalidParameter("Stein factor must be non-negative")

    @property
    def sup_norm_value(self) -> float:
        return 2.0 * self.value


def bd_ratio_profile(chain: SingleBirthChain, pi: ProbVector) -> np.ndarray:
    """``P(pi > j) / (P[j][j+1] pi_j)`` over the window where ``pi_j > 0``."""
    W = len(pi)
    if not is_birth_death(chain, W):
        raise NotBirthDeath(f"{chain.description} jumps more than one level down")
    births = np.diagonal(chain.block(W - 1), offset=1)
    surv = pi.survival(W) + pi.tail_mass
    keep = pi.probs > 0
    n = int(np.argmin(keep)) if not keep.all() else W
    return surv[:n] / (births[:n] * pi.probs[:n])


def stein_factor_bd(chain: SingleBirthChain, pi: ProbVector | None = None) -> SteinFactor:
    """Birth-death Stein factor ``sup_j P(pi > j) / (b_j pi_j)``.

    Exact ``1 / (2p - 1)`` for the reflected walk; otherwise the maximum over
    the ``pi`` window.
    """
    if isinstance(chain, ReflectedSRW):
        return SteinFactor(
            1.0 / (2 * chain.p - 1),
            SteinMethod.CLOSED_FORM_BD,
            None,
            "closed form; the ratio is constant in j",
        )
    if pi is None:
        raise InvalidParameter("a stationary law is required for a general birth-death chain")
    ratios = bd_ratio_profile(chain, pi)
    return SteinFactor(
        float(ratios.max()),
        SteinMethod.CLOSED_FORM_BD,
        ratios.size - 1,
        f"supremum taken over j <= {ratios.size - 1} only",
    )


def stein_factor_mm1(rho: float) -> SteinFactor:
    """``(2 - rho^2) / (rho (1 - rho))`` for the embedded M/M/1 chain."""
    if not 0.0 < rho < 1.0:
        raise InvalidParameter(f"rho={rho!r} must lie in (0, 1)")
    return SteinFactor(
        (2 - rho**2) / (rho * (1 - rho)),
        SteinMethod.CLOSED_FORM_MM1,
        None,
        "closed form, valid for every j",
    )


def closed_form_stein_factor(chain: SingleBirthChain) -> SteinFactor | None:
    if isinstance(chain, ReflectedSRW):
        return stein_factor_bd(chain)
    if isinstance(chain, MM1Embedded):
        return stein_factor_mm1(chain.rho)
    return None


def increment_coefficients(
    chain: SingleBirthChain, pi: ProbVector, J: int, K: int | None = None, margin: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of ``m_j(h)`` as a linear functional of ``h``.

    Returns ``(c, tail)`` with ``m_j(h) = sum_l c[j, l] h(l) + tail[j] * h_beyond``
    exact for ``h`` equal to a constant ``h_beyond`` outside the solve window.
    Centring enters through ``-A_j pi_l`` terms, where ``A_j`` is the response
    to the constant function.
    """
    N = _solve_window(chain, J, pi, margin)
    if K is not None and not chain.is_finite:
        N = max(N, K)
    Q = _system(chain, N)
    _check_births(Q, J + 1)
    rhs = np.eye(N + 1)
    rhs[0, 0] = 0.0
    F = kernels.ul_poisson_solve(Q, rhs)  # F[i, l]: f(i) for h = indicator of l
    G = F[: J + 1] - F[1 : J + 2]
    A = G.sum(axis=1)
    pi_w = pi.padded(N + 1)
    beyond = max(0.0, 1.0 - pi_w.sum())
    c = G - np.outer(A, pi_w)
    return c, -A * beyond


def stein_factor_numerical(
    chain: SingleBirthChain, pi: ProbVector, J: int, K: int | None = None, margin: int | None = None
) -> SteinFactor:
    """Exact ``max_{j<=J} sup_{0<=h<=1} |m_j(h)|`` up to the truncation tail.

    ``m_j`` is linear in ``h`` and kills constants, so its supremum over
    unit-oscillation functions is the larger of the positive and negative
    parts of its coefficient vector.
    """
    if J < 0:
        raise InvalidParameter("J must be non-negative")
    if K is not None and K < J:
        raise InvalidParameter("K must be at least J")
    c, tail = increment_coefficients(chain, pi, J, K, margin)
    pos = np.clip(c, 0, None).sum(axis=1) + np.clip(tail, 0, None)
    neg = np.clip(-c, 0, None).sum(axis=1) + np.clip(-tail, 0, None)
    per_j = np.maximum(pos, neg)
    # mass of pi beyond the solve window enters only via the tail coefficient
    note = (
        f"window j <= {J}; solve used {c.shape[1]} states; "
        f"largest tail coefficient {float(np.abs(tail).max()):.3g}"
    )
    if not chain.is_finite:
        note += "; values beyond the window are not certified"
    return SteinFactor(float(per_j.max()), SteinMethod.NUMERICAL_L1, J, note)


def increment_sup_profile(chain, pi, J, K=None, margin=None) -> np.ndarray:
    """Per-``j`` unit-oscillation supremum of ``|m_j(h)|``."""
    c, tail = increment_coefficients(chain, pi, J, K, margin)
    pos = np.clip(c, 0, None).sum(axis=1) + np.clip(tail, 0, None)
    neg = np.clip(-c, 0, None).sum(axis=1) + np.clip(-tail, 0, None)
    return np.maximum(pos, neg)
