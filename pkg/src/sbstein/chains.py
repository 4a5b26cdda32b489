"""Single-birth transition laws on the non-negative integers.

A single-birth chain moves up by at most one level per step:
``P[i][j] = 0`` for ``j > i + 1`` and ``P[i][i+1] > 0``. Rows are generated on
demand from family parameters, so the infinite families never materialize
more than the window a caller asks for.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .errors import BudgetExceeded, InvalidParameter, StateOutOfRange

TOL_ROW = 1e-12
TOL_CMP = 1e-12


# ---------------------------------------------------------------------------
# probability vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProbVector:
    """A law on ``{0, 1, ...}`` known on a finite window.

    Parameters
    ----------
    probs : array_like
        ``P(X = k)`` for ``k = 0..len(probs)-1``.
    tail_mass : float
        Unassigned mass on states ``>= len(probs)``.
    tail_moment : float, optional
        Upper bound on ``E[(X + 1); X >= len(probs)]``. Estimated from the
        decay of the last window entries when omitted.
    meta : dict
        Free-form provenance (stopping rule, window sizes, ...).
    """

    probs: np.ndarray
    tail_mass: float = 0.0
    tail_moment: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).ravel()
        if p.size and p.min() < -TOL_ROW:
            raise InvalidParameter(f"negative probability {p.min():.3g}")
        p = np.clip(p, 0.0, None)
        p.setflags(write=False)
        tail = float(self.tail_mass)
        if tail < -TOL_ROW:
            raise InvalidParameter(f"negative tail mass {tail:.3g}")
        tail = max(tail, 0.0)
        total = p.sum() + tail
        if abs(total - 1.0) > 100 * TOL_ROW:
            raise InvalidParameter(f"mass sums to {total!r}, not 1")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "tail_mass", tail)
        if tail == 0.0:
            object.__setattr__(self, "tail_moment", 0.0)

    # constructors -------------------------------------------------------

    @classmethod
    def point_mass(cls, k: int) -> "ProbVector":
        p = np.zeros(k + 1)
        p[k] = 1.0
        return cls(p)

    @classmethod
    def geometric(cls, success: float, tail_eps: float = 1e-16) -> "ProbVector":
        """``P(X = k) = success * (1 - success)**k`` with exact tail terms."""
        if not 0.0 < success <= 1.0:
            raise InvalidParameter(f"geometric parameter {success} not in (0, 1]")
        q = 1.0 - success
        if q == 0.0:
            return cls.point_mass(0)
        W = max(1, int(math.ceil(math.log(tail_eps) / math.log(q))))
        k = np.arange(W)
        probs = success * q**k
        tail = q**W
        # memoryless: E[X + 1 | X >= W] = W + 1 / success
        return cls(probs, tail, tail * (W + 1.0 / success), {"law": f"Geom({success!r})"})

    @classmethod
    def from_mapping(cls, values: Mapping[int, float]) -> "ProbVector":
        n = max(values) + 1
        p = np.zeros(n)
        for k, v in values.items():
            p[k] = v
        return cls(p)

    # accessors ----------------------------------------------------------

    def __len__(self) -> int:
        return self.probs.size

    def padded(self, n: int) -> np.ndarray:
        """Window probabilities padded with zeros (or cut) to length ``n``."""
        out = np.zeros(n)
        m = min(n, self.probs.size)
        out[:m] = self.probs[:m]
        return out

    def survival(self, n: int | None = None) -> np.ndarray:
        """Window part of ``P(X > j)`` for ``j = 0..n-1`` (tail excluded)."""
        n = self.probs.size if n is None else n
        p = self.padded(n + 1)
        # small-to-large accumulation keeps relative accuracy in the tail
        rev = np.cumsum(p[::-1])[::-1]
        return rev[1:]

    def mean(self) -> float:
        """Window mean plus the tail moment bound (an upper bound)."""
        k = np.arange(self.probs.size)
        return float(k @ self.probs + self.tail_moment_bound())

    def tail_moment_bound(self) -> float:
        """Upper bound on ``E[(X + 1); X >= len(self)]``."""
        if self.tail_mass == 0.0:
            return 0.0
        if self.tail_moment is not None:
            return float(self.tail_moment)
        return _geometric_tail_moment(self.probs, self.tail_mass)

    def truncated(self, n: int) -> "ProbVector":
        """Move the mass on states ``>= n`` into the tail."""
        if n >= self.probs.size:
            return self
        dropped = self.probs[n:]
        k = np.arange(n, self.probs.size)
        moment = float((k + 1) @ dropped) + self.tail_moment_bound()
        return ProbVector(
            self.probs[:n], self.tail_mass + float(dropped.sum()), moment, dict(self.meta)
        )


def _geometric_tail_moment(probs: np.ndarray, tail: float) -> float:
    """Extrapolate ``E[(X+1); X >= W]`` assuming geometric decay past the window."""
    W = probs.size
    last = probs[max(0, W - 9):]
    last = last[last > 0]
    if last.size < 2:
        return math.inf
    q = float(np.max(last[1:] / last[:-1]))
    if q >= 1.0:
        return math.inf
    return tail * (W + 1.0 / (1.0 - q))


@dataclass(frozen=True)
class TruncationPolicy:
    """Adaptive window settings for :func:`stationary`."""

    tail_eps: float = 1e-12
    max_states: int = 2000

    def __post_init__(self):
        if not self.tail_eps > 0:
            raise InvalidParameter("tail_eps must be positive")
        if self.max_states < 2:
            raise InvalidParameter("max_states must be at least 2")


# ---------------------------------------------------------------------------
# chain families
# ---------------------------------------------------------------------------


class SingleBirthChain:
    """Base class: a transition law generated row by row.

    Subclasses implement :meth:`_block`. ``n_states`` is ``None`` for chains
    on all of ``Z+``.
    """

    family = "abstract"
    n_states: int | None = None
    description: str = ""

    def _block(self, n: int) -> np.ndarray:
        raise NotImplementedError

    def _row(self, i: int) -> np.ndarray:
        return self._block(i)[i]

    def _check_state(self, i: int):
        if i < 0:
            raise StateOutOfRange(f"state {i} is negative")
        if self.n_states is not None and i >= self.n_states:
            raise StateOutOfRange(
                f"state {i} outside the finite chain 0..{self.n_states - 1}"
            )

    def block(self, n: int) -> np.ndarray:
        """Rows ``0..n`` restricted to columns ``0..n+1``.

        Single-birth rows never reach past ``i + 1``, so this is the full
        content of the first ``n + 1`` rows.
        """
        self._check_state(n)
        return self._block(n)

    def row(self, i: int, width: int | None = None) -> np.ndarray:
        """``P[i][0..width]``; ``width`` defaults to ``i + 1``."""
        self._check_state(i)
        width = i + 1 if width is None else width
        r = self._row(i)
        out = np.zeros(width + 1)
        m = min(width + 1, r.size)
        out[:m] = r[:m]
        return out

    def birth(self, i: int) -> float:
        self._check_state(i)
        return float(self._row(i)[i + 1])

    @property
    def is_finite(self) -> bool:
        return self.n_states is not None

    def closed_form_stationary(self, tail_eps: float = 1e-16) -> ProbVector | None:
        """The family's known stationary law, when one exists."""
        return None


@dataclass(frozen=True)
class ReflectedSRW(SingleBirthChain):
    """Simple random walk on ``Z+`` reflected at 0, down-probability ``p``."""

    p: float
    description: str = ""
    family = "reflected_srw"

    def __post_init__(self):
        if not 0.5 < self.p < 1.0:
            raise InvalidParameter(
                f"p={self.p!r} must lie in (1/2, 1) for positive recurrence"
            )
        if not self.description:
            object.__setattr__(self, "description", f"ReflectedSRW(p={self.p})")

    @property
    def alpha(self) -> float:
        return (2 * self.p - 1) / self.p

    def _block(self, n):
        P = np.zeros((n + 1, n + 2))
        idx = np.arange(n + 1)
        P[idx, idx + 1] = 1 - self.p
        P[0, 0] = self.p
        P[idx[1:], idx[1:] - 1] = self.p
        return P

    def _row(self, i):
        r = np.zeros(i + 2)
        r[max(i - 1, 0)] = self.p
        r[i + 1] = 1 - self.p
        return r

    def closed_form_stationary(self, tail_eps=1e-16):
        return ProbVector.geometric(self.alpha, tail_eps)


@dataclass(frozen=True)
class MM1Embedded(SingleBirthChain):
    """M/M/1 queue length seen by arrivals, traffic intensity ``rho``."""

    rho: float
    description: str = ""
    family = "mm1_embedded"

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise InvalidParameter(f"rho={self.rho!r} must lie in (0, 1)")
        if not self.description:
            object.__setattr__(self, "description", f"MM1Embedded(rho={self.rho})")

    def service_law(self, k):
        """Probability that exactly ``k`` customers are served between arrivals."""
        r = self.rho
        return r / (1 + r) * (1 / (1 + r)) ** np.asarray(k, dtype=float)

    def _block(self, n):
        i = np.arange(n + 1)[:, None]
        j = np.arange(n + 2)[None, :]
        k = i - j + 1
        P = np.where((j >= 1) & (k >= 0), self.service_law(np.maximum(k, 0)), 0.0)
        P[:, 0] = (1 + self.rho) ** -(np.arange(n + 1) + 1.0)
        return P

    def _row(self, i):
        r = np.zeros(i + 2)
        r[1:] = self.service_law(i + 1 - np.arange(1, i + 2))
        r[0] = (1 + self.rho) ** -(i + 1.0)
        return r

    def closed_form_stationary(self, tail_eps=1e-16):
        return ProbVector.geometric(1 - self.rho, tail_eps)


@dataclass(frozen=True, eq=False)
class BirthDeath(SingleBirthChain):
    """Birth-death chain with birth ``b[i]`` and death ``d[i]``.

    The sequences are extended by their last entries, so the chain lives on
    all of ``Z+``. A death at state 0 is a reflection and is folded into the
    stay probability.
    """

    b: Sequence[float]
    d: Sequence[float]
    description: str = ""
    family = "birth_death"

    def __post_init__(self):
        b = np.array(self.b, dtype=float)
        d = np.array(self.d, dtype=float)
        if b.ndim != 1 or b.size == 0 or b.shape != d.shape:
            raise InvalidParameter("b and d must be non-empty sequences of equal length")
        if np.any(b <= 0) or np.any(b > 1):
            raise InvalidParameter("birth probabilities must lie in (0, 1]")
        if np.any(d < 0):
            raise InvalidParameter("death probabilities must be non-negative")
        stay = 1.0 - b - d
        if np.any(stay < -TOL_ROW):
            bad = int(np.argmin(stay))
            raise InvalidParameter(f"b[{bad}] + d[{bad}] exceeds 1")
        b.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)
        if not self.description:
            object.__setattr__(self, "description", f"BirthDeath(len={b.size})")

    def births(self, n):
        idx = np.minimum(np.arange(n), self.b.size - 1)
        return self.b[idx]

    def deaths(self, n):
        idx = np.minimum(np.arange(n), self.d.size - 1)
        return self.d[idx]

    def _block(self, n):
        b = self.births(n + 1)
        d = self.deaths(n + 1)
        P = np.zeros((n + 1, n + 2))
        idx = np.arange(n + 1)
        P[idx, idx + 1] = b
        P[idx[1:], idx[1:] - 1] = d[1:]
        P[idx, idx] = 1.0 - b - np.where(idx > 0, d, 0.0)
        P[0, 0] = 1.0 - b[0]
        return np.clip(P, 0.0, None)

    def _row(self, i):
        bi = self.b[min(i, self.b.size - 1)]
        di = self.d[min(i, self.d.size - 1)] if i > 0 else 0.0
        r = np.zeros(i + 2)
        r[i + 1] = bi
        if i > 0:
            r[i - 1] = di
        r[i] = max(1.0 - bi - di, 0.0)
        return r


@dataclass(frozen=True, eq=False)
class ExplicitChain(SingleBirthChain):
    """A finite chain on ``0..n-1`` given by its rows.

    Rows may be shorter than ``n`` (zero padded). Every state but the last
    must have a positive up-step probability. Queries beyond the data raise
    :class:`StateOutOfRange`.
    """

    rows: Sequence[Sequence[float]]
    description: str = ""
    require_single_birth: bool = True
    family = "explicit"

    def __post_init__(self):
        rows = list(self.rows)
        n = len(rows)
        if n == 0:
            raise InvalidParameter("explicit chain needs at least one row")
        M = np.zeros((n, n))
        for i, r in enumerate(rows):
            r = np.asarray(r, dtype=float).ravel()
            if r.size > n and np.any(r[n:] != 0):
                raise InvalidParameter(f"row {i} puts mass outside states 0..{n - 1}")
            M[i, : min(n, r.size)] = r[:n]
        if np.any(M < 0):
            i = int(np.argwhere(M < 0)[0, 0])
            raise InvalidParameter(f"row {i} has a negative entry")
        sums = M.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > TOL_ROW * max(1, n))
        if bad.size:
            raise InvalidParameter(f"row {bad[0]} sums to {sums[bad[0]]!r}, not 1")
        if self.require_single_birth:
            upper = np.triu(M, k=2)
            if np.any(upper > 0):
                i = int(np.argwhere(upper > 0)[0, 0])
                raise InvalidParameter(f"row {i} jumps more than one level up")
            births = np.diagonal(M, offset=1)
            if np.any(births <= 0):
                i = int(np.flatnonzero(births <= 0)[0])
                raise InvalidParameter(f"row {i} has no up-step (P[{i}][{i + 1}] = 0)")
        M.setflags(write=False)
        object.__setattr__(self, "rows", M)
        object.__setattr__(self, "n_states", n)
        if not self.description:
            object.__setattr__(self, "description", f"Explicit({n} states)")

    @property
    def matrix(self) -> np.ndarray:
        return self.rows

    def _block(self, n):
        # rows of a general (non single-birth) matrix may reach every state
        P = np.zeros((n + 1, max(n + 2, self.n_states)))
        P[:, : self.n_states] = self.rows[: n + 1]
        return P


# ---------------------------------------------------------------------------
# stationary laws
# ---------------------------------------------------------------------------


def augmented_block(chain: SingleBirthChain, n: int, nu: np.ndarray | None = None) -> np.ndarray:
    """``(n+1) x (n+1)`` northwest truncation with the lost mass redistributed.

    ``nu`` defaults to a point mass at ``n`` (last-column augmentation).
    """
    P = chain.block(n)
    Q = P[:, : n + 1].copy()
    lost = P[n, n + 1]
    if nu is None:
        Q[n, n] += lost
    else:
        Q[n] += np.asarray(nu, dtype=float) * lost
    return Q


def _finite_stationary(Q: np.ndarray) -> np.ndarray:
    n = Q.shape[0] - 1
    if n == 0:
        return np.ones(1)
    cum = np.cumsum(Q, axis=1)
    birth = np.diagonal(Q, offset=1).copy()
    return kernels.cut_stationary(cum, birth)


def stationary(chain: SingleBirthChain, policy: TruncationPolicy | None = None) -> ProbVector:
    """Stationary law by adaptive last-column-augmented truncation.

    The window doubles until two successive truncations agree to within
    ``policy.tail_eps`` in L1. The result is cut where its remaining mass
    first drops to ``tail_eps``.

    Raises
    ------
    BudgetExceeded
        If ``policy.max_states`` is reached first, which usually signals a
        null-recurrent or very slowly decaying chain.
    """
    policy = policy or TruncationPolicy()
    if chain.is_finite:
        if chain.n_states > policy.max_states:
            raise BudgetExceeded(f"{chain.n_states} states exceed max_states")
        x = _finite_stationary(np.asarray(chain.matrix, dtype=float))
        return ProbVector(x, 0.0, meta={"method": "cut-equations", "states": chain.n_states})

    prev = None
    n = min(32, policy.max_states - 1)
    while True:
        x = _finite_stationary(augmented_block(chain, n))
        if prev is not None:
            change = np.abs(x[: prev.size] - prev).sum() + x[prev.size:].sum()
            if change < policy.tail_eps:
                break
        if n >= policy.max_states - 1:
            raise BudgetExceeded(
                f"truncations up to {n + 1} states did not settle to "
                f"tail_eps={policy.tail_eps:g}; chain may not be positive recurrent"
            )
        prev = x
        n = min(2 * n + 1, policy.max_states - 1)

    rev = np.cumsum(x[::-1])[::-1]
    # first W with mass on states >= W at most tail_eps
    W = int(np.argmax(rev <= policy.tail_eps)) if np.any(rev <= policy.tail_eps) else x.size
    W = max(W, 1)
    tail = float(rev[W]) if W < x.size else 0.0
    k = np.arange(W, x.size)
    moment = float((k + 1) @ x[W:])
    if x[-1] > 0:
        # mass beyond the solved window is of the order of its last entry
        extra = _geometric_tail_moment(x, float(x[-1]))
        moment += extra if math.isfinite(extra) else 0.0
    probs = x[:W] / (x[:W].sum() + tail)
    return ProbVector(
        probs,
        1.0 - probs.sum(),
        moment,
        {"method": "augmented-truncation", "states_solved": n + 1, "l1_change": float(change)},
    )


# ---------------------------------------------------------------------------
# structural predicates
# ---------------------------------------------------------------------------


def _tails(block: np.ndarray) -> np.ndarray:
    """``out[i, m] = sum_{k > m} block[i, k]`` accumulated from the right."""
    rev = np.cumsum(block[:, ::-1], axis=1)[:, ::-1]
    return np.concatenate([rev[:, 1:], np.zeros((block.shape[0], 1))], axis=1)


def _square_rows(chain: SingleBirthChain, horizon: int, width: int) -> np.ndarray:
    """Rows ``0..horizon`` on columns ``0..width``."""
    if chain.is_finite and chain.n_states - 1 < horizon:
        raise StateOutOfRange(
            f"horizon {horizon} exceeds finite chain with {chain.n_states} states"
        )
    B = chain.block(horizon)
    out = np.zeros((horizon + 1, width + 1))
    m = min(width + 1, B.shape[1])
    out[:, :m] = B[:, :m]
    return out


@dataclass(frozen=True)
class MonotonicityCertificate:
    """Outcome of a finite-horizon stochastic-monotonicity check."""

    holds: bool
    horizon: int
    worst_violation: float = 0.0

    def __bool__(self):
        return self.holds


def is_stochastically_monotone(
    chain: SingleBirthChain, horizon: int, tol: float = TOL_CMP
) -> MonotonicityCertificate:
    """Check that row ``i + 1`` stochastically dominates row ``i`` for ``i < horizon``."""
    if horizon < 1:
        raise InvalidParameter("horizon must be at least 1")
    if chain.is_finite:
        horizon = min(horizon, chain.n_states - 1)
    rows = _square_rows(chain, horizon, horizon + 1)
    T = _tails(rows)
    gap = T[1:] - T[:-1]
    worst = float(min(0.0, gap.min())) if gap.size else 0.0
    return MonotonicityCertificate(bool(worst >= -tol), horizon, -worst)


class Domination(enum.Enum):
    P_DOMINATES_Q = "PDominatesQ"
    Q_DOMINATES_P = "QDominatesP"
    NEITHER = "Neither"
    BOTH = "Both"


@dataclass(frozen=True)
class DominationCertificate:
    """Row-tail ordering between two chains over states ``0..horizon``."""

    relation: Domination
    horizon: int

    @property
    def ordered(self) -> bool:
        return self.relation is not Domination.NEITHER


def dominates(
    p_chain: SingleBirthChain, q_chain: SingleBirthChain, horizon: int, tol: float = TOL_CMP
) -> DominationCertificate:
    """Classify ``sum_{k>m} P[i][k]`` against ``sum_{k>m} Q[i][k]`` for ``i, m <= horizon``."""
    width = horizon + 1
    for c in (p_chain, q_chain):
        if c.is_finite:
            width = max(width, c.n_states - 1)
    TP = _tails(_square_rows(p_chain, horizon, width))[:, : horizon + 1]
    TQ = _tails(_square_rows(q_chain, horizon, width))[:, : horizon + 1]
    diff = TP - TQ
    p_ge = bool(diff.min() >= -tol)
    q_ge = bool(diff.max() <= tol)
    if p_ge and q_ge:
        rel = Domination.BOTH
    elif p_ge:
        rel = Domination.P_DOMINATES_Q
    elif q_ge:
        rel = Domination.Q_DOMINATES_P
    else:
        rel = Domination.NEITHER
    return DominationCertificate(rel, horizon)


def is_birth_death(chain: SingleBirthChain, horizon: int) -> bool:
    """True when no row below ``horizon`` reaches more than one level down."""
    if chain.is_finite:
        horizon = min(horizon, chain.n_states - 1)
    B = chain.block(horizon)
    low = np.tril(B[:, : horizon + 1], k=-2)
    return not np.any(low > 0)


def truncate_augment(chain: SingleBirthChain, n: int, nu: ProbVector) -> ExplicitChain:
    """Northwest ``(n+1) x (n+1)`` truncation, lost mass spread by ``nu``.

    The final row becomes ``Q[n][j] = P[n][j] + nu_j * P[n][n+1]``.
    """
    if n < 0:
        raise InvalidParameter("n must be non-negative")
    if nu.tail_mass > 0 or np.any(nu.probs[n + 1:] > 0):
        raise InvalidParameter(f"nu must be supported on 0..{n}")
    Q = augmented_block(chain, n, nu.padded(n + 1))
    return ExplicitChain(
        Q,
        description=f"{chain.description} truncated at {n}",
    )
