"""Brute-force ground truth at desk scale.

Nothing here shares code paths with the bound machinery: stationary laws of
finite chains come from a dense linear solve, marginals from repeated
vector-matrix products.

Total variation is on the ``sup_{|h| <= 1}`` scale throughout, i.e.
``sum_j |a_j - b_j|``, twice the usual half-L1 distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chains import ProbVector, SingleBirthChain
from .errors import BudgetExceeded, InvalidParameter, SingularSystem, WindowTooSmall
from .poisson import PoissonSolution, TestFunction

MAX_DENSE = 2000


def exact_stationary_finite(rows) -> ProbVector:
    """Unique ``x`` with ``x Q = x`` and ``sum(x) = 1`` for a finite irreducible ``Q``."""
    Q = np.asarray(rows, dtype=float)
    n = Q.shape[0]
    if Q.ndim != 2 or Q.shape[1] != n:
        raise InvalidParameter("rows must form a square matrix")
    if n > MAX_DENSE:
        raise BudgetExceeded(f"{n} states exceed the dense-solve limit of {MAX_DENSE}")
    A = Q.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        x = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(x)) or x.min() < -1e-10:
        raise SingularSystem("solution is not a probability vector; chain may be reducible")
    x = np.clip(x, 0.0, None)
    x /= x.sum()
    return ProbVector(x, 0.0, meta={"method": "dense-solve", "residual": float(np.abs(x @ Q - x).sum())})


@dataclass(frozen=True)
class MarginalTrace:
    """Laws of ``Z_0, ..., Z_{t_max}`` on states ``0..window``."""

    t_max: int
    laws: list
    window: int

    def mean(self, t: int) -> float:
        law = self.laws[t]
        return float(np.arange(len(law)) @ law.probs)


def iterate_marginals(
    chain: SingleBirthChain,
    t_max: int,
    window: int,
    initial: ProbVector | None = None,
    max_tail: float = 1e-8,
) -> MarginalTrace:
    """Exact marginals by ``law_{t+1} = law_t P`` on a fixed window.

    Mass that would leave ``0..window`` is moved to ``tail_mass`` and no
    longer tracked. The chain starts at 0 unless ``initial`` is given.
    """
    if t_max < 0 or window < 0:
        raise InvalidParameter("t_max and window must be non-negative")
    if chain.is_finite:
        window = min(window, chain.n_states - 1)
    B = chain.block(window)
    P = B[:, : window + 1]
    x = (ProbVector.point_mass(0) if initial is None else initial).padded(window + 1)
    tail = 0.0 if initial is None else initial.tail_mass + float(initial.probs[window + 1:].sum())
    laws = [ProbVector(x.copy(), tail)]
    for _ in range(t_max):
        leaving = float(x @ B[:, window + 1:].sum(axis=1)) if B.shape[1] > window + 1 else 0.0
        x = x @ P
        tail += leaving
        laws.append(ProbVector(x.copy(), 1.0 - x.sum()))
    if laws[-1].tail_mass > max_tail:
        raise WindowTooSmall(
            f"{laws[-1].tail_mass:.3g} of the mass escaped states 0..{window} by t={t_max}"
        )
    return MarginalTrace(t_max, laws, window)


def tv_bracket(a: ProbVector, b: ProbVector) -> tuple[float, float]:
    """Range of ``sum_j |a_j - b_j|`` consistent with both windows and tails.

    Entries are compared exactly up to the first state where either law
    becomes unknown (the start of a non-empty tail). Beyond it only the
    remaining masses are known, which pins the rest of the sum between
    their difference and their sum.
    """
    ka = len(a) if a.tail_mass > 0 else math.inf
    kb = len(b) if b.tail_mass > 0 else math.inf
    K = min(ka, kb)
    if K == math.inf:
        n = max(len(a), len(b))
        d = float(np.abs(a.padded(n) - b.padded(n)).sum())
        return d, d
    pa, pb = a.padded(K), b.padded(K)
    core = float(np.abs(pa - pb).sum())
    rest_a = max(0.0, 1.0 - float(pa.sum()))
    rest_b = max(0.0, 1.0 - float(pb.sum()))
    return core + abs(rest_a - rest_b), core + rest_a + rest_b


def exact_tv(a: ProbVector, b: ProbVector) -> float:
    """``sup_{|h| <= 1} |E h(a) - E h(b)| = sum_j |a_j - b_j|``.

    Exact when neither law has unassigned tail mass; otherwise the lower
    end of :func:`tv_bracket`, which is within the tail masses of the truth.
    """
    return tv_bracket(a, b)[0]


def mean_increment(chain: SingleBirthChain, trace: MarginalTrace, t: int) -> float:
    """``E Z_{t+1} - E Z_t`` from exact marginals."""
    if t + 1 > trace.t_max:
        raise InvalidParameter(f"trace stops at t={trace.t_max}")
    return trace.mean(t + 1) - trace.mean(t)


def verify_poisson(
    chain: SingleBirthChain, h: TestFunction, sol: PoissonSolution, upto: int | None = None
) -> float:
    """Largest residual ``|hhat(i) - (f(i) - sum_j P[i][j] f(j))|`` for ``i <= upto``.

    ``upto`` defaults to ``sol.window``, the last row whose neighbours are all
    covered by ``sol.f``.
    """
    J = sol.window if upto is None else upto
    if J > sol.window or sol.f.size < J + 2:
        raise WindowTooSmall(f"solution covers rows up to {sol.window} only")
    B = chain.block(J)[:, : J + 2]
    f = sol.f[: J + 2]
    hhat = h.array(J + 1) - sol.h_mean
    res = hhat - (f[: J + 1] - B @ f)
    return float(np.abs(res).max())
