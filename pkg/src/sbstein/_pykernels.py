"""Pure numpy implementations of the hot loops.

Each function here has a compiled twin in ``_ckernels.pyx`` with the same
signature and semantics; :mod:`sbstein.kernels` picks one at import time.
"""

import numpy as np

# rescale threshold for the unnormalized cut recursion
_BIG = 1e250


def cut_stationary(cum, birth):
    """Stationary vector of a finite single-birth chain via cut equations.

    Parameters
    ----------
    cum : ndarray, shape (n+1, n+1)
        ``cum[i, j] = sum_{k <= j} Q[i, k]``.
    birth : ndarray, shape (n,)
        Up-step probabilities ``Q[j, j+1]`` for ``j < n``; all positive.

    Returns
    -------
    ndarray, shape (n+1,)
        Normalized stationary vector.

    Notes
    -----
    Balancing the flow across the cut between ``j`` and ``j+1`` gives
    ``x[j] Q[j, j+1] = sum_{i > j} x[i] cum[i, j]``. Starting from
    ``x[n] = 1`` every update is a sum of non-negative terms, so there is no
    cancellation.
    """
    cum = np.asarray(cum, dtype=float)
    birth = np.asarray(birth, dtype=float)
    n = cum.shape[0] - 1
    x = np.zeros(n + 1)
    x[n] = 1.0
    for j in range(n - 1, -1, -1):
        v = x[j + 1:] @ cum[j + 1:, j] / birth[j]
        x[j] = v
        if v > _BIG:
            x[j:] /= v
    return x / x.sum()


def ul_poisson_solve(q, rhs):
    """Solve Poisson's equation on a finite single-birth chain, ``f(0) = 0``.

    Solves ``f(i) - sum_k q[i, k] f(k) = rhs[i]`` for ``i = 1..N`` with
    ``f(0) = 0``. The lower-Hessenberg system is reduced from the bottom row
    upward (an UL elimination) with diagonals recomputed from row leaks, so
    no subtraction ever happens in the reduction.

    Parameters
    ----------
    q : ndarray, shape (N+1, N+1)
        Stochastic, single-birth (``q[i, k] = 0`` for ``k > i+1``).
    rhs : ndarray, shape (N+1, r)
        Right-hand sides; row 0 is ignored.

    Returns
    -------
    ndarray, shape (N+1, r)
    """
    q = np.asarray(q, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    N = q.shape[0] - 1
    r = np.zeros_like(q)
    d = np.zeros(N + 1)
    leak = np.zeros(N + 1)
    y = np.array(rhs, dtype=float, copy=True)

    r[N, 1:N] = q[N, 1:N]
    leak[N] = q[N, 0]
    d[N] = leak[N] + r[N, 1:N].sum()
    for i in range(N - 1, 0, -1):
        c = q[i, i + 1] / d[i + 1]
        r[i, 1:i] = q[i, 1:i] + c * r[i + 1, 1:i]
        leak[i] = q[i, 0] + c * leak[i + 1]
        d[i] = leak[i] + r[i, 1:i].sum()
        y[i] += c * y[i + 1]

    f = np.zeros_like(y)
    for i in range(1, N + 1):
        f[i] = (y[i] + r[i, 1:i] @ f[1:i]) / d[i]
    return f


def forward_increments(cum, birth, rhs):
    """Literal forward increment recursion.

    ``m[0] = rhs[0] / birth[0]`` and
    ``m[j] = (rhs[j] + sum_{k<j} m[k] cum[j, k]) / birth[j]``.

    Exact in exact arithmetic but errors grow like the expected up-crossing
    time, so only trustworthy over short windows.
    """
    cum = np.asarray(cum, dtype=float)
    birth = np.asarray(birth, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    J = rhs.shape[0] - 1
    m = np.zeros_like(rhs)
    m[0] = rhs[0] / birth[0]
    for j in range(1, J + 1):
        m[j] = (rhs[j] + cum[j, :j] @ m[:j]) / birth[j]
    return m
