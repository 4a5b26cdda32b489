"""Backend selection for the numerical kernels.

The compiled extension is used when it has been built; otherwise the numpy
versions are used. Set ``SBSTEIN_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("SBSTEIN_PURE_PYTHON"):
    from ._pykernels import cut_stationary, forward_increments, ul_poisson_solve

    BACKEND = "python"
else:
    try:
        from ._ckernels import cut_stationary, forward_increments, ul_poisson_solve

        BACKEND = "cython"
    except ImportError:
        from ._pykernels import cut_stationary, forward_increments, ul_poisson_solve

        BACKEND = "python"

__all__ = ["BACKEND", "cut_stationary", "forward_increments", "ul_poisson_solve"]
