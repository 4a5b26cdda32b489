"""Time the compiled kernels against the numpy fallback.

Run with ``python benchmarks/bench_kernels.py [--sizes 100,200,400]``.
"""

import argparse
import timeit

import numpy as np

from sbstein import MM1Embedded, ReflectedSRW
from sbstein import _pykernels as py

try:
    from sbstein import _ckernels as cy
except ImportError:
    cy = None


def _inputs(chain, n):
    q = chain.block(n)[:, : n + 1]
    q[:, n] += 1.0 - q.sum(axis=1)
    cum = np.cumsum(q, axis=1)
    birth = np.diagonal(q, offset=1).copy()
    rhs = np.random.default_rng(0).uniform(-1, 1, (n + 1, 1))
    return q, cum, birth, rhs


def _time(fn, *args, repeat=5):
    number = max(1, int(0.2 / max(timeit.timeit(lambda: fn(*args), number=1), 1e-6)))
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="100,200,400")
    args = ap.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]

    print(f"{'chain':<22}{'kernel':<20}{'n':>6}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for chain in (ReflectedSRW(0.75), MM1Embedded(0.5)):
        for n in sizes:
            q, cum, birth, rhs = _inputs(chain, n)
            cases = {
                "cut_stationary": (cum, birth),
                "ul_poisson_solve": (q, rhs),
                "forward_increments": (cum, birth[: n], rhs[: n]),
            }
            for name, args_ in cases.items():
                tp = _time(getattr(py, name), *args_)
                if cy is None:
                    tc, speed = float("nan"), "n/a"
                else:
                    tc = _time(getattr(cy, name), *args_)
                    speed = f"{tp / tc:.1f}x"
                print(f"{chain.description:<22}{name:<20}{n:>6}{tp * 1e3:>12.3f}"
                      f"{tc * 1e3:>12.3f}{speed:>10}")


if __name__ == "__main__":
    main()
