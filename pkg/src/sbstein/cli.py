"""Command-line front end.

Every command writes CSV (header row always present, floats as ``%.17g``)
to ``--out`` or standard output. Exit status is 0 on success, 1 when a bound
or invariant is violated and 2 on usage or configuration errors.

CSV schemas
-----------
convergence   t, r, bound, exact_tv, holds
compare       variant, domination, bound_general, bound_dominated, bound_bd, exact_tv, holds
truncation    n, bound_truncation, exact_tv, ratio, holds

``verify`` prints one ``PASS``/``FAIL`` line per check instead of CSV.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys

import numpy as np

from . import bounds, oracle, poisson
from .chains import (
    MM1Embedded,
    ProbVector,
    ReflectedSRW,
    TOL_CMP,
    TruncationPolicy,
    dominates,
    is_birth_death,
    is_stochastically_monotone,
    stationary,
    truncate_augment,
)
from .config import ConfigError, load_chain, load_test_function
from .errors import ChainError, InvalidParameter
from .poisson import TestFunction

CONVERGENCE_COLUMNS = ("t", "r", "bound", "exact_tv", "holds")
COMPARE_COLUMNS = (
    "variant", "domination", "bound_general", "bound_dominated", "bound_bd", "exact_tv", "holds",
)
TRUNCATION_COLUMNS = ("n", "bound_truncation", "exact_tv", "ratio", "holds")

STEIN_WINDOW = 150
VERIFY_WINDOW = 200
VERIFY_SAMPLES = 50


class UsageError(ChainError):
    pass


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def _emit(columns, rows, out) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])
    if out is None or out == "-":
        sys.stdout.write(buf.getvalue())
    else:
        with open(out, "w", newline="") as fh:
            fh.write(buf.getvalue())


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------


def stationary_law(chain, policy: TruncationPolicy) -> ProbVector:
    """Closed form when the family has one, dense solve for finite chains, else adaptive."""
    pi = chain.closed_form_stationary()
    if pi is not None:
        return pi
    if chain.is_finite:
        return oracle.exact_stationary_finite(chain.matrix)
    return stationary(chain, policy)


def stein_factor(chain, pi: ProbVector) -> poisson.SteinFactor:
    """Closed form when available; birth-death ratio; else the numerical supremum."""
    sf = poisson.closed_form_stein_factor(chain)
    if sf is not None:
        return sf
    if chain.is_finite:
        return poisson.stein_factor_numerical(chain, pi, max(chain.n_states - 2, 0))
    if is_birth_death(chain, len(pi)):
        return poisson.stein_factor_bd(chain, pi)
    return poisson.stein_factor_numerical(chain, pi, STEIN_WINDOW)


def _parse_r(text: str, lo: float, hi: float):
    """``opt`` | ``grid:K`` | comma-separated values."""
    if text == "opt":
        return "opt"
    if text.startswith("grid:"):
        k = int(text[5:])
        if k < 1:
            raise UsageError("grid needs at least one point")
        return list(bounds.r_grid(lo, hi, k))
    try:
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --r value {text!r}") from exc
    if not vals:
        raise UsageError("empty r grid")
    return vals


def _parse_nu(text: str, n: int) -> ProbVector:
    if text == "uniform":
        return ProbVector(np.full(n + 1, 1.0 / (n + 1)))
    if text.startswith("point:"):
        arg = text[6:]
        k = n if arg == "n" else int(arg)
        if not 0 <= k <= n:
            raise UsageError(f"point mass at {k} lies outside 0..{n}")
        return ProbVector.point_mass(k)
    raise UsageError(f"bad --nu value {text!r}; expected point:k, point:n or uniform")


def _range(lo: int, hi: int, name: str) -> range:
    if hi < lo:
        raise UsageError(f"empty {name} grid: {lo}..{hi}")
    if lo < 0:
        raise UsageError(f"{name} must be non-negative")
    return range(lo, hi + 1)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def run_convergence(chain, t_values, r_text, delta_mean, policy, tol) -> list[dict]:
    t_values = list(t_values)
    if not t_values:
        raise UsageError("empty t grid")
    t_max = max(t_values)
    pi = stationary_law(chain, policy)
    window = max(t_max + 2, len(pi))
    trace = oracle.iterate_marginals(chain, t_max + 1, window)
    exact = [oracle.exact_tv(trace.laws[t], pi) for t in range(t_max + 1)]

    coupling = None
    if delta_mean == "coupling":
        if isinstance(chain, ReflectedSRW):
            coupling = (bounds.srw_convergence_bound, chain.p, *bounds.srw_admissible_r(chain.p))
        elif isinstance(chain, MM1Embedded):
            coupling = (bounds.mm1_convergence_bound, chain.rho, *bounds.mm1_admissible_r(chain.rho))
        else:
            raise UsageError("no coupling formula for this chain; use --delta-mean oracle")

    rows = []
    if coupling is not None:
        fn, param, lo, hi = coupling
        r_vals = _parse_r(r_text, lo, hi)
        for t in t_values:
            reps = [bounds.optimal_r(fn, param, t, lo, hi)] if r_vals == "opt" else [
                fn(param, t, r) for r in r_vals
            ]
            for rep in reps:
                rep = rep.check(exact[t], tol)
                rows.append(dict(t=t, r=rep.components["rate_r"], bound=rep.bound_value,
                                 exact_tv=exact[t], holds=rep.holds))
        return rows

    sf = stein_factor(chain, pi)
    cert = is_stochastically_monotone(chain, window)
    for t in t_values:
        dm = max(oracle.mean_increment(chain, trace, t), 0.0)
        rep = bounds.corollary1_bound(chain, sf, dm, cert).check(exact[t], tol)
        rows.append(dict(t=t, r=None, bound=rep.bound_value, exact_tv=exact[t], holds=rep.holds))
    return rows


def run_compare(p_chain, q_chain, policy, tol) -> list[dict]:
    pi = stationary_law(p_chain, policy)
    x = stationary_law(q_chain, policy)
    exact = oracle.exact_tv(x, pi)
    horizon = max(len(x), len(pi))
    for c in (p_chain, q_chain):
        if c.is_finite:
            horizon = min(horizon, c.n_states - 1)
    cert = dominates(p_chain, q_chain, horizon)

    bd = None
    if is_birth_death(p_chain, horizon) and is_birth_death(q_chain, horizon):
        bd = bounds.bd_comparison_bound(p_chain, q_chain, x, pi).bound_value

    closed = poisson.closed_form_stein_factor(p_chain)
    if closed is not None:
        variants = [("closed_form", closed), ("numerical", _numerical_sf(p_chain, pi))]
    else:
        variants = [("default", stein_factor(p_chain, pi))]

    rows = []
    for name, sf in variants:
        general = bounds.corollary2_general(p_chain, sf, q_chain, x).bound_value
        dom = bounds.corollary2_dominated(p_chain, sf, x, cert).bound_value if cert.ordered else None
        present = [b for b in (general, dom, bd) if b is not None]
        rows.append(dict(
            variant=f"{name}:{sf.method.value}",
            domination=cert.relation.value,
            bound_general=general,
            bound_dominated=dom,
            bound_bd=bd,
            exact_tv=exact,
            holds=all(b + tol >= exact for b in present),
        ))
    return rows


def _numerical_sf(chain, pi):
    J = max(chain.n_states - 2, 0) if chain.is_finite else STEIN_WINDOW
    return poisson.stein_factor_numerical(chain, pi, J)


def run_truncation(chain, n_values, nu_text, policy, tol) -> list[dict]:
    n_values = list(n_values)
    if not n_values:
        raise UsageError("empty n grid")
    pi = stationary_law(chain, policy)
    sf = stein_factor(chain, pi)
    rows = []
    for n in n_values:
        nu = _parse_nu(nu_text, n)
        Q = truncate_augment(chain, n, nu)
        x = oracle.exact_stationary_finite(Q.matrix)
        rep = bounds.truncation_bound(chain, sf, n, nu, x)
        exact = oracle.exact_tv(x, pi)
        rep = rep.check(exact, tol)
        ratio = rep.bound_value / exact if exact > 0 else math.inf
        rows.append(dict(n=n, bound_truncation=rep.bound_value, exact_tv=exact,
                         ratio=ratio, holds=rep.holds))
    return rows


def default_suite():
    return [ReflectedSRW(p) for p in (0.6, 0.75, 0.9)] + [MM1Embedded(r) for r in (0.3, 0.5, 0.8)]


def run_verify(chains, policy, tol, h_extra: TestFunction | None = None, seed: int = 0):
    """Yield ``(name, passed, detail)`` for each check."""
    rng = np.random.default_rng(seed)
    for chain in chains:
        label = chain.description
        pi = stationary_law(chain, policy)

        if chain.is_finite:
            J = chain.n_states - 2
            if J < 0:
                raise UsageError("verify needs at least two states")
        else:
            J = VERIFY_WINDOW
        hs = [TestFunction.from_array(rng.uniform(-1, 1, J + 2), 0.0, 1.0)
              for _ in range(VERIFY_SAMPLES)]
        if h_extra is not None:
            hs.append(h_extra)
        worst = 0.0
        for h in hs:
            sol = poisson.solve_poisson(chain, h, pi, J)
            worst = max(worst, oracle.verify_poisson(chain, h, sol))
        yield (f"{label}: Poisson residual", worst <= poisson.TOL_POISSON, f"max {worst:.3g}")

        res = bounds.residual_l1(chain, pi)
        yield (f"{label}: stationary residual", res <= 1e-10 + pi.tail_mass, f"{res:.3g}")

        closed = poisson.closed_form_stein_factor(chain)
        if closed is not None:
            Jn = STEIN_WINDOW
            num = poisson.stein_factor_numerical(chain, pi, Jn, Jn)
            ok = num.value <= closed.value + 1e-6
            yield (f"{label}: Stein factor dominance", ok,
                   f"numerical {num.value:.12g} vs closed {closed.value:.12g}")

        cert = is_stochastically_monotone(chain, 1 if chain.is_finite and chain.n_states < 2 else J)
        if isinstance(chain, (ReflectedSRW, MM1Embedded)):
            yield (f"{label}: monotonicity certificate", cert.holds, f"horizon {cert.horizon}")
        else:
            print(f"INFO {label}: stochastically monotone up to {cert.horizon}: {cert.holds}")


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    common.add_argument("--tail-eps", type=float, default=TruncationPolicy.tail_eps,
                        help="stationary-law truncation tolerance")
    common.add_argument("--max-states", type=int, default=TruncationPolicy.max_states,
                        help="hard cap on the stationary-law window")
    common.add_argument("--tol", type=float, default=TOL_CMP,
                        help="slack allowed when comparing a bound with the exact value")

    parser = argparse.ArgumentParser(
        prog="sbstein",
        description="Stein-method bounds for single-birth Markov chains, checked against exact values.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__.split("CSV schemas", 1)[1].join(["CSV schemas", ""]),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convergence", parents=[common],
                       help="distance to stationarity from state 0; columns: " + ", ".join(CONVERGENCE_COLUMNS))
    p.add_argument("--chain", required=True)
    p.add_argument("--t0", type=int, default=0)
    p.add_argument("--t1", type=int, default=30)
    p.add_argument("--r", default="opt", help="opt, grid:K or comma-separated values")
    p.add_argument("--delta-mean", choices=("coupling", "oracle"), default="coupling",
                   help="mean-increment source: built-in coupling or exact marginals")

    p = sub.add_parser("compare", parents=[common],
                       help="P's stationary law against Q's; columns: " + ", ".join(COMPARE_COLUMNS))
    p.add_argument("--chain", required=True, help="chain P")
    p.add_argument("--chain2", required=True, help="chain Q; X is its stationary law")

    p = sub.add_parser("truncation", parents=[common],
                       help="augmented truncation error; columns: " + ", ".join(TRUNCATION_COLUMNS))
    p.add_argument("--chain", required=True)
    p.add_argument("--n0", type=int, default=3)
    p.add_argument("--n1", type=int, default=10)
    p.add_argument("--nu", default="point:n", help="point:k, point:n (the cut level) or uniform")

    p = sub.add_parser("verify", parents=[common], help="invariant suite, one PASS/FAIL line per check")
    p.add_argument("--chain", default=None, help="chain to check (default: built-in suite)")
    p.add_argument("--test-function", default=None, help="extra test function document")
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        policy = TruncationPolicy(args.tail_eps, args.max_states)
        if args.command == "convergence":
            chain = load_chain(args.chain)
            rows = run_convergence(chain, _range(args.t0, args.t1, "t"), args.r,
                                   args.delta_mean, policy, args.tol)
            _emit(CONVERGENCE_COLUMNS, rows, args.out)
        elif args.command == "compare":
            rows = run_compare(load_chain(args.chain), load_chain(args.chain2), policy, args.tol)
            _emit(COMPARE_COLUMNS, rows, args.out)
        elif args.command == "truncation":
            chain = load_chain(args.chain)
            rows = run_truncation(chain, _range(args.n0, args.n1, "n"), args.nu, policy, args.tol)
            _emit(TRUNCATION_COLUMNS, rows, args.out)
        else:
            chains = default_suite() if args.chain is None else [load_chain(args.chain)]
            h = None if args.test_function is None else load_test_function(args.test_function)
            ok = True
            for name, passed, detail in run_verify(chains, policy, args.tol, h, args.seed):
                print(f"{'PASS' if passed else 'FAIL'} {name} ({detail})")
                ok &= passed
            return 0 if ok else 1
    except (UsageError, ConfigError, InvalidParameter) as exc:
        print(f"sbstein: error: {exc}", file=sys.stderr)
        return 2
    except ChainError as exc:
        print(f"sbstein: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"sbstein: error: {exc}", file=sys.stderr)
        return 2
    return 0 if all(r["holds"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
