"""Command-line front end: ``corrtrap {integrate,weights,convergence,exactness}``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, fields

import mpmath

from .bounds import ALEXIEWICZ, alexiewicz_norm, lp_norm_estimate
from .composite import CompositePlan, composite_apply, composite_bound
from .exactness import exactness_degree, reference_moments
from .expr import DomainError, ExprSyntaxError, parse
from .oracle import OracleConvergenceError, integrate, integrate_mp
from .polynomials import RuleFamily, monic_on_interval, reference_monic, to_fraction
from .rules import weight_table, weight_table_csv

__all__ = ["QuadratureReport", "main", "run_integrate", "run_convergence", "format_number"]

_REAL_FIELDS = ("estimate", "apriori_bound", "norm_estimate", "oracle_value", "true_error")


def format_number(x) -> str:
    """17 significant digits, enough to round-trip binary64."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class QuadratureReport:
    estimate: float
    family: str
    n: int
    m: int
    apriori_bound: float
    norm_used: str
    norm_estimate: float
    oracle_value: float | None = None
    true_error: float | None = None

    def __post_init__(self):
        if (self.oracle_value is None) != (self.true_error is None):
            raise ValueError("true_error is present exactly when oracle_value is")

    def to_json(self) -> str:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = format_number(v) if f.name in _REAL_FIELDS and v is not None else v
        return json.dumps(out)

    @classmethod
    def from_json(cls, text: str) -> "QuadratureReport":
        raw = json.loads(text)
        kw = {}
        for f in fields(cls):
            v = raw.get(f.name)
            kw[f.name] = float(v) if f.name in _REAL_FIELDS and v is not None else v
        return cls(**kw)

    def to_text(self) -> str:
        lines = []
        for k, v in asdict(self).items():
            if v is None:
                continue
            lines.append(f"{k}: {format_number(v) if k in _REAL_FIELDS else v}")
        return "\n".join(lines)


def _norm_label(family: RuleFamily) -> str:
    if family is RuleFamily.ALEXIEWICZ:
        return ALEXIEWICZ
    return "inf" if math.isinf(family.p) else str(int(family.p))


def run_integrate(f: str, a, b, n: int, family, m: int = 1, oracle: bool = False) -> QuadratureReport:
    e = parse(f)
    plan = CompositePlan(family, n, m, a, b)
    fa, fb = float(plan.a), float(plan.b)
    estimate = float(composite_apply(plan, e))
    if plan.family is RuleFamily.ALEXIEWICZ:
        norm = alexiewicz_norm(e, n, fa, fb)
        bound = composite_bound(plan, norm, ALEXIEWICZ)
    else:
        norm = lp_norm_estimate(e, n, plan.family.p, fa, fb)
        bound = composite_bound(plan, norm, plan.family.p)
    oracle_value = true_error = None
    if oracle:
        oracle_value = integrate(e, fa, fb, rel_tol=1e-13).value
        true_error = oracle_value - estimate
    return QuadratureReport(estimate, plan.family.value, n, m, bound, _norm_label(plan.family),
                            norm, oracle_value, true_error)


def run_convergence(f: str, a, b, n: int, family, mmax: int, dps: int = 40) -> list[tuple[int, object, str]]:
    """Rows ``(m, true_error, observed_order)`` for m = 1, 2, 4, ... <= mmax.

    Errors are measured in ``dps``-digit arithmetic so that orders remain
    visible below binary64 roundoff.
    """
    if mmax < 1:
        raise ValueError("mmax must be at least 1")
    e = parse(f)
    reference = integrate_mp(e, to_fraction(a), to_fraction(b), dps=dps)
    tiny = mpmath.mpf(10) ** (-(dps - 5))
    rows = []
    prev = None
    m = 1
    while m <= mmax:
        plan = CompositePlan(family, n, m, a, b)
        with mpmath.workdps(dps):
            err = reference - composite_apply(plan, e, dps=dps)
            exact = abs(err) <= tiny * max(1, abs(reference))
            if prev is None:
                order = ""
            elif exact and prev[1]:
                order = "exact"
            elif exact or prev[1]:
                order = "n/a"
            else:
                order = format_number(mpmath.log(abs(prev[0]) / abs(err), 2))
        rows.append((m, mpmath.mpf(0) if exact else err, order))
        prev = (err, exact)
        m *= 2
    return rows


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corrtrap", description="Corrected trapezoidal quadrature.")
    sub = parser.add_subparsers(dest="command", required=True)

    def family_arg(p):
        p.add_argument("--family", required=True, choices=[f.value for f in RuleFamily])

    p = sub.add_parser("integrate", help="integrate an expression with a composite rule")
    p.add_argument("--f", required=True, help="integrand in x, e.g. 'exp(x)*sin(x)'")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--n", required=True, type=int)
    family_arg(p)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--oracle", action="store_true", help="add a reference value and the true error")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
    fmt.add_argument("--text", dest="fmt", action="store_const", const="text")
    p.set_defaults(fmt="text")

    p = sub.add_parser("weights", help="exact weight table as CSV")
    family_arg(p)
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--a")
    p.add_argument("--b")

    p = sub.add_parser("convergence", help="true error and observed order as m doubles")
    p.add_argument("--f", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--n", required=True, type=int)
    family_arg(p)
    p.add_argument("--mmax", type=int, default=32)
    p.add_argument("--dps", type=int, default=40, help="working precision in decimal digits")

    p = sub.add_parser("exactness", help="degree of exactness and kernel moments")
    family_arg(p)
    p.add_argument("--n", required=True, type=int)
    return parser


def _real(text: str):
    # decimal strings are kept exact
    return to_fraction(text)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    out = sys.stdout
    try:
        if args.command == "integrate":
            report = run_integrate(args.f, _real(args.a), _real(args.b), args.n, args.family, args.m, args.oracle)
            out.write((report.to_json() if args.fmt == "json" else report.to_text()) + "\n")
        elif args.command == "weights":
            a = None if args.a is None else _real(args.a)
            b = None if args.b is None else _real(args.b)
            out.write(weight_table_csv(weight_table(args.family, args.n, a, b)))
        elif args.command == "convergence":
            rows = run_convergence(args.f, _real(args.a), _real(args.b), args.n, args.family, args.mmax, args.dps)
            out.write("m,error,order\n")
            for m, err, order in rows:
                out.write(f"{m},{format_number(err)},{order}\n")
        elif args.command == "exactness":
            _exactness(args.family, args.n, out)
    except (ExprSyntaxError, DomainError, ValueError, ArithmeticError, OracleConvergenceError) as exc:
        print(f"corrtrap: error: {exc}", file=sys.stderr)
        return 1
    return 0


def _exactness(family, n: int, out) -> None:
    if n < 1:
        raise ValueError("n must be at least 1")
    fam = RuleFamily.parse(family)
    degree = exactness_degree(monic_on_interval(fam, n, 0, 1))
    out.write(f"family: {fam.value}\nn: {n}\ndegree_of_exactness: {degree}\n")
    out.write("j,moment,vanishes\n")
    for j, mom in enumerate(reference_moments(reference_monic(fam, n), n + 1)):
        out.write(f"{j},{mom},{'yes' if mom == 0 else 'no'}\n")


if __name__ == "__main__":
    sys.exit(main())
