"""Single-interval corrected trapezoidal rules.

Two independent routes to the same numbers:

* :func:`weights` / :func:`apply` use the closed-form weights of each
  family, acting on ``f^(k)(a) + (-1)^k f^(k)(b)``;
* :func:`generic_rule` evaluates the boundary sum from integration by
  parts for an arbitrary monic kernel.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import mpmath

from .expr import Expr, Jet, jet_eval, parse
from .oracle import integrate, integrate_mp
from .polynomials import (
    Polynomial,
    RuleFamily,
    ScaledMonic,
    endpoint_derivative,
    to_fraction,
)

__all__ = [
    "RuleFamily",
    "RuleWeights",
    "EndpointJet",
    "weight_coefficients",
    "weights",
    "apply",
    "generic_rule",
    "estimate_error_term",
    "endpoint_jets",
    "polynomial_jet",
    "polynomial_jets",
    "weight_table",
    "weight_table_csv",
]


def _fact(k: int) -> int:
    return math.factorial(k)


def weight_coefficients(family: RuleFamily | str, n: int) -> tuple[tuple[Fraction, ...], Fraction | None]:
    """Exact weights per power of ``(b - a)``.

    Returns ``(c, extra)`` with ``w[k] = c[k] (b-a)^(k+1)`` and, for the
    Alexiewicz family, ``extra`` multiplying ``(b-a)^n f^(n-1)(a)``
    (zero for even ``n``). ``extra`` is ``None`` for the Lebesgue families.
    """
    family = RuleFamily.parse(family)
    if n < 1:
        raise ValueError("rule order n must be at least 1")
    c = []
    for k in range(n):
        if family is RuleFamily.L2:
            v = Fraction(_fact(n) * _fact(2 * n - k - 1), _fact(2 * n) * _fact(n - k - 1) * _fact(k + 1))
        elif family is RuleFamily.LINF:
            v = Fraction(_fact(2 * n - k) * _fact(n - k - 1),
                         _fact(n) * 2 ** (2 * k + 2) * _fact(2 * n - 2 * k - 1) * _fact(k + 1))
        elif family is RuleFamily.ALEXIEWICZ and k == n - 1:
            v = Fraction(0)
        else:
            v = Fraction(_fact(2 * n - k - 2) * _fact(n - k - 1),
                         _fact(n - 1) * 2 ** (2 * k + 1) * _fact(2 * n - 2 * k - 2) * _fact(k + 1))
        c.append(v)
    extra = None
    if family is RuleFamily.ALEXIEWICZ:
        extra = Fraction(1, _fact(n) * 2 ** (2 * n - 2)) if n % 2 else Fraction(0)
    return tuple(c), extra


def _sharp_coeff(family: RuleFamily, n: int, h: float) -> float:
    if family is RuleFamily.L1:
        return h**n / (2 ** (2 * n - 1) * _fact(n))
    if family is RuleFamily.L2:
        return _fact(n) * h ** (n + 0.5) / (math.sqrt(2 * n + 1) * _fact(2 * n))
    if family is RuleFamily.LINF:
        return h ** (n + 1) / (2 ** (2 * n) * _fact(n))
    return h**n / (_fact(n - 1) * 2 ** (2 * n - 2))


@dataclass(frozen=True)
class RuleWeights:
    """Weights of one rule on one interval.

    ``w[k]`` multiplies ``f^(k)(a) + (-1)^k f^(k)(b)``; ``extra`` (Alexiewicz
    only) multiplies ``f^(n-1)(a)``. ``sharp_coeff`` is the coefficient of
    the derivative norm in the family's sharp error bound.
    """

    n: int
    family: RuleFamily
    a: Fraction
    b: Fraction
    w_exact: tuple[Fraction, ...]
    extra_exact: Fraction | None
    sharp_coeff: float

    @property
    def w(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.w_exact)

    @property
    def extra(self) -> float | None:
        return None if self.extra_exact is None else float(self.extra_exact)


def weights(family: RuleFamily | str, n: int, a, b) -> RuleWeights:
    family = RuleFamily.parse(family)
    fa, fb = to_fraction(a), to_fraction(b)
    if not fa < fb:
        raise ValueError(f"invalid interval: need a < b, got a={a}, b={b}")
    c, extra = weight_coefficients(family, n)
    h = fb - fa
    w = tuple(ck * h ** (k + 1) for k, ck in enumerate(c))
    extra_w = None if extra is None else extra * h**n
    return RuleWeights(n, family, fa, fb, w, extra_w, _sharp_coeff(family, n, float(h)))


@dataclass(frozen=True)
class EndpointJet:
    at_a: Jet
    at_b: Jet

    @property
    def order(self) -> int:
        return min(self.at_a.order, self.at_b.order)


def _converter(sample):
    """Map an exact Fraction into the arithmetic of ``sample``."""
    if isinstance(sample, (Fraction, int)) and not isinstance(sample, bool):
        return lambda q: q
    if isinstance(sample, mpmath.mpf):
        return lambda q: mpmath.mpf(q.numerator) / q.denominator
    return float


def apply(rw: RuleWeights, jets: EndpointJet):
    """Evaluate the closed-form rule on endpoint derivatives."""
    n = rw.n
    if jets.order < n - 1:
        raise ValueError(f"rule of order {n} needs jets of order {n - 1}, got {jets.order}")
    da, db = jets.at_a.derivatives(), jets.at_b.derivatives()
    conv = _converter(da[0])
    total = 0
    for k in range(n):
        bracket = da[k] + db[k] if k % 2 == 0 else da[k] - db[k]
        total = total + conv(rw.w_exact[k]) * bracket
    if rw.extra_exact is not None and rw.extra_exact != 0:
        total = total + conv(rw.extra_exact) * da[n - 1]
    return total


def generic_rule(phi: ScaledMonic, jets: EndpointJet):
    """Boundary sum from repeated integration by parts against ``phi``."""
    n = phi.n
    if jets.order < n - 1:
        raise ValueError(f"kernel of degree {n} needs jets of order {n - 1}, got {jets.order}")
    da, db = jets.at_a.derivatives(), jets.at_b.derivatives()
    conv = _converter(da[0])
    total = 0
    for k in range(n):
        m = n - k - 1
        pa = endpoint_derivative(phi, m, "a")
        pb = endpoint_derivative(phi, m, "b")
        sign = 1 if (n - k - 1) % 2 == 0 else -1
        total = total + sign * (conv(pa) * da[k] - conv(pb) * db[k])
    scale = Fraction((-1) ** n, _fact(n))
    return conv(scale) * total


def estimate_error_term(phi: ScaledMonic, e: Expr | str, rel_tol: float = 1e-10, dps: int | None = None):
    """``E_n(f) = (-1)^n/n! * integral of f^(n) phi`` by oracle quadrature.

    With ``dps`` the integral is taken in extended precision.
    """
    if isinstance(e, str):
        e = parse(e)
    n = phi.n
    scale = (-1) ** n / _fact(n)
    if dps is not None:
        with mpmath.workdps(dps):
            def g(x):
                return jet_eval(e, x, n).derivative(n) * phi.poly(x)

            val = integrate_mp(g, phi.a, phi.b, dps=dps)
            return val * (-1) ** n / _fact(n)

    def gf(x):
        return jet_eval(e, x, n).derivative(n) * phi.poly(x)

    return scale * integrate(gf, float(phi.a), float(phi.b), rel_tol=rel_tol).value


def endpoint_jets(e: Expr | str, a, b, order: int, dps: int | None = None) -> EndpointJet:
    """Jets of ``e`` at both endpoints (in extended precision with ``dps``)."""
    if isinstance(e, str):
        e = parse(e)
    if dps is None:
        return EndpointJet(jet_eval(e, float(a), order), jet_eval(e, float(b), order))
    with mpmath.workdps(dps):
        return EndpointJet(jet_eval(e, _to_mpf(a), order), jet_eval(e, _to_mpf(b), order))


def _to_mpf(v):
    q = to_fraction(v)
    return mpmath.mpf(q.numerator) / q.denominator


def polynomial_jet(poly: Polynomial, point, order: int) -> Jet:
    """Exact jet of a polynomial at a rational point."""
    p = to_fraction(point)
    vals = []
    d = poly
    for _ in range(order + 1):
        vals.append(d(p))
        d = d.derivative()
    return Jet(p, order, tuple(v / _fact(k) for k, v in enumerate(vals)))


def polynomial_jets(poly: Polynomial, a, b, order: int) -> EndpointJet:
    return EndpointJet(polynomial_jet(poly, a, order), polynomial_jet(poly, b, order))


def weight_table(family: RuleFamily | str, n: int, a=None, b=None) -> list[dict]:
    """Rows ``family, n, k, numerator, denominator, power_of_(b-a)``.

    Without an interval the coefficient of ``(b-a)^power`` is listed; with
    ``a`` and ``b`` the exact weight itself (power 0). The Alexiewicz
    endpoint term appears as ``k = "extra"``.
    """
    family = RuleFamily.parse(family)
    c, extra = weight_coefficients(family, n)
    h = None
    if a is not None or b is not None:
        if a is None or b is None:
            raise ValueError("give both a and b, or neither")
        fa, fb = to_fraction(a), to_fraction(b)
        if not fa < fb:
            raise ValueError(f"invalid interval: need a < b, got a={a}, b={b}")
        h = fb - fa
    rows = []
    last = n - 1 if family is RuleFamily.ALEXIEWICZ else n
    for k in range(last):
        rows.append(_row(family, n, k, c[k], k + 1, h))
    if extra is not None:
        rows.append(_row(family, n, "extra", extra, n, h))
    return rows


def _row(family, n, k, coeff: Fraction, power: int, h):
    if h is not None:
        coeff, power = coeff * h**power, 0
    return {
        "family": family.value,
        "n": n,
        "k": k,
        "numerator": coeff.numerator,
        "denominator": coeff.denominator,
        "power_of_(b-a)": power,
    }


CSV_COLUMNS = ("family", "n", "k", "numerator", "denominator", "power_of_(b-a)")


def weight_table_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()
