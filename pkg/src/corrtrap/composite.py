"""Composite corrected trapezoidal rules on uniform partitions."""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .bounds import ALEXIEWICZ, conjugate, family_constant
from .expr import Expr, Jet, jet_eval, parse
from .polynomials import RuleFamily, reference_endpoint_derivative, to_fraction
from .rules import EndpointJet, apply, weights

__all__ = ["CompositePlan", "composite_apply", "naive_apply", "composite_bound", "node_jets"]


@dataclass(frozen=True)
class CompositePlan:
    family: RuleFamily
    n: int
    m: int
    a: Fraction
    b: Fraction

    def __init__(self, family, n: int, m: int, a, b):
        fa, fb = to_fraction(a), to_fraction(b)
        if not fa < fb:
            raise ValueError(f"invalid interval: need a < b, got a={a}, b={b}")
        if n < 1:
            raise ValueError("n must be at least 1")
        if m < 1:
            raise ValueError("m must be at least 1")
        object.__setattr__(self, "family", RuleFamily.parse(family))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "a", fa)
        object.__setattr__(self, "b", fb)

    @property
    def nodes(self) -> tuple[Fraction, ...]:
        return tuple(self.a + (self.b - self.a) * i / self.m for i in range(self.m + 1))

    def telescoped_coefficients(self):
        """``(even, odd, extra)`` exact coefficients of the telescoped form.

        ``even[l]`` multiplies ``f^(2l)(a) + f^(2l)(b) + 2 * interior sum``;
        ``odd[l]`` multiplies ``f^(2l-1)(a) - f^(2l-1)(b)`` (index from 1);
        ``extra`` multiplies the left-node sum of ``f^(n-1)`` (Alexiewicz,
        odd n) and is zero otherwise.
        """
        n, fam = self.n, self.family
        h = (self.b - self.a) / (2 * self.m)
        nf = math.factorial(n)
        # the Alexiewicz kernel is symmetric only in derivatives of order >= 1
        kmax = n - 2 if fam is RuleFamily.ALEXIEWICZ else n - 1
        even = {}
        odd = {}
        for k in range(kmax + 1):
            c = reference_endpoint_derivative(fam, n, n - k - 1) * h ** (k + 1) / nf
            if k % 2 == 0:
                even[k // 2] = c
            else:
                odd[(k + 1) // 2] = c
        extra = Fraction(0)
        if fam is RuleFamily.ALEXIEWICZ and n % 2 == 1:
            extra = ((self.b - self.a) / self.m) ** n / (nf * 2 ** (2 * n - 2))
        return even, odd, extra


def node_jets(plan: CompositePlan, e: Expr, dps: int | None = None) -> list[Jet]:
    """Order ``n-1`` jets at every node, computed once."""
    order = plan.n - 1
    if dps is None:
        xs = np.array([float(x) for x in plan.nodes])
        big = jet_eval(e, xs, order)
        return [Jet(float(x), order, tuple(_item(c, i) for c in big.taylor)) for i, x in enumerate(xs)]
    with mpmath.workdps(dps):
        return [jet_eval(e, mpmath.mpf(x.numerator) / x.denominator, order) for x in plan.nodes]


def _item(c, i):
    return float(c[i]) if np.ndim(c) else float(c)


def _conv(sample):
    if isinstance(sample, mpmath.mpf):
        return lambda q: mpmath.mpf(q.numerator) / q.denominator
    return float


def composite_apply(plan: CompositePlan, e: Expr | str, dps: int | None = None):
    """Telescoped composite rule; extended precision with ``dps``."""
    if isinstance(e, str):
        e = parse(e)
    jets = node_jets(plan, e, dps)
    ctx = mpmath.workdps(dps) if dps is not None else contextlib.nullcontext()
    with ctx:
        return _telescoped(plan, jets)


def _telescoped(plan: CompositePlan, jets: list[Jet]):
    even, odd, extra = plan.telescoped_coefficients()
    ders = [j.derivatives() for j in jets]
    conv = _conv(ders[0][0])
    total = 0
    for l, c in even.items():
        k = 2 * l
        s = ders[0][k] + ders[-1][k]
        inner = 0
        for d in ders[1:-1]:
            inner = inner + d[k]
        total = total + conv(c) * (s + 2 * inner)
    for l, c in odd.items():
        k = 2 * l - 1
        total = total + conv(c) * (ders[0][k] - ders[-1][k])
    if extra:
        k = plan.n - 1
        left = 0
        for d in ders[:-1]:
            left = left + d[k]
        total = total + conv(extra) * left
    return total


def naive_apply(plan: CompositePlan, e: Expr | str, dps: int | None = None):
    """Sum of single-interval rules; the validation path for the telescoped form."""
    if isinstance(e, str):
        e = parse(e)
    jets = node_jets(plan, e, dps)
    nodes = plan.nodes
    ctx = mpmath.workdps(dps) if dps is not None else contextlib.nullcontext()
    with ctx:
        total = 0
        for i in range(plan.m):
            rw = weights(plan.family, plan.n, nodes[i], nodes[i + 1])
            total = total + apply(rw, EndpointJet(jets[i], jets[i + 1]))
        return total


def composite_bound(plan: CompositePlan, norm_value: float, p) -> float:
    """A-priori error bound of the composite rule.

    ``p`` is a Lebesgue exponent in [1, inf] for the Lebesgue families (the
    family's own kernel is used, so for other exponents this is a valid
    Hölder bound rather than a sharp one) or ``"alexiewicz"``.
    """
    if norm_value < 0:
        raise ValueError("norm_value must be non-negative")
    n, m = plan.n, plan.m
    h = float(plan.b - plan.a)
    if isinstance(p, str):
        if p.lower() not in (ALEXIEWICZ, "alex"):
            raise ValueError(f"invalid norm {p!r}")
        if plan.family is not RuleFamily.ALEXIEWICZ:
            raise ValueError("the Alexiewicz norm pairs with the Alexiewicz family")
        return norm_value * h**n / (m ** (n - 1) * math.factorial(n - 1) * 2 ** (2 * n - 2))
    if plan.family is RuleFamily.ALEXIEWICZ:
        raise ValueError("the Alexiewicz family is bounded in the Alexiewicz norm")
    q = conjugate(p)
    inv_q = 0.0 if math.isinf(q) else 1.0 / q
    K = family_constant(plan.family, n, p)
    return K * norm_value * h ** (n + inv_q) * float(m) ** (-n)
