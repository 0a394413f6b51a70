"""Degree-of-exactness checks and extremal functions that attain the bounds.

Everything here that can be exact is exact: breakpoints are rationals,
pieces are :class:`~corrtrap.polynomials.Polynomial`, and errors and
ratios come out as :class:`fractions.Fraction`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .bounds import conjugate
from .oracle import integrate, integrate_piecewise
from .polynomials import (
    Polynomial,
    RuleFamily,
    ScaledMonic,
    chebyshev_u,
    monic_on_interval,
    qnorm_on_reference,
    roots,
    to_fraction,
)
from .rules import EndpointJet, apply, generic_rule, polynomial_jet, polynomial_jets, weights

__all__ = [
    "PiecewisePoly",
    "ExtremalSpec",
    "ExtremalLp",
    "SharpnessCheck",
    "exactness_degree",
    "rule_error_on_monomial",
    "reference_moments",
    "build_extremal_linf",
    "build_extremal_lp",
    "build_extremal_alexiewicz",
    "linf_sharpness",
    "alexiewicz_sharpness",
]


@dataclass(frozen=True)
class PiecewisePoly:
    """Polynomial pieces on consecutive rational breakpoints.

    ``smoothness`` is the highest derivative order that is continuous
    across interior breakpoints.
    """

    breakpoints: tuple[Fraction, ...]
    pieces: tuple[Polynomial, ...]
    smoothness: int = 0

    def __post_init__(self):
        bps = tuple(to_fraction(x) for x in self.breakpoints)
        object.__setattr__(self, "breakpoints", bps)
        if len(self.pieces) != len(bps) - 1:
            raise ValueError("need exactly one piece per subinterval")
        if any(lo >= hi for lo, hi in zip(bps[:-1], bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    @property
    def a(self) -> Fraction:
        return self.breakpoints[0]

    @property
    def b(self) -> Fraction:
        return self.breakpoints[-1]

    def piece_index(self, x) -> int:
        x = to_fraction(x)
        if not self.a <= x <= self.b:
            raise ValueError("point outside the support")
        for i, hi in enumerate(self.breakpoints[1:]):
            if x < hi:
                return i
        return len(self.pieces) - 1

    def __call__(self, x):
        if isinstance(x, np.ndarray):
            return np.array([float(self(to_fraction(float(t)))) for t in x])
        return self.pieces[self.piece_index(x)](to_fraction(x))

    def derivative(self, k: int = 1) -> "PiecewisePoly":
        return PiecewisePoly(self.breakpoints, tuple(p.derivative(k) for p in self.pieces),
                             max(self.smoothness - k, 0))

    def antiderivative(self, value_at_a=0) -> "PiecewisePoly":
        """Continuous antiderivative taking ``value_at_a`` at the left end."""
        out = []
        start = to_fraction(value_at_a)
        for lo, hi, p in zip(self.breakpoints[:-1], self.breakpoints[1:], self.pieces):
            P = p.antiderivative()
            P = P + (start - P(lo))
            out.append(P)
            start = P(hi)
        return PiecewisePoly(self.breakpoints, tuple(out), self.smoothness + 1)

    def jumps(self, k: int) -> list[Fraction]:
        """Jumps of the k-th derivative at the interior breakpoints."""
        d = self.derivative(k) if k else self
        return [right(x) - left(x) for x, left, right in
                zip(self.breakpoints[1:-1], d.pieces[:-1], d.pieces[1:])]

    def jet(self, x, order: int):
        """Exact jet from the piece at ``x`` (left piece at ``b``)."""
        i = self.piece_index(x)
        return polynomial_jet(self.pieces[i], x, order)

    def endpoint_jets(self, order: int) -> EndpointJet:
        return EndpointJet(polynomial_jet(self.pieces[0], self.a, order),
                           polynomial_jet(self.pieces[-1], self.b, order))

    def integral(self) -> Fraction:
        return integrate_piecewise(self)


# --- degree of exactness ----------------------------------------------------------


def rule_error_on_monomial(phi: ScaledMonic, degree: int) -> Fraction:
    """Exact ``E_n(x^degree)`` of the generic rule built on ``phi``."""
    mono = Polynomial.monomial(degree)
    jets = polynomial_jets(mono, phi.a, phi.b, phi.n - 1)
    return mono.integrate(phi.a, phi.b) - generic_rule(phi, jets)


def exactness_degree(phi: ScaledMonic, max_degree: int | None = None, tol: float = 1e-11) -> int:
    """Largest D with the rule exact on ``1, x, ..., x^D``.

    A monomial counts as exact when ``|E| <= tol * (1 + |integral|)``;
    the errors themselves are computed in exact rational arithmetic.
    """
    top = 2 * phi.n + 1 if max_degree is None else max_degree
    for d in range(top + 1):
        exact = Polynomial.monomial(d).integrate(phi.a, phi.b)
        err = rule_error_on_monomial(phi, d)
        if abs(float(err)) > tol * (1 + abs(float(exact))):
            return d - 1
    return top


def reference_moments(poly: Polynomial, count: int) -> list[Fraction]:
    """``[int_{-1}^{1} x^j poly(x) dx for j < count]``, exactly."""
    return [(Polynomial.monomial(j) * poly).integrate(-1, 1) for j in range(count)]


# --- extremal functions -------------------------------------------------------------


@dataclass(frozen=True)
class ExtremalSpec:
    family: RuleFamily
    n: int
    p: float
    a: Fraction
    b: Fraction
    d: Fraction = Fraction(1)

    def __init__(self, family, n: int, p, a, b, d=1):
        fa, fb = to_fraction(a), to_fraction(b)
        if not fa < fb:
            raise ValueError(f"invalid interval: need a < b, got a={a}, b={b}")
        if n < 1:
            raise ValueError("n must be at least 1")
        dd = to_fraction(d)
        if dd == 0:
            raise ValueError("amplitude d must be non-zero")
        object.__setattr__(self, "family", RuleFamily.parse(family))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "a", fa)
        object.__setattr__(self, "b", fb)
        object.__setattr__(self, "d", dd)


@dataclass(frozen=True)
class SharpnessCheck:
    """Exact error, norm and bound of one extremal function."""

    error: Fraction
    norm: Fraction
    bound: Fraction

    @property
    def ratio(self) -> Fraction:
        return abs(self.error) / self.bound


def _map_roots(reference_roots, a: Fraction, b: Fraction) -> list[Fraction]:
    half, mid = (b - a) / 2, (a + b) / 2
    return [mid + half * Fraction(float(t)) for t in reference_roots]


def _sign_pieces(breaks: Sequence[Fraction], d: Fraction, last_sign: int) -> tuple[Polynomial, ...]:
    count = len(breaks) - 1
    signs = [last_sign * (-1) ** (count - 1 - j) for j in range(count)]
    return tuple(Polynomial.constant(s * d) for s in signs)


def _integrate_times(pp: PiecewisePoly, times: int) -> PiecewisePoly:
    for _ in range(times):
        pp = pp.antiderivative(0)
    return pp


def build_extremal_linf(spec: ExtremalSpec) -> PiecewisePoly:
    """Piecewise polynomial with ``f^(n) = d * sgn(phi_n)`` and zero data at ``a``.

    The breakpoints are the roots of the kernel rounded to binary64 and
    then held exactly; the sign pattern follows the kernel, which is
    positive to the right of its last root.
    """
    if spec.family is not RuleFamily.LINF:
        raise ValueError("the sup-norm extremal is built on the L-infinity family")
    n = spec.n
    ref = monic_on_interval(RuleFamily.LINF, n, -1, 1).poly
    breaks = [spec.a, *_map_roots(roots(ref), spec.a, spec.b), spec.b]
    g = PiecewisePoly(tuple(breaks), _sign_pieces(breaks, spec.d, 1), smoothness=-1)
    return _integrate_times(g, n)


def linf_sharpness(spec: ExtremalSpec) -> SharpnessCheck:
    """Exact ``|E_n|`` of the sup-norm extremal against ``sharp_coeff * ||f^(n)||_inf``."""
    f = build_extremal_linf(spec)
    n, h = spec.n, spec.b - spec.a
    rw = weights(RuleFamily.LINF, n, spec.a, spec.b)
    err = f.integral() - apply(rw, f.endpoint_jets(n - 1))
    norm = abs(spec.d)
    coeff = h ** (n + 1) / (2 ** (2 * n) * math.factorial(n))
    return SharpnessCheck(err, norm, coeff * norm)


def build_extremal_alexiewicz(spec: ExtremalSpec, ramp=None) -> PiecewisePoly:
    """Extremal for the Alexiewicz bound, smoothed by linear ramps.

    ``f^(n-1)`` equals ``d * sgn(U_{n-1})`` (scaled to ``[a, b]``) except
    on ramps of width ``ramp`` that start from 0 at ``a`` and cross each
    sign change, so ``f^(n-1)`` is continuous with ``f^(n-1)(a) = 0``.
    The error ratio tends to 1 as ``ramp`` shrinks. The lower derivatives
    vanish at ``a``. Default ramp is ``1e-12 * (b - a)``.
    """
    if spec.family is not RuleFamily.ALEXIEWICZ:
        raise ValueError("the Alexiewicz extremal is built on the Alexiewicz family")
    n, a, b, d = spec.n, spec.a, spec.b, spec.d
    eps = (b - a) / 10**12 if ramp is None else to_fraction(ramp)
    if eps <= 0:
        raise ValueError("ramp width must be positive")
    jumps = _map_roots(roots(chebyshev_u(n - 1)), a, b) if n >= 2 else []
    count = len(jumps) + 1
    levels = [d * (-1) ** (count - 1 - j) for j in range(count)]
    # knots and values of the piecewise-linear f^(n-1)
    knots = [a, a + eps]
    vals = [Fraction(0), levels[0]]
    for r, lo, hi in zip(jumps, levels[:-1], levels[1:]):
        knots += [r - eps / 2, r + eps / 2]
        vals += [lo, hi]
    knots.append(b)
    vals.append(levels[-1])
    if any(x >= y for x, y in zip(knots[:-1], knots[1:])):
        raise ValueError("ramp width too large for the sign pattern")
    pieces = []
    for x0, x1, y0, y1 in zip(knots[:-1], knots[1:], vals[:-1], vals[1:]):
        slope = (y1 - y0) / (x1 - x0)
        pieces.append(Polynomial((y0 - slope * x0, slope)))
    g = PiecewisePoly(tuple(knots), tuple(pieces), smoothness=0)
    return _integrate_times(g, n - 1)


def alexiewicz_sharpness(spec: ExtremalSpec, ramp=None) -> SharpnessCheck:
    """Exact error of the Alexiewicz extremal against its sharp bound.

    The norm of ``f^(n)`` is ``sup |f^(n-1)(x) - f^(n-1)(a)|``, which for
    the ramped construction is exactly ``|d|``.
    """
    f = build_extremal_alexiewicz(spec, ramp)
    n, h = spec.n, spec.b - spec.a
    rw = weights(RuleFamily.ALEXIEWICZ, n, spec.a, spec.b)
    err = f.integral() - apply(rw, f.endpoint_jets(n - 1))
    top = f.derivative(n - 1) if n > 1 else f
    base = top(spec.a)
    norm = max(max(abs(p(x) - base) for x in (lo, hi))
               for lo, hi, p in zip(top.breakpoints[:-1], top.breakpoints[1:], top.pieces))
    coeff = h**n / (math.factorial(n - 1) * 2 ** (2 * n - 2))
    return SharpnessCheck(err, norm, coeff * norm)


class ExtremalLp:
    """Hölder-equality function for ``1 < p < inf``.

    ``f^(n) = d * sgn(phi) * |phi|^(1/(p-1))`` in closed form; ``f`` itself
    is the n-fold integral from ``a`` (evaluated numerically). When
    ``1/(p-1)`` is an odd integer ``f`` is a polynomial, available exactly
    as :attr:`exact`.
    """

    def __init__(self, spec: ExtremalSpec):
        p = float(spec.p)
        if not 1 < p < math.inf:
            raise ValueError("p must lie strictly between 1 and infinity")
        if spec.family is RuleFamily.ALEXIEWICZ:
            raise ValueError("use build_extremal_alexiewicz for the Alexiewicz family")
        self.spec = spec
        self.p = p
        self.q = conjugate(p)
        self.power = 1.0 / (p - 1.0)
        self.phi = monic_on_interval(spec.family, spec.n, spec.a, spec.b)
        self.exact = self._exact_polynomial()

    def _exact_polynomial(self) -> PiecewisePoly | None:
        k = round(self.power)
        if abs(self.power - k) > 1e-12 or k % 2 == 0:
            return None
        g = self.phi.poly**k
        pp = PiecewisePoly((self.spec.a, self.spec.b), (g.scale(self.spec.d),), smoothness=-1)
        return _integrate_times(pp, self.spec.n)

    def nth_derivative(self, x):
        v = np.asarray(self.phi.poly(np.asarray(x, dtype=float)), dtype=float)
        return float(self.spec.d) * np.sign(v) * np.abs(v) ** self.power

    def __call__(self, x: float) -> float:
        n, a = self.spec.n, float(self.spec.a)
        x = float(x)
        if x == a:
            return 0.0
        kernel = lambda t: (x - t) ** (n - 1) * self.nth_derivative(t)
        return integrate(kernel, a, x, rel_tol=1e-12).value / math.factorial(n - 1)

    def error_term(self) -> float:
        n = self.spec.n
        a, b = float(self.spec.a), float(self.spec.b)
        g = lambda t: self.nth_derivative(t) * self.phi.poly(t)
        return (-1) ** n * _split_integral(g, a, b, self._cuts()) / math.factorial(n)

    def holder_bound(self) -> float:
        """``||f^(n)||_p ||phi||_q / n!``."""
        n = self.spec.n
        a, b = float(self.spec.a), float(self.spec.b)
        cuts = self._cuts()
        norm_g = _split_integral(lambda t: np.abs(self.nth_derivative(t)) ** self.p, a, b, cuts) ** (1 / self.p)
        half = (b - a) / 2
        norm_phi = half ** (n + 1 / self.q) * qnorm_on_reference(self.phi.reference, self.q)
        return norm_g * norm_phi / math.factorial(n)

    def _cuts(self) -> list[float]:
        half, mid = (float(self.spec.b) - float(self.spec.a)) / 2, (float(self.spec.a) + float(self.spec.b)) / 2
        return [mid + half * t for t in roots(self.phi.reference)]

    def sharpness_ratio(self) -> float:
        return abs(self.error_term()) / self.holder_bound()

    def exact_ratio_squared(self) -> Fraction:
        """``(E / (sharp_coeff * ||f^(n)||_2))^2`` exactly, for ``p = 2`` on the L2 family."""
        if self.exact is None or self.p != 2 or self.spec.family is not RuleFamily.L2:
            raise ValueError("exact ratio is available for p = 2 on the L2 family only")
        n, h = self.spec.n, self.spec.b - self.spec.a
        f = self.exact
        rw = weights(RuleFamily.L2, n, self.spec.a, self.spec.b)
        err = f.integral() - apply(rw, f.endpoint_jets(n - 1))
        g = f.derivative(n).pieces[0]
        norm_sq = (g * g).integrate(self.spec.a, self.spec.b)
        coeff_sq = Fraction(math.factorial(n) ** 2, (2 * n + 1) * math.factorial(2 * n) ** 2) * h ** (2 * n + 1)
        return err * err / (coeff_sq * norm_sq)


def _split_integral(func, a: float, b: float, cuts) -> float:
    pts = [a] + sorted(c for c in cuts if a < c < b) + [b]
    return math.fsum(integrate(func, lo, hi, rel_tol=1e-13).value for lo, hi in zip(pts[:-1], pts[1:]))


def build_extremal_lp(spec: ExtremalSpec) -> ExtremalLp:
    return ExtremalLp(spec)
