"""Exact-rational polynomials and the orthogonal families behind the rules.

Coefficients are :class:`fractions.Fraction` throughout; conversion to
binary64 (or to :mod:`mpmath` numbers) happens only when a polynomial is
evaluated at a non-rational point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable

import mpmath
import numpy as np
from scipy.special import roots_jacobi

__all__ = [
    "RuleFamily",
    "Polynomial",
    "ScaledMonic",
    "chebyshev_t",
    "chebyshev_u",
    "legendre_p",
    "reference_monic",
    "monic_on_interval",
    "scale_to_interval",
    "endpoint_derivative",
    "reference_endpoint_derivative",
    "qnorm_on_reference",
    "roots",
    "to_fraction",
]


class RuleFamily(str, enum.Enum):
    """The four weight families.

    The name refers to the norm placed on the n-th derivative of the
    integrand; the monic kernel minimizes the conjugate norm.
    """

    L1 = "l1"  # Chebyshev T
    L2 = "l2"  # Legendre P
    LINF = "linf"  # Chebyshev U
    ALEXIEWICZ = "alex"  # 2^(1-n) (T_n - 1)

    @classmethod
    def parse(cls, value: "RuleFamily | str") -> "RuleFamily":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"inf": "linf", "alexiewicz": "alex", "a": "alex"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown rule family {value!r}") from None

    @property
    def p(self) -> float | None:
        """Lebesgue exponent of the family, ``None`` for Alexiewicz."""
        return {"l1": 1.0, "l2": 2.0, "linf": math.inf}.get(self.value)


def to_fraction(value) -> Fraction:
    """Exact rational for ints, Fractions, floats and decimal strings."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(float(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, mpmath.mpf):
        if not mpmath.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        man, exp = value.man_exp
        return Fraction(man) * Fraction(2) ** exp
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


@dataclass(frozen=True)
class Polynomial:
    """Dense polynomial, ``coeffs[i]`` multiplies ``x**i``."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        cs = [to_fraction(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def from_coeffs(cls, coeffs: Iterable) -> "Polynomial":
        return cls(tuple(coeffs))

    @classmethod
    def monomial(cls, degree: int, coeff=1) -> "Polynomial":
        return cls((0,) * degree + (coeff,))

    @classmethod
    def constant(cls, value) -> "Polynomial":
        return cls((value,))

    @property
    def degree(self) -> int:
        """Degree; ``-1`` for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return self.leading == 1

    # arithmetic -----------------------------------------------------------

    def __add__(self, other) -> "Polynomial":
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return Polynomial(tuple(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other) -> "Polynomial":
        return self + (-_as_poly(other))

    def __rsub__(self, other) -> "Polynomial":
        return _as_poly(other) - self

    def __mul__(self, other) -> "Polynomial":
        other = _as_poly(other)
        if self.is_zero() or other.is_zero():
            return Polynomial(())
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Polynomial(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative polynomial power")
        result = Polynomial((1,))
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def scale(self, factor) -> "Polynomial":
        f = to_fraction(factor)
        return Polynomial(tuple(c * f for c in self.coeffs))

    # calculus -------------------------------------------------------------

    def derivative(self, m: int = 1) -> "Polynomial":
        cs = list(self.coeffs)
        for _ in range(m):
            cs = [i * c for i, c in enumerate(cs)][1:]
        return Polynomial(tuple(cs))

    def antiderivative(self, constant=0) -> "Polynomial":
        """Antiderivative with value ``constant`` at zero."""
        cs = [to_fraction(constant)] + [c / (i + 1) for i, c in enumerate(self.coeffs)]
        return Polynomial(tuple(cs))

    def integrate(self, lo, hi) -> Fraction:
        F = self.antiderivative()
        return F(to_fraction(hi)) - F(to_fraction(lo))

    def compose_linear(self, alpha, beta) -> "Polynomial":
        """Return ``x -> self(alpha*x + beta)`` exactly."""
        inner = Polynomial((to_fraction(beta), to_fraction(alpha)))
        result = Polynomial(())
        for c in reversed(self.coeffs):
            result = result * inner + c
        return result

    # evaluation -----------------------------------------------------------

    def __call__(self, x):
        if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
            acc = Fraction(0)
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        if isinstance(x, mpmath.mpf):
            acc = mpmath.mpf(0)
            for c in reversed(self.coeffs):
                acc = acc * x + mpmath.mpf(c.numerator) / c.denominator
            return acc
        vals = np.polynomial.polynomial.polyval(x, self.float_coeffs())
        return float(vals) if np.ndim(vals) == 0 else vals

    def float_coeffs(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs] or [0.0])

    def __repr__(self) -> str:
        return f"Polynomial({self})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mon = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if mon and c == 1:
                terms.append(mon)
            elif mon and c == -1:
                terms.append("-" + mon)
            else:
                terms.append(f"{c}{'*' + mon if mon else ''}")
        return " + ".join(terms).replace("+ -", "- ")


def _as_poly(value) -> Polynomial:
    return value if isinstance(value, Polynomial) else Polynomial((value,))


_X = Polynomial((0, 1))


@lru_cache(maxsize=None)
def chebyshev_t(n: int) -> Polynomial:
    """Chebyshev polynomial of the first kind, T_n."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    if n == 0:
        return Polynomial((1,))
    if n == 1:
        return _X
    return _X * chebyshev_t(n - 1) * 2 - chebyshev_t(n - 2)


@lru_cache(maxsize=None)
def chebyshev_u(n: int) -> Polynomial:
    """Chebyshev polynomial of the second kind, U_n."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    if n == 0:
        return Polynomial((1,))
    if n == 1:
        return Polynomial((0, 2))
    return _X * chebyshev_u(n - 1) * 2 - chebyshev_u(n - 2)


@lru_cache(maxsize=None)
def legendre_p(n: int) -> Polynomial:
    """Legendre polynomial P_n from Bonnet's recurrence."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    if n == 0:
        return Polynomial((1,))
    if n == 1:
        return _X
    k = n - 1
    return (_X * legendre_p(k) * (2 * k + 1) - legendre_p(k - 1) * k).scale(Fraction(1, k + 1))


@lru_cache(maxsize=None)
def reference_monic(family: RuleFamily, n: int) -> Polynomial:
    """The family's monic kernel on [-1, 1]."""
    family = RuleFamily.parse(family)
    if n < 1:
        raise ValueError("degree must be at least 1")
    if family is RuleFamily.L1:
        return chebyshev_t(n).scale(Fraction(1, 2 ** (n - 1)))
    if family is RuleFamily.L2:
        return legendre_p(n).scale(Fraction(2**n * math.factorial(n) ** 2, math.factorial(2 * n)))
    if family is RuleFamily.LINF:
        return chebyshev_u(n).scale(Fraction(1, 2**n))
    return (chebyshev_t(n) - 1).scale(Fraction(1, 2 ** (n - 1)))


@dataclass(frozen=True)
class ScaledMonic:
    """A monic kernel of degree ``n`` carried to ``[a, b]``.

    ``family`` is ``None`` for kernels that do not come from one of the
    four named families.
    """

    family: RuleFamily | None
    n: int
    a: Fraction
    b: Fraction
    poly: Polynomial

    @property
    def reference(self) -> Polynomial:
        """The [-1, 1] representative."""
        half = (self.b - self.a) / 2
        mid = (self.a + self.b) / 2
        return self.poly.compose_linear(half, mid).scale(1 / half**self.n)


def _check_interval(a, b) -> tuple[Fraction, Fraction]:
    fa, fb = to_fraction(a), to_fraction(b)
    if not fa < fb:
        raise ValueError(f"invalid interval: need a < b, got a={a}, b={b}")
    return fa, fb


def scale_to_interval(reference: Polynomial, a, b, family: RuleFamily | None = None) -> ScaledMonic:
    """Carry a monic [-1, 1] polynomial to ``[a, b]``."""
    a, b = _check_interval(a, b)
    if not reference.is_monic():
        raise ValueError("reference polynomial must be monic")
    n = reference.degree
    h = b - a
    # x -> (2x - a - b)/(b - a)
    poly = reference.compose_linear(2 / h, -(a + b) / h).scale((h / 2) ** n)
    return ScaledMonic(family, n, a, b, poly)


def monic_on_interval(family: RuleFamily | str, n: int, a, b) -> ScaledMonic:
    """Minimizing monic kernel of ``family`` scaled to ``[a, b]``."""
    family = RuleFamily.parse(family)
    if n < 1:
        raise ValueError("degree must be at least 1")
    return scale_to_interval(reference_monic(family, n), a, b, family)


def reference_endpoint_derivative(family: RuleFamily | str, n: int, m: int) -> Fraction:
    """m-th derivative of the family's [-1, 1] kernel at +1, closed form."""
    family = RuleFamily.parse(family)
    if not 0 <= m <= n:
        raise ValueError(f"derivative order must lie in [0, {n}], got {m}")
    f = math.factorial
    if family is RuleFamily.L2:
        val = Fraction(f(n) ** 2 * f(n + m), f(2 * n) * f(n - m) * f(m))
    elif family is RuleFamily.LINF:
        val = Fraction(f(m) * f(n + m + 1), 2 ** (2 * n - 2 * m) * f(2 * m + 1) * f(n - m))
    elif family is RuleFamily.ALEXIEWICZ and m == 0:
        return Fraction(0)
    else:
        val = Fraction(n * f(n + m - 1) * f(m), f(n - m) * f(2 * m)) / Fraction(2) ** (2 * n - 2 * m - 1)
    # closed forms are written for an interval of length b - a; here b - a = 2
    return val * 2 ** (n - m)


def endpoint_derivative(sm: ScaledMonic, m: int, endpoint: str) -> Fraction:
    """Exact ``phi^(m)`` at ``endpoint`` ('a' or 'b').

    Named families use the closed forms; other kernels are differentiated
    coefficient-wise.
    """
    if endpoint not in ("a", "b"):
        raise ValueError("endpoint must be 'a' or 'b'")
    if not 0 <= m <= sm.n:
        raise ValueError(f"derivative order must lie in [0, {sm.n}], got {m}")
    n = sm.n
    if sm.family is None:
        return sm.poly.derivative(m)(sm.a if endpoint == "a" else sm.b)
    at_b = reference_endpoint_derivative(sm.family, n, m) * ((sm.b - sm.a) / 2) ** (n - m)
    if endpoint == "b":
        return at_b
    if sm.family is RuleFamily.ALEXIEWICZ and m == 0:
        # T_n(-1) - 1 is 0 or -2
        return Fraction(0) if n % 2 == 0 else -((sm.b - sm.a) ** n) / 2 ** (2 * n - 2)
    return at_b if (n + m) % 2 == 0 else -at_b


def roots(poly: Polynomial, max_iter: int = 100) -> np.ndarray:
    """Sorted real roots of a polynomial whose roots are all real and simple.

    Companion-matrix eigenvalues seed a Newton polish whose residuals are
    evaluated exactly in rational arithmetic; each root is then confirmed
    by an exact sign change.
    """
    n = poly.degree
    if n < 1:
        return np.empty(0)
    fc = poly.float_coeffs()
    seeds = np.sort(np.real(np.polynomial.polynomial.polyroots(fc)))
    dpoly = poly.derivative()
    out = []
    for r in seeds:
        x = float(r)
        for _ in range(max_iter):
            fx = Fraction(x)
            d = dpoly(fx)
            if d == 0:
                break
            step = float(poly(fx) / d)
            x_new = x - step
            if x_new == x or abs(step) <= 1e-15 * max(1.0, abs(x)):
                x = x_new
                break
            x = x_new
        else:
            raise ArithmeticError(f"Newton iteration did not converge near {r}")
        out.append(x)
    out = np.array(sorted(out))
    # confirm a sign change around each root
    for i, x in enumerate(out):
        lo, hi = np.nextafter(x, -np.inf), np.nextafter(x, np.inf)
        for _ in range(60):
            if poly(Fraction(x)) == 0 or poly(Fraction(lo)) * poly(Fraction(hi)) < 0:
                break
            spread = (hi - lo) * 2
            lo, hi = x - spread, x + spread
        else:
            raise ArithmeticError(f"no sign change found near {x}; roots must be real and simple")
    if np.any(np.diff(out) <= 0):
        raise ArithmeticError("repeated root; roots must be simple")
    return out


def _check_q(q: float) -> float:
    q = float(q)
    if not q >= 1:
        raise ValueError(f"q must lie in [1, inf], got {q}")
    return q


def qnorm_on_reference(poly: Polynomial, q: float) -> float:
    """``||poly||_q`` over [-1, 1].

    The sup-norm is taken over critical points and endpoints. Finite
    ``q`` uses Gauss-Jacobi quadrature between consecutive roots, with
    the ``|x - root|^q`` factor absorbed in the weight.
    """
    q = _check_q(q)
    if poly.is_zero():
        raise ValueError("norm of the zero polynomial is not defined here")
    if poly.degree == 0:
        c = abs(float(poly.coeffs[0]))
        return c if math.isinf(q) else c * 2 ** (1 / q)
    if math.isinf(q):
        cands = [-1.0, 1.0]
        dp = poly.derivative()
        if dp.degree >= 1:
            crit = _real_roots_or_none(dp)
            if crit is None:
                crit = _crit_fallback(dp)
            cands.extend(float(x) for x in crit if -1 <= x <= 1)
        # exact evaluation avoids cancellation in the monomial basis
        return max(abs(float(poly(Fraction(float(x))))) for x in cands)
    rts = _real_roots_or_none(poly)
    if rts is None:
        return _qnorm_adaptive(poly, q)
    inside = [float(r) for r in rts if -1 < r < 1]
    lead = float(poly.leading)
    pts = [-1.0] + inside + [1.0]
    total = 0.0
    npts = max(40, 4 * poly.degree)
    for lo, hi in zip(pts[:-1], pts[1:]):
        lo_root = lo in inside
        hi_root = hi in inside
        alpha = q if hi_root else 0.0  # weight (1 - t)^alpha at the right end
        beta = q if lo_root else 0.0
        t, w = roots_jacobi(npts, alpha, beta)
        half = (hi - lo) / 2
        x = lo + half * (t + 1)
        others = [r for r in rts if not ((lo_root and r == lo) or (hi_root and r == hi))]
        smooth = np.full_like(x, abs(lead))
        for r in others:
            smooth = smooth * np.abs(x - r)
        # |x - lo|^beta |hi - x|^alpha = half^(alpha+beta) (1+t)^beta (1-t)^alpha
        total += half ** (1 + alpha + beta) * float(np.dot(w, smooth**q))
    return total ** (1 / q)


def _real_roots_or_none(poly: Polynomial):
    try:
        r = roots(poly)
    except ArithmeticError:
        return None
    imag = np.polynomial.polynomial.polyroots(poly.float_coeffs())
    if np.max(np.abs(np.imag(imag)), initial=0.0) > 1e-7:
        return None
    return r


def _crit_fallback(dp: Polynomial) -> list[float]:
    xs = np.linspace(-1, 1, 4097)
    vals = dp(xs)
    out = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]:
        lo, hi = xs[i], xs[i + 1]
        flo = dp(lo)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = dp(mid)
            if fm == 0 or hi - lo < 1e-16:
                break
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        out.append(0.5 * (lo + hi))
    return out


def _qnorm_adaptive(poly: Polynomial, q: float) -> float:
    from .oracle import integrate

    cuts = sorted({-1.0, 1.0, *(x for x in _crit_fallback(poly) if -1 < x < 1)})
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        total += integrate(lambda x: np.abs(poly(x)) ** q, lo, hi, rel_tol=1e-13).value
    return total ** (1 / q)
