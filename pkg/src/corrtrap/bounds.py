"""Sharp error constants and the derivative norms that feed them."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .expr import Expr, jet_eval, parse
from .polynomials import RuleFamily, qnorm_on_reference, reference_monic

__all__ = [
    "ALEXIEWICZ",
    "ErrorConstant",
    "conjugate",
    "k_constant",
    "family_constant",
    "sharp_coefficient",
    "apriori_bound",
    "lp_norm_estimate",
    "alexiewicz_norm",
]

ALEXIEWICZ = "alexiewicz"

_LEBESGUE = (RuleFamily.L1, RuleFamily.L2, RuleFamily.LINF)


def conjugate(p: float) -> float:
    """Conjugate exponent, with 1/inf = 0."""
    p = float(p)
    if not p >= 1:
        raise ValueError(f"p must lie in [1, inf], got {p}")
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1)


def _inv(q: float) -> float:
    return 0.0 if math.isinf(q) else 1.0 / q


@dataclass(frozen=True)
class ErrorConstant:
    n: int
    p: float
    value: float
    exact: bool
    family_used: RuleFamily


def _closed_form(n: int, p: float) -> tuple[float, RuleFamily] | None:
    f = math.factorial
    if p == 1:
        return 2.0 ** (1 - 2 * n) / f(n), RuleFamily.L1
    if p == 2:
        return f(n) / (math.sqrt(2 * n + 1) * f(2 * n)), RuleFamily.L2
    if math.isinf(p):
        return 2.0 ** (-2 * n) / f(n), RuleFamily.LINF
    return None


def family_constant(family: RuleFamily | str, n: int, p: float) -> float:
    """``2^(-n-1/q) ||kernel||_q / n!`` for one family's kernel.

    This is the Hölder constant of the family's rule when the n-th
    derivative is measured in ``L^p``; it equals the sharp constant when
    ``p`` is the family's own exponent.
    """
    family = RuleFamily.parse(family)
    if family not in _LEBESGUE:
        raise ValueError("the Alexiewicz family has no L^p constant")
    if n < 1:
        raise ValueError("n must be at least 1")
    q = conjugate(p)
    if family.p == float(p):
        return _closed_form(n, float(p))[0]
    norm = qnorm_on_reference(reference_monic(family, n), q)
    return 2.0 ** (-n - _inv(q)) * norm / math.factorial(n)


def k_constant(n: int, p: float) -> ErrorConstant:
    """Smallest known error constant ``K(n, p)``.

    Exact at p in {1, 2, inf}. Elsewhere the minimizing kernel is unknown,
    so the minimum over the three known kernels is returned as an upper
    bound and flagged inexact.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    p = float(p)
    conjugate(p)
    closed = _closed_form(n, p)
    if closed is not None:
        return ErrorConstant(n, p, closed[0], True, closed[1])
    best = min((family_constant(fam, n, p), fam) for fam in _LEBESGUE)
    return ErrorConstant(n, p, best[0], False, best[1])


def sharp_coefficient(family: RuleFamily | str, n: int, a: float, b: float) -> float:
    """Coefficient of the derivative norm in the family's sharp bound."""
    family = RuleFamily.parse(family)
    a, b = float(a), float(b)
    if not a < b:
        raise ValueError(f"invalid interval: need a < b, got a={a}, b={b}")
    h = b - a
    if family is RuleFamily.ALEXIEWICZ:
        return h**n / (math.factorial(n - 1) * 2 ** (2 * n - 2))
    p = family.p
    return _closed_form(n, p)[0] * h ** (n + _inv(conjugate(p)))


def apriori_bound(family: RuleFamily | str, n: int, a: float, b: float, norm_value: float) -> float:
    if norm_value < 0:
        raise ValueError("norm_value must be non-negative")
    return sharp_coefficient(family, n, a, b) * norm_value


# --- norm estimation ----------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _nth_derivative(e: Expr, n: int):
    def g(x):
        return jet_eval(e, x, n).derivative(n)

    return g


def _sign_changes(g, a: float, b: float, samples: int = 2049) -> list[float]:
    xs = np.linspace(a, b, samples)
    ys = np.asarray(g(xs), dtype=float)
    out = []
    for i in range(samples - 1):
        y0, y1 = ys[i], ys[i + 1]
        if y0 == 0 and 0 < i:
            out.append(float(xs[i]))
        elif y0 * y1 < 0:
            out.append(brentq(lambda t: float(g(t)), xs[i], xs[i + 1], xtol=1e-15, rtol=1e-15,
                              maxiter=400, disp=False))
    return out


def _gl_panels(func, lo: float, hi: float, panels: int) -> float:
    edges = np.linspace(lo, hi, panels + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    halves = 0.5 * (edges[1:] - edges[:-1])
    x = (mids[:, None] + halves[:, None] * _GL_X[None, :]).ravel()
    y = np.asarray(func(x), dtype=float).reshape(panels, -1)
    return float(np.sum(halves * (y @ _GL_W)))


def lp_norm_estimate(e: Expr | str, order: int, p: float, a: float, b: float,
                     rel_tol: float = 1e-10) -> float:
    """Estimate ``||f^(order)||_p`` over ``[a, b]``.

    Finite ``p``: 16-point Gauss-Legendre panels on each sign-definite
    piece, doubled until the relative change drops below ``rel_tol``.
    ``p = inf``: dense sampling followed by local maximization.
    """
    if isinstance(e, str):
        e = parse(e)
    p = float(p)
    conjugate(p)
    a, b = float(a), float(b)
    g = _nth_derivative(e, order)
    if math.isinf(p):
        return _sup_abs(g, a, b)
    cuts = [a] + [c for c in _sign_changes(g, a, b) if a < c < b] + [b]

    def integrand(x):
        return np.abs(np.asarray(g(x), dtype=float)) ** p

    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo:
            continue
        panels, prev = 1, _gl_panels(integrand, lo, hi, 1)
        while True:
            panels *= 2
            cur = _gl_panels(integrand, lo, hi, panels)
            if abs(cur - prev) <= rel_tol * abs(cur) or cur == prev:
                break
            if panels > 2**14:
                raise ArithmeticError("norm estimate did not converge")
            prev = cur
        total += cur
    return total ** (1 / p)


def _sup_abs(g, a: float, b: float, samples: int = 4097) -> float:
    xs = np.linspace(a, b, samples)
    ys = np.abs(np.asarray(g(xs), dtype=float))
    if not np.all(np.isfinite(ys)):
        raise ValueError("function is not finite on the interval")
    best = float(ys.max())
    # local maxima of the samples, best first
    idx = [i for i in range(samples)
           if (i == 0 or ys[i] >= ys[i - 1]) and (i == samples - 1 or ys[i] >= ys[i + 1])]
    idx.sort(key=lambda i: -ys[i])
    for i in idx[:8]:
        lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, samples - 1)]
        res = minimize_scalar(lambda t: -abs(float(g(t))), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14 * max(1.0, abs(xs[i]))})
        best = max(best, -float(res.fun))
    return best


def alexiewicz_norm(e: Expr | str, order: int, a: float, b: float) -> float:
    """``sup_x |f^(order-1)(x) - f^(order-1)(a)|``, the Alexiewicz norm of ``f^(order)``."""
    if isinstance(e, str):
        e = parse(e)
    if order < 1:
        raise ValueError("order must be at least 1")
    a, b = float(a), float(b)
    base = jet_eval(e, a, order - 1).derivative(order - 1)

    def primitive(x):
        return jet_eval(e, x, order - 1).derivative(order - 1) - base

    return _sup_abs(primitive, a, b)
