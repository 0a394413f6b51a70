"""Reference integrators used to measure true errors.

``integrate`` is a globally adaptive Gauss-Kronrod (7/15) integrator on
binary64; ``integrate_mp`` is the extended-precision route used when the
quantity being measured sits below double-precision roundoff;
``integrate_piecewise`` is exact for piecewise polynomials.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import mpmath
import numpy as np

from .expr import eval_expr, parse

__all__ = ["OracleResult", "OracleConvergenceError", "integrate", "integrate_mp", "integrate_piecewise"]

MAX_EVALUATIONS = 1_000_000

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
# 15 nodes on [-1, 1], symmetric; Gauss nodes are the odd-indexed Kronrod ones
_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])
_KW = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5]] = _WG[:3]
_GW[7] = _WG[3]
_GW[[13, 11, 9]] = _WG[:3]


@dataclass(frozen=True)
class OracleResult:
    value: float
    est_abs_error: float
    evaluations: int


class OracleConvergenceError(RuntimeError):
    """Tolerance not met within the evaluation cap; ``result`` holds the best value."""

    def __init__(self, message: str, result: OracleResult):
        super().__init__(message)
        self.result = result


def _as_callable(f) -> Callable:
    if isinstance(f, str):
        f = parse(f)
    if callable(f):
        return f
    expr = f
    return lambda x: eval_expr(expr, x)


def _vector_eval(f: Callable, x: np.ndarray) -> np.ndarray:
    try:
        y = np.asarray(f(x), dtype=float)
        if y.shape == x.shape:
            return y
        if y.ndim == 0:
            return np.full_like(x, float(y))
    except (TypeError, ValueError):
        pass
    return np.array([float(f(float(t))) for t in x])


def _panel(f, lo, hi):
    c, h = 0.5 * (lo + hi), 0.5 * (hi - lo)
    y = _vector_eval(f, c + h * _NODES)
    if not np.all(np.isfinite(y)):
        raise ValueError("integrand is not finite on the panel")
    k = h * float(np.dot(_KW, y))
    g = h * float(np.dot(_GW, y))
    kabs = h * float(np.dot(_KW, np.abs(y)))
    return k, abs(k - g), kabs


def integrate(f, a: float, b: float, rel_tol: float = 1e-12) -> OracleResult:
    """Adaptive G7/K15 quadrature of ``f`` over ``[a, b]``.

    ``f`` may be an expression, its source text, or a callable accepting
    numpy arrays (or floats). Raises :class:`OracleConvergenceError` when
    the evaluation cap is exhausted before the tolerance is met.
    """
    f = _as_callable(f)
    a, b = float(a), float(b)
    if rel_tol < 1e-13:
        raise ValueError("rel_tol below 1e-13 is not attainable in binary64")
    if a == b:
        return OracleResult(0.0, 0.0, 0)
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -1.0
    k, err, kabs = _panel(f, a, b)
    evals = 15
    heap = [(-err, a, b, k, err, kabs)]
    total, total_err, total_abs = k, err, kabs
    min_width = 64 * np.finfo(float).eps * max(abs(a), abs(b), b - a)
    frozen = []
    while True:
        floor = 50 * np.finfo(float).eps * total_abs
        if total_err <= max(rel_tol * abs(total), floor):
            break
        if not heap:
            raise OracleConvergenceError(
                "tolerance not reached: panels cannot be split further",
                OracleResult(sign * total, total_err, evals),
            )
        if evals + 30 > MAX_EVALUATIONS:
            raise OracleConvergenceError(
                f"tolerance {rel_tol:g} not reached after {evals} evaluations",
                OracleResult(sign * total, total_err, evals),
            )
        _, lo, hi, k0, e0, a0 = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if hi - lo <= min_width:
            # cannot split further; keep its estimate as irreducible
            frozen.append((-e0, lo, hi, k0, e0, a0))
            continue
        k1, e1, a1 = _panel(f, lo, mid)
        k2, e2, a2 = _panel(f, mid, hi)
        evals += 30
        total += (k1 + k2) - k0
        total_err += (e1 + e2) - e0
        total_abs += (a1 + a2) - a0
        heapq.heappush(heap, (-e1, lo, mid, k1, e1, a1))
        heapq.heappush(heap, (-e2, mid, hi, k2, e2, a2))
    # re-sum in a fixed order so the value does not depend on heap history
    panels = sorted(heap + frozen, key=lambda p: p[1])
    value = math.fsum(p[3] for p in panels)
    return OracleResult(sign * value, total_err, evals)


def integrate_mp(f, a, b, dps: int = 40, points=None):
    """Extended-precision integral (tanh-sinh via mpmath).

    ``f`` is called with :class:`mpmath.mpf` arguments; expressions are
    evaluated through their jets at that precision.
    """
    if isinstance(f, str):
        f = parse(f)
    func = f if callable(f) else (lambda x, _e=f: eval_expr(_e, x))
    with mpmath.workdps(dps):
        lo, hi = _mpf(a), _mpf(b)
        pts = [lo] + [_mpf(p) for p in (points or [])] + [hi]
        val = mpmath.quad(func, pts)
        return +val


def _mpf(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


def integrate_piecewise(pp) -> Fraction:
    """Exact integral of a piecewise polynomial over its breakpoints."""
    total = Fraction(0)
    for lo, hi, piece in zip(pp.breakpoints[:-1], pp.breakpoints[1:], pp.pieces):
        total += piece.integrate(lo, hi)
    return total
