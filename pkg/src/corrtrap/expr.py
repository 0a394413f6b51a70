"""Integrand expressions: a small recursive-descent parser and Taylor jets.

Grammar (whitespace insensitive)::

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | power
    power   := primary ('^' factor)?          # right associative
    primary := number | 'x' | ident '(' expr ')' | '(' expr ')'

Known functions: exp, log, sin, cos, sqrt, abs.

Derivatives are obtained by propagating truncated Taylor series
(``taylor[k] = f^(k)(p) / k!``) through the tree. Points may be floats,
numpy arrays (vectorized evaluation) or :class:`mpmath.mpf` values.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from types import SimpleNamespace
from typing import Union

import mpmath
import numpy as np

__all__ = [
    "Expr", "Num", "Var", "Neg", "Add", "Sub", "Mul", "Div", "Pow", "Call",
    "Jet", "ExprSyntaxError", "UnknownIdentifierError", "DomainError",
    "NondifferentiableError", "parse", "to_source", "jet_eval", "eval_expr",
    "derivative", "FUNCTIONS",
]

FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt", "abs")


class ExprSyntaxError(ValueError):
    """Malformed expression; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprSyntaxError):
    pass


class DomainError(ValueError):
    """The expression is undefined (or not smooth enough) at the point."""


class NondifferentiableError(DomainError):
    pass


# --- AST --------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Div:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call]

_BINARY = {Add: "+", Sub: "-", Mul: "*", Div: "/", Pow: "^"}


# --- parser -----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(source):
            if source[pos:].strip() == "":
                break
            m = _TOKEN.match(source, pos)
            if m is None or m.end() == pos:
                start = pos + len(source[pos:]) - len(source[pos:].lstrip())
                raise ExprSyntaxError(f"unexpected character {source[start]!r}", self._byte(start))
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def _byte(self, char_pos: int) -> int:
        return len(self.source[:char_pos].encode("utf-8"))

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("eof", "", len(self.source))

    def take(self, text: str | None = None):
        tok = self.peek()
        if text is not None and tok[1] != text:
            what = "end of input" if tok[0] == "eof" else repr(tok[1])
            raise ExprSyntaxError(f"expected {text!r}, found {what}", self._byte(tok[2]))
        self.i += 1
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "eof":
            raise ExprSyntaxError(f"unexpected {tok[1]!r}", self._byte(tok[2]))
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.factor()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)
        return e

    def factor(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.factor())
        base = self.primary()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return Pow(base, self.factor())
        return base

    def primary(self) -> Expr:
        kind, text, pos = self.peek()
        if kind == "num":
            self.take()
            return Num(float(text))
        if kind == "ident":
            self.take()
            if text == "x":
                return Var()
            if text not in FUNCTIONS:
                raise UnknownIdentifierError(f"unknown identifier {text!r}", self._byte(pos))
            self.take("(")
            arg = self.expr()
            self.take(")")
            return Call(text, arg)
        if (kind, text) == ("op", "("):
            self.take()
            e = self.expr()
            self.take(")")
            return e
        what = "end of input" if kind == "eof" else repr(text)
        raise ExprSyntaxError(f"unexpected {what}", self._byte(pos))


def parse(source: str) -> Expr:
    """Parse an integrand in the variable ``x``."""
    return _Parser(source).parse()


def to_source(e: Expr) -> str:
    """Fully parenthesized source text; ``parse(to_source(e)) == e``."""
    if isinstance(e, Num):
        if e.value < 0 or not math.isfinite(e.value):
            raise ValueError("only finite non-negative literals have a source form")
        return repr(float(e.value))
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Neg):
        return f"(-{to_source(e.arg)})"
    if isinstance(e, Call):
        return f"{e.name}({to_source(e.arg)})"
    if isinstance(e, Pow):
        return f"({to_source(e.base)}^{to_source(e.exponent)})"
    op = _BINARY[type(e)]
    return f"({to_source(e.left)} {op} {to_source(e.right)})"


def _depends_on_x(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, Num):
        return False
    if isinstance(e, (Neg, Call)):
        return _depends_on_x(e.arg)
    if isinstance(e, Pow):
        return _depends_on_x(e.base) or _depends_on_x(e.exponent)
    return _depends_on_x(e.left) or _depends_on_x(e.right)


# --- Taylor jets --------------------------------------------------------------


@dataclass(frozen=True)
class Jet:
    """Truncated Taylor expansion at ``point``: ``taylor[k] = f^(k)(point)/k!``."""

    point: object
    order: int
    taylor: tuple

    def derivative(self, k: int):
        if not 0 <= k <= self.order:
            raise ValueError(f"jet of order {self.order} has no derivative {k}")
        return self.taylor[k] * math.factorial(k)

    def derivatives(self) -> list:
        return [self.derivative(k) for k in range(self.order + 1)]

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError("cannot extend a jet")
        return Jet(self.point, order, self.taylor[: order + 1])

    @classmethod
    def from_derivatives(cls, point, values) -> "Jet":
        values = list(values)
        return cls(point, len(values) - 1, tuple(v / math.factorial(k) for k, v in enumerate(values)))


_MATH = SimpleNamespace(exp=math.exp, log=math.log, sin=math.sin, cos=math.cos, sqrt=math.sqrt,
                        pow=math.pow, sign=lambda v: math.copysign(1.0, v))
_NP = SimpleNamespace(exp=np.exp, log=np.log, sin=np.sin, cos=np.cos, sqrt=np.sqrt,
                      pow=np.power, sign=np.sign)
_MP = SimpleNamespace(exp=mpmath.exp, log=mpmath.log, sin=mpmath.sin, cos=mpmath.cos,
                      sqrt=mpmath.sqrt, pow=mpmath.power, sign=mpmath.sign)


def _lib(x):
    if isinstance(x, np.ndarray):
        return _NP
    if isinstance(x, mpmath.mpf):
        return _MP
    return _MATH


def _all(cond) -> bool:
    return bool(np.all(cond))


def _mul(a, b):
    K = len(a)
    return [sum(a[j] * b[k - j] for j in range(k + 1)) for k in range(K)]


def _div(a, b):
    if not _all(b[0] != 0):
        raise DomainError("division by zero")
    out = []
    for k in range(len(a)):
        acc = a[k]
        for j in range(1, k + 1):
            acc = acc - b[j] * out[k - j]
        out.append(acc / b[0])
    return out


def _exp(a, lib):
    out = [lib.exp(a[0])]
    for k in range(1, len(a)):
        out.append(sum(j * a[j] * out[k - j] for j in range(1, k + 1)) / k)
    return out


def _log(a, lib):
    if not _all(a[0] > 0):
        raise DomainError("log of a non-positive number")
    out = [lib.log(a[0])]
    for k in range(1, len(a)):
        acc = a[k] - sum(j * out[j] * a[k - j] for j in range(1, k)) / k
        out.append(acc / a[0])
    return out


def _sincos(a, lib):
    s, c = [lib.sin(a[0])], [lib.cos(a[0])]
    for k in range(1, len(a)):
        s.append(sum(j * a[j] * c[k - j] for j in range(1, k + 1)) / k)
        c.append(-sum(j * a[j] * s[k - j] for j in range(1, k + 1)) / k)
    return s, c


def _sqrt(a, lib):
    K = len(a) - 1
    if K == 0:
        if not _all(a[0] >= 0):
            raise DomainError("sqrt of a negative number")
        return [lib.sqrt(a[0])]
    if not _all(a[0] > 0):
        raise DomainError("sqrt is not differentiable at non-positive arguments")
    out = [lib.sqrt(a[0])]
    for k in range(1, K + 1):
        acc = a[k] - sum(out[j] * out[k - j] for j in range(1, k))
        out.append(acc / (2 * out[0]))
    return out


def _real_power(a, alpha, lib):
    if not _all(a[0] > 0):
        raise DomainError("non-integer power of a non-positive base")
    out = [lib.pow(a[0], alpha)]
    for k in range(1, len(a)):
        acc = sum(((alpha + 1) * j - k) * a[j] * out[k - j] for j in range(1, k + 1))
        out.append(acc / (k * a[0]))
    return out


def _int_power(a, n: int):
    if n < 0:
        one = [a[0] * 0 + 1] + [a[0] * 0] * (len(a) - 1)
        return _div(one, _int_power(a, -n))
    result = [a[0] * 0 + 1] + [a[0] * 0] * (len(a) - 1)
    base = a
    while n:
        if n & 1:
            result = _mul(result, base)
        base = _mul(base, base)
        n >>= 1
    return result


def _jet(e: Expr, x, K: int, lib) -> list:
    zero = x * 0
    if isinstance(e, Num):
        v = mpmath.mpf(e.value) if lib is _MP else e.value
        return [v + zero] + [zero] * K
    if isinstance(e, Var):
        return [x] + ([zero + 1] if K >= 1 else []) + [zero] * (K - 1)
    if isinstance(e, Neg):
        return [-c for c in _jet(e.arg, x, K, lib)]
    if isinstance(e, Add):
        return [u + v for u, v in zip(_jet(e.left, x, K, lib), _jet(e.right, x, K, lib))]
    if isinstance(e, Sub):
        return [u - v for u, v in zip(_jet(e.left, x, K, lib), _jet(e.right, x, K, lib))]
    if isinstance(e, Mul):
        return _mul(_jet(e.left, x, K, lib), _jet(e.right, x, K, lib))
    if isinstance(e, Div):
        return _div(_jet(e.left, x, K, lib), _jet(e.right, x, K, lib))
    if isinstance(e, Pow):
        base = _jet(e.base, x, K, lib)
        if not _depends_on_x(e.exponent):
            alpha = _jet(e.exponent, x, 0, lib)[0]
            alpha_f = float(alpha) if np.ndim(alpha) == 0 else float(np.asarray(alpha).flat[0])
            if alpha_f == int(alpha_f) and abs(alpha_f) <= 2**31:
                return _int_power(base, int(alpha_f))
            return _real_power(base, alpha if lib is _MP else alpha_f, lib)
        if not _all(base[0] > 0):
            raise DomainError("variable exponent requires a positive base")
        return _exp(_mul(_jet(e.exponent, x, K, lib), _log(base, lib)), lib)
    if isinstance(e, Call):
        a = _jet(e.arg, x, K, lib)
        if e.name == "exp":
            return _exp(a, lib)
        if e.name == "log":
            return _log(a, lib)
        if e.name == "sin":
            return _sincos(a, lib)[0]
        if e.name == "cos":
            return _sincos(a, lib)[1]
        if e.name == "sqrt":
            return _sqrt(a, lib)
        if e.name == "abs":
            if K == 0:
                return [abs(a[0])]
            if not _all(a[0] != 0):
                raise NondifferentiableError("abs is not differentiable at 0")
            s = lib.sign(a[0])
            return [s * c for c in a]
    raise TypeError(f"not an expression node: {e!r}")


def _coerce_point(point):
    if isinstance(point, (np.ndarray, list, tuple)):
        return np.asarray(point, dtype=float)
    if isinstance(point, mpmath.mpf):
        return point
    if isinstance(point, Fraction):
        return float(point)
    return float(point)


def jet_eval(e: Expr | str, point, order: int) -> Jet:
    """Taylor coefficients of ``e`` at ``point`` up to ``order``."""
    if isinstance(e, str):
        e = parse(e)
    if order < 0:
        raise ValueError("order must be non-negative")
    x = _coerce_point(point)
    lib = _lib(x)
    with np.errstate(all="ignore"):
        coeffs = _jet(e, x, order, lib)
    for c in coeffs:
        if lib is _MP:
            ok = mpmath.isfinite(c)
        else:
            ok = _all(np.isfinite(c))
        if not ok:
            raise DomainError("expression is not finite at the point")
    return Jet(x, order, tuple(coeffs))


def eval_expr(e: Expr | str, point):
    """Plain evaluation; agrees with ``jet_eval(e, point, 0)``."""
    return jet_eval(e, point, 0).taylor[0]


def derivative(e: Expr | str, point, k: int):
    """``f^(k)(point)``."""
    return jet_eval(e, point, k).derivative(k)
