"""A small arithmetic expression language.

Grammar (lowest to highest precedence)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" unary)?          # right associative
    atom    := number | variable | func "(" args ")" | "(" expr ")"

Variables are positional, ``x0 .. x{d-1}``.  When parsing a modulus the
single variable is spelled ``t``.  The exponent of ``^`` must be a constant.

Functions: ``exp log abs sqrt max min`` plus ``sign`` and ``step`` (the
derivatives of ``abs``/``max``/``min``; both are 0 at 0, so derivatives
vanish at kinks).

Expressions are immutable trees; :func:`evaluate` works on single points and
on ``(n, d)`` batches.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import EvaluationError, InputError, ParseError

__all__ = [
    "Expression", "Num", "Var", "Neg", "BinOp", "Pow", "Call",
    "parse", "parse_modulus", "to_text", "evaluate", "differentiate",
    "gradient_exprs", "hessian_exprs", "variables", "arity", "substitute",
    "num", "var",
]

FUNCTIONS = {"exp": 1, "log": 1, "abs": 1, "sqrt": 1, "sign": 1, "step": 1,
             "max": 2, "min": 2}


class Expression:
    __slots__ = ()

    def __str__(self):
        return to_text(self)

    # Operator sugar, used when expressions are built programmatically.
    def __add__(self, other):
        return BinOp("+", self, _coerce(other))

    def __radd__(self, other):
        return BinOp("+", _coerce(other), self)

    def __sub__(self, other):
        return BinOp("-", self, _coerce(other))

    def __rsub__(self, other):
        return BinOp("-", _coerce(other), self)

    def __mul__(self, other):
        return BinOp("*", self, _coerce(other))

    def __rmul__(self, other):
        return BinOp("*", _coerce(other), self)

    def __truediv__(self, other):
        return BinOp("/", self, _coerce(other))

    def __rtruediv__(self, other):
        return BinOp("/", _coerce(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, other):
        return Pow(self, _coerce(other))


@dataclass(frozen=True, eq=True)
class Num(Expression):
    value: float


@dataclass(frozen=True, eq=True)
class Var(Expression):
    index: int
    name: str = ""

    @property
    def label(self):
        return self.name or f"x{self.index}"


@dataclass(frozen=True, eq=True)
class Neg(Expression):
    arg: Expression


@dataclass(frozen=True, eq=True)
class BinOp(Expression):
    op: str
    left: Expression
    right: Expression


@dataclass(frozen=True, eq=True)
class Pow(Expression):
    base: Expression
    exponent: Expression


@dataclass(frozen=True, eq=True)
class Call(Expression):
    func: str
    args: tuple


def num(value):
    """Literal node; negative values become ``Neg(Num(|v|))`` like the parser emits."""
    value = float(value)
    if value < 0:
        return Neg(Num(-value))
    return Num(value + 0.0)


def var(index, name=""):
    return Var(int(index), name)


def _coerce(value):
    return value if isinstance(value, Expression) else num(value)


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        mt = _TOKEN.match(text, pos)
        if mt is None or mt.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = mt.lastgroup
        start = mt.start(kind)
        tokens.append((kind, mt.group(kind), start))
        pos = mt.end()
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, text, d, t_index):
        self.text = text
        self.d = d
        self.t_index = t_index
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        raise ParseError(message, tok[2], self.text)

    def expect(self, value):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != value:
            what = "end of input" if tok[0] == "eof" else repr(tok[1])
            self.error(f"expected {value!r}, found {what}")
        return self.advance()

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "eof":
            self.error(f"unexpected token {self.peek()[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            tok = self.advance()
            exponent = self.unary()
            if variables(exponent):
                self.error("exponent of '^' must be a constant", tok)
            return Pow(base, exponent)
        return base

    def atom(self):
        tok = self.peek()
        kind, value, offset = tok
        if kind == "num":
            self.advance()
            return Num(float(value))
        if kind == "name":
            self.advance()
            if value in FUNCTIONS:
                self.expect("(")
                args = [self.expr()]
                while self.peek()[0] == "op" and self.peek()[1] == ",":
                    self.advance()
                    args.append(self.expr())
                close = self.peek()
                self.expect(")")
                if len(args) != FUNCTIONS[value]:
                    raise ParseError(
                        f"{value} takes {FUNCTIONS[value]} argument(s), got {len(args)}",
                        close[2], self.text)
                return Call(value, tuple(args))
            if value == "t" and self.t_index is not None:
                return Var(self.t_index, "t")
            mt = re.fullmatch(r"x(\d+)", value)
            if mt:
                idx = int(mt.group(1))
                if idx >= self.d:
                    raise ParseError(
                        f"variable {value} out of range for dimension {self.d}",
                        offset, self.text)
                return Var(idx)
            raise ParseError(f"unknown identifier {value!r}", offset, self.text)
        if kind == "op" and value == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if kind == "eof":
            self.error("unexpected end of input")
        self.error(f"unexpected token {value!r}")


def parse(text, d):
    """Parse ``text`` into an expression over ``x0 .. x{d-1}``."""
    if not isinstance(text, str):
        raise InputError("expression text must be a string")
    return _Parser(text, int(d), None).parse()


def parse_modulus(text):
    """Parse a one-variable expression in ``t``."""
    return _Parser(text, 0, 0).parse()


# ---------------------------------------------------------------------------
# Printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(e):
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    if isinstance(e, Pow):
        return 4
    return 5


def _fmt_num(v):
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_text(e):
    """Render ``e`` so that ``parse(to_text(e))`` rebuilds the same tree."""
    if isinstance(e, Num):
        if e.value < 0 or not math.isfinite(e.value):
            raise InputError(f"cannot print literal {e.value!r}")
        return _fmt_num(e.value)
    if isinstance(e, Var):
        return e.label
    if isinstance(e, Neg):
        inner = to_text(e.arg)
        return f"-({inner})" if _prec(e.arg) < 3 else f"-{inner}"
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        left = to_text(e.left)
        right = to_text(e.right)
        if _prec(e.left) < p:
            left = f"({left})"
        if _prec(e.right) <= p:
            right = f"({right})"
        if e.op in "+-":
            return f"{left} {e.op} {right}"
        return f"{left}{e.op}{right}"
    if isinstance(e, Pow):
        base = to_text(e.base)
        if _prec(e.base) <= 4:
            base = f"({base})"
        exponent = to_text(e.exponent)
        if _prec(e.exponent) < 3:
            exponent = f"({exponent})"
        return f"{base}^{exponent}"
    if isinstance(e, Call):
        return f"{e.func}({', '.join(to_text(a) for a in e.args)})"
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Structure queries

def variables(e):
    """Set of variable indices occurring in ``e``."""
    if isinstance(e, Var):
        return {e.index}
    if isinstance(e, Num):
        return set()
    out = set()
    for child in _children(e):
        out |= variables(child)
    return out


def arity(e):
    """Smallest point dimension at which ``e`` can be evaluated."""
    vs = variables(e)
    return max(vs) + 1 if vs else 0


def _children(e):
    if isinstance(e, Neg):
        return (e.arg,)
    if isinstance(e, BinOp):
        return (e.left, e.right)
    if isinstance(e, Pow):
        return (e.base, e.exponent)
    if isinstance(e, Call):
        return e.args
    return ()


def substitute(e, mapping):
    """Replace variables by expressions; ``mapping`` is ``{index: Expression}``."""
    if isinstance(e, Var):
        return mapping.get(e.index, e)
    if isinstance(e, Num):
        return e
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, mapping))
    if isinstance(e, BinOp):
        return BinOp(e.op, substitute(e.left, mapping), substitute(e.right, mapping))
    if isinstance(e, Pow):
        return Pow(substitute(e.base, mapping), e.exponent)
    if isinstance(e, Call):
        return Call(e.func, tuple(substitute(a, mapping) for a in e.args))
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Evaluation

def _fail(message, node, mask):
    idx = int(np.flatnonzero(np.atleast_1d(mask))[0])
    raise EvaluationError(message, to_text(node), idx)


def _eval(e, X):
    if isinstance(e, Num):
        return np.full(X.shape[0], e.value)
    if isinstance(e, Var):
        if e.index >= X.shape[1]:
            raise InputError(f"point dimension {X.shape[1]} too small for {e.label}")
        return X[:, e.index]
    if isinstance(e, Neg):
        return -_eval(e.arg, X)
    if isinstance(e, BinOp):
        a = _eval(e.left, X)
        b = _eval(e.right, X)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        bad = b == 0
        if bad.any():
            _fail("division by zero", e, bad)
        return a / b
    if isinstance(e, Pow):
        a = _eval(e.base, X)
        c = float(_eval(e.exponent, np.zeros((1, 0)))[0])
        if not float(c).is_integer():
            bad = a < 0
            if bad.any():
                _fail("negative base with non-integer exponent", e, bad)
        if c < 0:
            bad = a == 0
            if bad.any():
                _fail("zero base with negative exponent", e, bad)
        with np.errstate(over="ignore"):
            return np.power(a, c)
    if isinstance(e, Call):
        vals = [_eval(a, X) for a in e.args]
        u = vals[0]
        f = e.func
        if f == "exp":
            with np.errstate(over="ignore"):
                return np.exp(u)
        if f == "log":
            bad = u <= 0
            if bad.any():
                _fail("log of nonpositive argument", e, bad)
            return np.log(u)
        if f == "sqrt":
            bad = u < 0
            if bad.any():
                _fail("sqrt of negative argument", e, bad)
            return np.sqrt(u)
        if f == "abs":
            return np.abs(u)
        if f == "sign":
            return np.sign(u)
        if f == "step":
            return (u > 0).astype(float)
        if f == "max":
            return np.maximum(u, vals[1])
        if f == "min":
            return np.minimum(u, vals[1])
    raise TypeError(f"not an expression: {e!r}")


def evaluate(e, point):
    """Evaluate at a point (returns float) or at rows of a ``(n, d)`` batch.

    Raises :class:`EvaluationError` for logs/square roots of out-of-domain
    arguments and divisions by zero instead of producing NaN.
    """
    X = np.asarray(point, dtype=float)
    single = X.ndim <= 1
    X = np.atleast_2d(X) if X.ndim == 1 else X.reshape(1, -1) if X.ndim == 0 else X
    out = _eval(e, X)
    return float(out[0]) if single else out


# ---------------------------------------------------------------------------
# Differentiation

def _is_num(e, value=None):
    return isinstance(e, Num) and (value is None or e.value == value)


def _const_value(e):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Neg) and isinstance(e.arg, Num):
        return -e.arg.value
    return None


def _add(a, b):
    ca, cb = _const_value(a), _const_value(b)
    if ca is not None and cb is not None:
        return num(ca + cb)
    if ca == 0:
        return b
    if cb == 0:
        return a
    if isinstance(b, Neg):
        return _sub(a, b.arg)
    return BinOp("+", a, b)


def _sub(a, b):
    ca, cb = _const_value(a), _const_value(b)
    if ca is not None and cb is not None:
        return num(ca - cb)
    if cb == 0:
        return a
    if ca == 0:
        return _neg(b)
    if isinstance(b, Neg):
        return _add(a, b.arg)
    return BinOp("-", a, b)


def _neg(a):
    ca = _const_value(a)
    if ca is not None:
        return num(-ca)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _mul(a, b):
    ca, cb = _const_value(a), _const_value(b)
    if ca is not None and cb is not None:
        return num(ca * cb)
    if ca == 0 or cb == 0:
        return Num(0.0)
    if ca == 1:
        return b
    if cb == 1:
        return a
    if ca == -1:
        return _neg(b)
    if cb == -1:
        return _neg(a)
    return BinOp("*", a, b)


def _div(a, b):
    ca, cb = _const_value(a), _const_value(b)
    if ca == 0:
        return Num(0.0)
    if cb == 1:
        return a
    if ca is not None and cb is not None and cb != 0:
        return num(ca / cb)
    return BinOp("/", a, b)


def _pow(base, c):
    if c == 0:
        return Num(1.0)
    if c == 1:
        return base
    return Pow(base, num(c))


@lru_cache(maxsize=4096)
def differentiate(e, index):
    """Symbolic partial derivative of ``e`` with respect to variable ``index``."""
    if isinstance(e, Num):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0 if e.index == index else 0.0)
    if index not in variables(e):
        return Num(0.0)
    if isinstance(e, Neg):
        return _neg(differentiate(e.arg, index))
    if isinstance(e, BinOp):
        a, b = e.left, e.right
        da, db = differentiate(a, index), differentiate(b, index)
        if e.op == "+":
            return _add(da, db)
        if e.op == "-":
            return _sub(da, db)
        if e.op == "*":
            return _add(_mul(da, b), _mul(a, db))
        # quotient rule
        return _sub(_div(da, b), _div(_mul(a, db), _pow(b, 2.0)))
    if isinstance(e, Pow):
        c = float(_eval(e.exponent, np.zeros((1, 0)))[0])
        du = differentiate(e.base, index)
        return _mul(_mul(num(c), _pow(e.base, c - 1.0)), du)
    if isinstance(e, Call):
        u = e.args[0]
        du = differentiate(u, index)
        f = e.func
        if f == "exp":
            return _mul(e, du)
        if f == "log":
            return _div(du, u)
        if f == "sqrt":
            return _div(du, _mul(Num(2.0), e))
        if f == "abs":
            return _mul(Call("sign", (u,)), du)
        if f in ("sign", "step"):
            return Num(0.0)
        v = e.args[1]
        dv = differentiate(v, index)
        if f == "max":
            return _add(_mul(Call("step", (_sub(u, v),)), du),
                        _mul(Call("step", (_sub(v, u),)), dv))
        if f == "min":
            return _add(_mul(Call("step", (_sub(v, u),)), du),
                        _mul(Call("step", (_sub(u, v),)), dv))
    raise TypeError(f"not an expression: {e!r}")


def gradient_exprs(e, d):
    return tuple(differentiate(e, i) for i in range(d))


def hessian_exprs(e, d):
    grad = gradient_exprs(e, d)
    return tuple(tuple(differentiate(g, j) for j in range(d)) for g in grad)
