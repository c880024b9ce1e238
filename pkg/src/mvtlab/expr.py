"""Closed-form expressions of one real variable: parsing, evaluation,
symbolic differentiation.

The grammar (whitespace insignificant)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-'? power
    power  := atom ('^' '-'? number)?
    atom   := number | 'x' | 'pi' | 'e' | ident '(' expr ')' | '(' expr ')'
    ident  := 'sin' | 'cos' | 'exp' | 'log' | 'sqrt' | 'sinh' | 'cosh' | 'tanh'

Precedence is pow > unary minus > mul/div > add/sub, so ``-x^2`` is
``-(x^2)``.  Exponents must be numeric constants; ``pi`` and ``e`` fold to
doubles at parse time.  Evaluation either returns a finite float or raises
:class:`DomainError`; non-finite values never escape silently.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Callable


class ParseError(ValueError):
    """Malformed source text; ``offset`` is the byte offset of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class DomainError(ArithmeticError):
    """Evaluation left the real domain (log/sqrt of a negative, division
    by zero, overflow past the float range)."""


# ---------------------------------------------------------------------------
# Expression nodes


@dataclass(frozen=True)
class Expr:
    def __str__(self) -> str:
        return to_source(self)


@dataclass(frozen=True)
class Constant(Expr):
    value: float


@dataclass(frozen=True)
class Variable(Expr):
    pass


UNARY_OPS = ("neg", "sin", "cos", "exp", "log", "sqrt", "sinh", "cosh", "tanh")
BINARY_OPS = ("add", "sub", "mul", "div", "pow")


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    child: Expr

    def __post_init__(self):
        if self.op not in UNARY_OPS:
            raise ValueError(f"unknown unary op {self.op!r}")


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown binary op {self.op!r}")
        if self.op == "pow" and not isinstance(self.right, Constant):
            raise ValueError("pow exponent must be a constant")


X = Variable()


# ---------------------------------------------------------------------------
# Construction helpers.  Folding is limited to constant arithmetic and the
# identities 0*e -> 0, 1*e -> e, e+0 -> e, e-0 -> e, e/1 -> e.


def const(v: float) -> Constant:
    return Constant(float(v))


def _is_const(e: Expr, v: float | None = None) -> bool:
    return isinstance(e, Constant) and (v is None or e.value == v)


def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Constant(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Binary("add", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Constant(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    return Binary("sub", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Constant(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return Constant(0.0)
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return Binary("mul", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0):
        return Constant(0.0)
    if _is_const(b, 1.0):
        return a
    return Binary("div", a, b)


def neg(a: Expr) -> Expr:
    if _is_const(a):
        return Constant(-a.value)
    return Unary("neg", a)


def powc(base: Expr, exponent: float) -> Expr:
    e = float(exponent)
    if e == 1.0:
        return base
    if e == 0.0:
        return Constant(1.0)
    if _is_const(base):
        return Constant(math.pow(base.value, e))
    return Binary("pow", base, Constant(e))


def fn(name: str, arg: Expr) -> Expr:
    if name not in UNARY_OPS or name == "neg":
        raise ValueError(f"unknown function {name!r}")
    return Unary(name, arg)


# ---------------------------------------------------------------------------
# Evaluation


_UNARY_FUNCS = {
    "neg": lambda v: -v,
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "tanh": math.tanh,
}


def evaluate(e: Expr, x: float) -> float:
    """Evaluate ``e`` at ``x``; raise :class:`DomainError` naming the
    offending node if the value leaves the real line."""
    try:
        return _eval(e, x)
    except (ValueError, OverflowError, ZeroDivisionError) as exc:
        if exc.args and isinstance(exc.args[-1], Expr):
            node, msg = exc.args[-1], exc.args[0]
            raise DomainError(
                f"{msg} in node '{to_source(node)}' at x={x!r}") from None
        raise DomainError(f"{exc} at x={x!r}") from None


def _eval(e: Expr, x: float) -> float:
    if isinstance(e, Constant):
        return e.value
    if isinstance(e, Variable):
        return x
    if isinstance(e, Unary):
        v = _eval(e.child, x)
        try:
            r = _UNARY_FUNCS[e.op](v)
        except (ValueError, OverflowError) as exc:
            raise type(exc)(str(exc.args[0]) if exc.args else "domain error", e)
        if not math.isfinite(r):
            raise OverflowError("non-finite result", e)
        return r
    assert isinstance(e, Binary)
    a = _eval(e.left, x)
    b = _eval(e.right, x)
    try:
        if e.op == "add":
            r = a + b
        elif e.op == "sub":
            r = a - b
        elif e.op == "mul":
            r = a * b
        elif e.op == "div":
            r = a / b
        else:
            r = math.pow(a, b)
    except (ValueError, OverflowError, ZeroDivisionError) as exc:
        raise type(exc)(str(exc.args[0]) if exc.args else "domain error", e)
    if not math.isfinite(r):
        raise OverflowError("non-finite result", e)
    return r


def as_callable(e: Expr) -> Callable[[float], float]:
    """Compile ``e`` into a plain float->float closure.

    Faster than :func:`evaluate` on hot paths (sweeps, quadrature); raises
    :class:`DomainError` like the interpreter but without node attribution.
    """
    body = _compile(e)

    def call(x: float) -> float:
        try:
            r = body(x)
        except (ValueError, OverflowError, ZeroDivisionError) as exc:
            raise DomainError(f"{exc} at x={x!r}") from None
        if not math.isfinite(r):
            raise DomainError(f"non-finite value at x={x!r}")
        return r

    return call


def _compile(e: Expr) -> Callable[[float], float]:
    if isinstance(e, Constant):
        v = e.value
        return lambda x: v
    if isinstance(e, Variable):
        return lambda x: x
    if isinstance(e, Unary):
        c = _compile(e.child)
        f = _UNARY_FUNCS[e.op]
        return lambda x: f(c(x))
    assert isinstance(e, Binary)
    l = _compile(e.left)
    r = _compile(e.right)
    op = e.op
    if op == "add":
        return lambda x: l(x) + r(x)
    if op == "sub":
        return lambda x: l(x) - r(x)
    if op == "mul":
        return lambda x: l(x) * r(x)
    if op == "div":
        return lambda x: l(x) / r(x)
    p = e.right.value  # pow exponent, constant by construction
    return lambda x: math.pow(l(x), p)


# ---------------------------------------------------------------------------
# Printing


_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        if e.op in ("add", "sub"):
            return _PREC_ADD
        if e.op in ("mul", "div"):
            return _PREC_MUL
        return _PREC_POW
    if isinstance(e, Unary) and e.op == "neg":
        return _PREC_NEG
    if isinstance(e, Constant) and (e.value < 0 or math.copysign(1, e.value) < 0):
        return _PREC_NEG  # negative literals print with a leading minus
    return _PREC_ATOM


def to_source(e: Expr) -> str:
    """Render ``e`` in the input grammar; ``parse(to_source(e))`` evaluates
    identically to ``e``."""
    if isinstance(e, Constant):
        return repr(e.value)
    if isinstance(e, Variable):
        return "x"
    if isinstance(e, Unary):
        if e.op == "neg":
            inner = to_source(e.child)
            if _prec(e.child) <= _PREC_NEG:
                inner = f"({inner})"
            return f"-{inner}"
        return f"{e.op}({to_source(e.child)})"
    assert isinstance(e, Binary)
    if e.op == "pow":
        base = to_source(e.left)
        if _prec(e.left) < _PREC_ATOM:
            base = f"({base})"
        return f"{base}^{repr(e.right.value)}"
    sym = {"add": "+", "sub": "-", "mul": "*", "div": "/"}[e.op]
    own = _prec(e)
    ls = to_source(e.left)
    if _prec(e.left) < own:
        ls = f"({ls})"
    rs = to_source(e.right)
    if _prec(e.right) <= own:  # keep a-(b+c), a/(b*c) exact
        rs = f"({rs})"
    return f"{ls} {sym} {rs}"


# ---------------------------------------------------------------------------
# Parsing


_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "sinh", "cosh", "tanh")
_CONSTANTS = {"pi": math.pi, "e": math.e}


class _Parser:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def take(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch: str):
        if not self.take(ch):
            raise ParseError(f"expected {ch!r}", self.pos)

    def number(self) -> float:
        self.skip_ws()
        m = _NUMBER_RE.match(self.src, self.pos)
        if not m:
            raise ParseError("expected a numeric constant", self.pos)
        self.pos = m.end()
        return float(m.group())

    def expr(self) -> Expr:
        node = self.term()
        while True:
            if self.take("+"):
                node = Binary("add", node, self.term())
            elif self.take("-"):
                node = Binary("sub", node, self.term())
            else:
                return node

    def term(self) -> Expr:
        node = self.factor()
        while True:
            if self.take("*"):
                node = Binary("mul", node, self.factor())
            elif self.take("/"):
                node = Binary("div", node, self.factor())
            else:
                return node

    def factor(self) -> Expr:
        if self.take("-"):
            return neg(self.power())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.take("^"):
            here = self.pos
            sign = -1.0 if self.take("-") else 1.0
            try:
                value = self.number()
            except ParseError:
                raise ParseError("exponent must be a numeric constant",
                                 here) from None
            return Binary("pow", base, Constant(sign * value))
        return base

    def atom(self) -> Expr:
        ch = self.peek()
        here = self.pos
        if ch == "(":
            self.pos += 1
            node = self.expr()
            self.expect(")")
            return node
        if ch.isdigit():
            return Constant(self.number())
        m = _IDENT_RE.match(self.src, self.pos)
        if m:
            name = m.group()
            self.pos = m.end()
            if name == "x":
                return X
            if name in _CONSTANTS:
                return Constant(_CONSTANTS[name])
            if name in _FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(name, arg)
            raise ParseError(f"unknown identifier {name!r}", here)
        raise ParseError("expected a number, 'x', or a function call", here)


def parse(source: str) -> Expr:
    """Parse ``source`` into an :class:`Expr`; :class:`ParseError` carries
    the byte offset of the first fault."""
    p = _Parser(source)
    node = p.expr()
    p.skip_ws()
    if p.pos != len(source):
        raise ParseError("trailing input", p.pos)
    return node


# ---------------------------------------------------------------------------
# Differentiation


def differentiate(e: Expr) -> Expr:
    """Symbolic derivative of ``e`` with respect to x."""
    if isinstance(e, Constant):
        return Constant(0.0)
    if isinstance(e, Variable):
        return Constant(1.0)
    if isinstance(e, Unary):
        du = differentiate(e.child)
        u = e.child
        if e.op == "neg":
            return neg(du)
        if e.op == "sin":
            return mul(Unary("cos", u), du)
        if e.op == "cos":
            return mul(neg(Unary("sin", u)), du)
        if e.op == "exp":
            return mul(Unary("exp", u), du)
        if e.op == "log":
            return div(du, u)
        if e.op == "sqrt":
            return div(du, mul(Constant(2.0), Unary("sqrt", u)))
        if e.op == "sinh":
            return mul(Unary("cosh", u), du)
        if e.op == "cosh":
            return mul(Unary("sinh", u), du)
        # tanh' = 1 - tanh^2
        return mul(sub(Constant(1.0), powc(Unary("tanh", u), 2.0)), du)
    assert isinstance(e, Binary)
    if e.op == "pow":
        n = e.right.value
        return mul(mul(Constant(n), powc(e.left, n - 1.0)), differentiate(e.left))
    da = differentiate(e.left)
    db = differentiate(e.right)
    if e.op == "add":
        return add(da, db)
    if e.op == "sub":
        return sub(da, db)
    if e.op == "mul":
        return add(mul(da, e.right), mul(e.left, db))
    # quotient rule
    return div(sub(mul(da, e.right), mul(e.left, db)), powc(e.right, 2.0))


# ---------------------------------------------------------------------------
# Smooth bundles


@dataclass(frozen=True, eq=False)
class SmoothFn:
    """An expression together with its first three symbolic derivatives."""

    d0: Expr
    d1: Expr
    d2: Expr
    d3: Expr
    label: str = "f"

    @cached_property
    def _layers(self) -> tuple[Callable[[float], float], ...]:
        return tuple(as_callable(d) for d in (self.d0, self.d1, self.d2, self.d3))

    def layer(self, order: int) -> Callable[[float], float]:
        """Compiled evaluator for the ``order``-th derivative (0..3)."""
        return self._layers[order]

    def __call__(self, x: float, order: int = 0) -> float:
        return self._layers[order](x)

    def derivative(self) -> "SmoothFn":
        """The derivative as its own smooth bundle (one fresh layer)."""
        return SmoothFn(self.d1, self.d2, self.d3, differentiate(self.d3),
                        label=self.label + "'")

    def __repr__(self) -> str:
        return f"SmoothFn({self.label}: {to_source(self.d0)})"


def smooth(e: Expr | str, label: str = "f") -> SmoothFn:
    """Bundle ``e`` with three successive symbolic derivatives."""
    if isinstance(e, str):
        e = parse(e)
    d1 = differentiate(e)
    d2 = differentiate(d1)
    d3 = differentiate(d2)
    return SmoothFn(e, d1, d2, d3, label=label)
