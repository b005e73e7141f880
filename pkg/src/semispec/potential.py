"""Potential expressions: parser, printer, second-order jets and built-ins.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := ('-')? power
    power  := atom ('^' uint)?
    atom   := number | 'x' | func '(' expr ')' | '(' expr ')'
    func   := exp | sin | cos | cosh | sinh
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

FUNCTIONS = ("exp", "sin", "cos", "cosh", "sinh")


class PotentialError(ValueError):
    """Base class for expression errors."""


class ParseError(PotentialError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ParseError):
    pass


class ExponentError(ParseError):
    pass


class EvaluationDomainError(PotentialError, ArithmeticError):
    pass


# ---------------------------------------------------------------- AST

@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Const, Var, Neg, BinOp, Pow, Call]


# ---------------------------------------------------------------- parser

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def offset(self, pos: int | None = None) -> int:
        p = self.pos if pos is None else pos
        return len(self.text[:p].encode("utf-8"))

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r\n":
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def fail(self, msg: str, pos: int | None = None, cls=ParseError):
        raise cls(msg, self.offset(pos))

    def parse(self) -> Node:
        self.skip()
        if self.pos >= len(self.text):
            self.fail("empty expression")
        node = self.expr()
        if self.peek():
            self.fail(f"unexpected {self.peek()!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek() in ("*", "/"):
            op = self.text[self.pos]
            self.pos += 1
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        if self.peek() == "-":
            self.pos += 1
            return Neg(self.power())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            self.skip()
            start = self.pos
            j = start
            while j < len(self.text) and self.text[j].isdigit():
                j += 1
            if j == start:
                if self.peek() in ("-", "+", "."):
                    self.fail("exponent must be a non-negative integer", cls=ExponentError)
                self.fail("expected integer exponent")
            if j < len(self.text) and self.text[j] in ".eE":
                self.fail("exponent must be a non-negative integer", start, ExponentError)
            self.pos = j
            return Pow(base, int(self.text[start:j]))
        return base

    def atom(self) -> Node:
        c = self.peek()
        start = self.pos
        if not c:
            self.fail("unexpected end of input")
        if c.isdigit() or c == ".":
            return Const(self.number())
        if c == "(":
            self.pos += 1
            node = self.expr()
            if self.peek() != ")":
                self.fail("expected ')'")
            self.pos += 1
            return node
        if c.isalpha() or c == "_":
            j = start
            while j < len(self.text) and (self.text[j].isalnum() or self.text[j] == "_"):
                j += 1
            name = self.text[start:j]
            self.pos = j
            if name == "x":
                return Var()
            if name in FUNCTIONS:
                if self.peek() != "(":
                    self.fail(f"expected '(' after {name}")
                self.pos += 1
                arg = self.expr()
                if self.peek() != ")":
                    self.fail("expected ')'")
                self.pos += 1
                return Call(name, arg)
            self.fail(f"unknown identifier {name!r}", start, UnknownIdentifierError)
        self.fail(f"unexpected {c!r}")

    def number(self) -> float:
        t, i = self.text, self.pos
        j = i
        while j < len(t) and t[j].isdigit():
            j += 1
        if j < len(t) and t[j] == ".":
            j += 1
            while j < len(t) and t[j].isdigit():
                j += 1
        if j == i + 1 and t[i] == ".":
            self.fail("malformed number", i)
        if j < len(t) and t[j] in "eE":
            k = j + 1
            if k < len(t) and t[k] in "+-":
                k += 1
            if k < len(t) and t[k].isdigit():
                while k < len(t) and t[k].isdigit():
                    k += 1
                j = k
            else:
                self.fail("malformed exponent in number", k)
        self.pos = j
        return float(t[i:j])


# ---------------------------------------------------------------- printer

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_number(v: float) -> str:
    s = repr(float(v))
    if s.endswith(".0"):
        s = s[:-2]
    return s


def to_source(node: Node) -> str:
    return _print(node, 0)


def _print(node: Node, ctx: int) -> str:
    # ctx: 0 expr, 1 right of +/-, 2 term, 3 right of * or /, 4 power base
    if isinstance(node, Const):
        return _fmt_number(node.value)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Call):
        return f"{node.func}({_print(node.arg, 0)})"
    if isinstance(node, Pow):
        s = f"{_print(node.base, 4)}^{node.exponent}"
        # the grammar has no chained powers, so a power used as a base is wrapped
        return f"({s})" if ctx == 4 else s
    if isinstance(node, Neg):
        inner = f"-{_print(node.arg, 4)}"
        # a negation is a factor; only a power base needs parentheses around it
        return f"({inner})" if ctx == 4 else inner
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        if p == 1:
            s = f"{_print(node.left, 0)} {node.op} {_print(node.right, 1)}"
            # an additive node inside a term, power or right operand needs parentheses
            return f"({s})" if ctx >= 1 else s
        s = f"{_print(node.left, 2)}{node.op}{_print(node.right, 3)}"
        return f"({s})" if ctx >= 3 else s
    raise TypeError(node)


# ---------------------------------------------------------------- jets

@dataclass(frozen=True)
class Jet2:
    """Value with first and second derivative; components may be arrays."""

    v: object
    d1: object
    d2: object

    @staticmethod
    def const(c, like=None):
        z = 0.0 if like is None else np.zeros_like(like, dtype=float)
        return Jet2(c + z, z * 1.0, z * 1.0)

    @staticmethod
    def variable(x):
        x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
        one = np.ones_like(x) if np.ndim(x) else 1.0
        return Jet2(x, one, 0.0 * one)

    def __add__(self, o):
        o = _as_jet(o)
        return Jet2(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.v, -self.d1, -self.d2)

    def __sub__(self, o):
        return self + (-_as_jet(o))

    def __rsub__(self, o):
        return _as_jet(o) - self

    def __mul__(self, o):
        o = _as_jet(o)
        return Jet2(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        )

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = _as_jet(o)
        q0 = self.v / o.v
        q1 = (self.d1 - q0 * o.d1) / o.v
        q2 = (self.d2 - 2.0 * q1 * o.d1 - q0 * o.d2) / o.v
        return Jet2(q0, q1, q2)

    def __rtruediv__(self, o):
        return _as_jet(o) / self

    def __pow__(self, n: int):
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise ValueError("only non-negative integer powers")
        result = Jet2.const(1.0, self.v if np.ndim(self.v) else None)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def apply(self, f, fp, fpp):
        """Chain rule for a scalar function with derivatives fp, fpp."""
        a, b, c = f(self.v), fp(self.v), fpp(self.v)
        return Jet2(a, b * self.d1, b * self.d2 + c * self.d1 * self.d1)


def _as_jet(o) -> Jet2:
    return o if isinstance(o, Jet2) else Jet2(o, 0.0, 0.0)


_JET_FUNCS = {
    "exp": (np.exp, np.exp, np.exp),
    "sin": (np.sin, np.cos, lambda t: -np.sin(t)),
    "cos": (np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t)),
    "sinh": (np.sinh, np.cosh, np.sinh),
    "cosh": (np.cosh, np.sinh, np.cosh),
}


def _eval_jet(node: Node, x: Jet2) -> Jet2:
    if isinstance(node, Const):
        return Jet2(node.value, 0.0, 0.0)
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -_eval_jet(node.arg, x)
    if isinstance(node, Pow):
        return _eval_jet(node.base, x) ** node.exponent
    if isinstance(node, Call):
        return _eval_jet(node.arg, x).apply(*_JET_FUNCS[node.func])
    a, b = _eval_jet(node.left, x), _eval_jet(node.right, x)
    if node.op == "/" and np.any(np.asarray(b.v) == 0.0):
        raise EvaluationDomainError("division by zero", 0)
    return {"+": a.__add__, "-": a.__sub__, "*": a.__mul__, "/": a.__truediv__}[node.op](b)


def _codegen(node: Node, lib: str) -> str:
    if isinstance(node, Const):
        return repr(float(node.value))
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Neg):
        return f"(-{_codegen(node.arg, lib)})"
    if isinstance(node, Pow):
        return f"({_codegen(node.base, lib)}**{node.exponent})"
    if isinstance(node, Call):
        return f"{lib}.{node.func}({_codegen(node.arg, lib)})"
    return f"({_codegen(node.left, lib)} {node.op} {_codegen(node.right, lib)})"


# ---------------------------------------------------------------- model

class PotentialModel:
    """Immutable parsed potential with fast value paths and exact jets."""

    __slots__ = ("ast", "source", "tag", "_scalar", "_vector")

    def __init__(self, ast: Node, tag: str | None = None):
        object.__setattr__(self, "ast", ast)
        object.__setattr__(self, "source", to_source(ast))
        object.__setattr__(self, "tag", tag)
        scalar = eval(f"lambda x: {_codegen(ast, 'math')}", {"math": math})
        vector = eval(f"lambda x: {_codegen(ast, 'np')} + 0.0*x", {"np": np})
        object.__setattr__(self, "_scalar", scalar)
        object.__setattr__(self, "_vector", vector)

    def __setattr__(self, *_):
        raise AttributeError("PotentialModel is immutable")

    def __repr__(self):
        t = f", tag={self.tag!r}" if self.tag else ""
        return f"PotentialModel({self.source!r}{t})"

    def __eq__(self, other):
        return isinstance(other, PotentialModel) and self.ast == other.ast

    def __hash__(self):
        return hash(self.ast)

    def __reduce__(self):
        return (_rebuild, (self.source, self.tag))

    def value(self, x):
        """v(x) for a float or an array."""
        try:
            if np.ndim(x) == 0:
                return self._scalar(float(x))
            with np.errstate(divide="raise", over="raise", invalid="raise"):
                return self._vector(np.asarray(x, dtype=float))
        except (ZeroDivisionError, OverflowError, FloatingPointError, ValueError) as exc:
            raise EvaluationDomainError(f"cannot evaluate {self.source} ({exc})", 0) from None

    __call__ = value

    def jet(self, x) -> Jet2:
        try:
            with np.errstate(divide="raise", over="raise", invalid="raise"):
                j = _eval_jet(self.ast, Jet2.variable(x))
        except (ZeroDivisionError, OverflowError, FloatingPointError) as exc:
            raise EvaluationDomainError(f"cannot evaluate {self.source} ({exc})", 0) from None
        if np.ndim(x) == 0:
            return Jet2(float(j.v), float(j.d1), float(j.d2))
        shape = np.shape(x)
        return Jet2(*(np.broadcast_to(np.asarray(c, dtype=float), shape).copy() for c in (j.v, j.d1, j.d2)))

    def d3(self, x, h: float = 1e-4):
        """Third derivative by central differences of the exact second derivative."""
        return (self.jet(x + h).d2 - self.jet(x - h).d2) / (2 * h)


def _rebuild(source, tag):
    return PotentialModel(_Parser(source).parse(), tag)


def parse_potential(text: str) -> PotentialModel:
    if not isinstance(text, str) or not text.strip():
        raise ParseError("empty expression", 0)
    return PotentialModel(_Parser(text).parse())


def evaluate(model: PotentialModel, x) -> Jet2:
    return model.jet(x)


BUILTINS = {
    "harmonic": "x^2",
    "quartic": "x^4",
    "double_well": "(x^2-1)^2",
}


def builtin(name: str, c: float | None = None) -> PotentialModel:
    """Benchmark potentials. ``tilted_double_well`` takes the tilt ``c``."""
    if name == "tilted_double_well":
        c = 0.1 if c is None else float(c)
        if not math.isfinite(c):
            raise PotentialError("tilt must be finite")
        text = f"(x^2-1)^2 + {_fmt_number(c)}*x" if c >= 0 else f"(x^2-1)^2 - {_fmt_number(-c)}*x"
        return PotentialModel(parse_potential(text).ast, f"tilted_double_well({_fmt_number(c)})")
    if name not in BUILTINS:
        raise PotentialError(f"unknown builtin {name!r}")
    return PotentialModel(parse_potential(BUILTINS[name]).ast, name)

