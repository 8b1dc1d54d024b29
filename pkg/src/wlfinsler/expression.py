"""A small arithmetic language for user-supplied Lagrangians and weights.

Grammar (``^`` binds tighter than unary minus and is right-associative)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | '+' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Symbols are ``x0..x{d-1}`` and ``v0..v{d-1}`` plus the constant ``pi``.
Compiled evaluators accept floats, numpy arrays or :class:`~wlfinsler.autodiff.Jet`
coordinates, so one expression serves both plain evaluation and
differentiation.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import autodiff as ad

__all__ = [
    "ExpressionError",
    "Num",
    "Sym",
    "Unary",
    "Binary",
    "Call",
    "ModelExpression",
    "parse_expression",
    "pretty",
]


class ExpressionError(ValueError):
    """Parse or resolution failure; ``offset`` is a byte offset into the source."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        where = f" at offset {offset}" if offset is not None else ""
        super().__init__(message + where)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Node = Union[Num, Sym, Unary, Binary, Call]

_FUNCTIONS: dict[str, tuple[int, Callable]] = {
    "exp": (1, ad.exp),
    "log": (1, ad.log),
    "sqrt": (1, ad.sqrt),
    "sin": (1, ad.sin),
    "cos": (1, ad.cos),
    "sinh": (1, ad.sinh),
    "cosh": (1, ad.cosh),
    "atan2": (2, ad.atan2),
    "pow": (2, None),
}
_CONSTANTS = {"pi": math.pi}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(source: str):
    tokens = []
    pos = 0
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(source[pos:]) - len(source[pos:].lstrip()))
            raise ExpressionError(f"unexpected character {source[bad]!r}", bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str, dim: int | None):
        self.tokens = _tokenize(source)
        self.i = 0
        self.dim = dim
        self.last_op_offset: int | None = None

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, value, off = self.take()
        if value != text:
            raise ExpressionError(f"expected {text!r}, found {value or 'end of input'!r}", off)

    def fail_operand(self, off):
        # report the dangling operator when one precedes the bad operand
        where = self.last_op_offset if self.last_op_offset is not None else off
        raise ExpressionError("missing operand", where)

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, off = self.take()
            self.last_op_offset = off
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, off = self.take()
            self.last_op_offset = off
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        kind, value, off = self.peek()
        if kind == "op" and value in ("-", "+"):
            self.take()
            operand = self.unary()
            return Unary("-", operand) if value == "-" else operand
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            _, _, off = self.take()
            self.last_op_offset = off
            return Binary("^", base, self.unary())
        return base

    def atom(self):
        kind, value, off = self.take()
        if kind == "num":
            self.last_op_offset = None
            return Num(float(value))
        if kind == "name":
            self.last_op_offset = None
            if self.peek()[1] == "(":
                return self.call(value, off)
            return self.symbol(value, off)
        if value == "(":
            self.last_op_offset = None
            node = self.expr()
            self.expect(")")
            return node
        self.fail_operand(off)

    def call(self, name, off):
        if name not in _FUNCTIONS:
            raise ExpressionError(f"unknown function {name!r}", off)
        self.take()
        args = [self.expr()]
        while self.peek()[1] == ",":
            self.take()
            args.append(self.expr())
        self.expect(")")
        arity = _FUNCTIONS[name][0]
        if len(args) != arity:
            raise ExpressionError(f"{name} takes {arity} argument(s), got {len(args)}", off)
        return Call(name, tuple(args))

    def symbol(self, name, off):
        if name in _CONSTANTS:
            return Sym(name)
        m = re.fullmatch(r"([xv])(\d+)", name)
        if m is None:
            raise ExpressionError(f"unknown symbol {name!r}", off)
        if self.dim is not None and int(m.group(2)) >= self.dim:
            raise ExpressionError(f"symbol {name!r} exceeds dimension {self.dim}", off)
        return Sym(name)


def pretty(node: Node) -> str:
    """Fully parenthesized rendering; parsing it gives back ``node``."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Unary):
        return f"(-{pretty(node.operand)})"
    if isinstance(node, Binary):
        return f"({pretty(node.left)} {node.op} {pretty(node.right)})"
    return f"{node.name}({', '.join(pretty(a) for a in node.args)})"


def _symbols(node: Node, acc: set) -> set:
    if isinstance(node, Sym):
        acc.add(node.name)
    elif isinstance(node, Unary):
        _symbols(node.operand, acc)
    elif isinstance(node, Binary):
        _symbols(node.left, acc)
        _symbols(node.right, acc)
    elif isinstance(node, Call):
        for a in node.args:
            _symbols(a, acc)
    return acc


def _pow(a, b):
    if isinstance(b, (int, float)) and float(b).is_integer():
        return a ** int(b)
    if isinstance(a, ad.Jet) or isinstance(b, ad.Jet):
        return ad.exp(b * ad.log(a))
    return np.power(a, b)


def _compile(node: Node) -> Callable:
    if isinstance(node, Num):
        value = node.value
        return lambda x, v: value
    if isinstance(node, Sym):
        if node.name in _CONSTANTS:
            c = _CONSTANTS[node.name]
            return lambda x, v: c
        idx = int(node.name[1:])
        if node.name[0] == "x":
            return lambda x, v: x[idx]
        return lambda x, v: v[idx]
    if isinstance(node, Unary):
        f = _compile(node.operand)
        return lambda x, v: -f(x, v)
    if isinstance(node, Binary):
        lf, rf = _compile(node.left), _compile(node.right)
        if node.op == "+":
            return lambda x, v: lf(x, v) + rf(x, v)
        if node.op == "-":
            return lambda x, v: lf(x, v) - rf(x, v)
        if node.op == "*":
            return lambda x, v: lf(x, v) * rf(x, v)
        if node.op == "/":
            return lambda x, v: lf(x, v) / rf(x, v)
        if isinstance(node.right, Num) and node.right.value.is_integer():
            k = int(node.right.value)
            return lambda x, v: lf(x, v) ** k
        return lambda x, v: _pow(lf(x, v), rf(x, v))
    fns = [_compile(a) for a in node.args]
    if node.name == "pow":
        return lambda x, v: _pow(fns[0](x, v), fns[1](x, v))
    fn = _FUNCTIONS[node.name][1]
    if len(fns) == 1:
        f0 = fns[0]
        return lambda x, v: fn(f0(x, v))
    f0, f1 = fns
    return lambda x, v: fn(f0(x, v), f1(x, v))


@dataclass(frozen=True)
class ModelExpression:
    """Parsed source plus a compiled evaluator ``f(x, v)``."""

    source: str
    ast: Node

    @property
    def symbols(self) -> frozenset:
        return frozenset(_symbols(self.ast, set()))

    def __call__(self, x, v):
        return _compile_cached(self.ast)(x, v)

    def pretty(self) -> str:
        return pretty(self.ast)


_CACHE: dict = {}


def _compile_cached(ast):
    fn = _CACHE.get(ast)
    if fn is None:
        fn = _CACHE[ast] = _compile(ast)
    return fn


def parse_expression(source: str, dim: int | None = None) -> ModelExpression:
    """Parse ``source`` into a :class:`ModelExpression`.

    Parameters
    ----------
    source : str
        Expression text, e.g. ``"-(v0^2)/2 + (v1^2)/2"``.
    dim : int, optional
        When given, symbols with an index ``>= dim`` are rejected.

    Raises
    ------
    ExpressionError
        On a syntax error (with offset), an unknown symbol or function, or an
        arity mismatch.
    """
    if not source or not source.strip():
        raise ExpressionError("empty expression", 0)
    parser = _Parser(source, dim)
    ast = parser.expr()
    kind, value, off = parser.peek()
    if kind != "end":
        raise ExpressionError(f"unexpected token {value!r}", off)
    return ModelExpression(source, ast)
