"""Scalar expressions in ``t``, ``u`` and ``up`` (the first derivative of u).

Grammar, loosest binding first::

    sum     := product (('+' | '-') product)*
    product := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right-associative
    atom    := NUMBER | NAME | NAME '(' args ')' | '(' sum ')'

So ``-2^2`` is ``-(2^2)`` and ``2^3^2`` is ``2^(3^2)``.

Evaluation follows IEEE-754: overflow and domain errors produce ``inf`` or
``nan`` instead of raising, so callers decide what a non-finite value means.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Union

__all__ = [
    "Num", "Var", "Const", "Neg", "BinOp", "Call", "Node",
    "Expression", "Program",
    "ParseError", "UnknownIdentifierError", "ArityError",
    "parse", "evaluate", "to_source",
]

VARIABLES = ("t", "u", "up")
CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = {
    "exp": 1, "ln": 1, "sin": 1, "cos": 1, "tan": 1,
    "sinh": 1, "cosh": 1, "tanh": 1, "sqrt": 1, "abs": 1,
    "pow": 2,
}


class ParseError(ValueError):
    """Malformed expression source; ``offset`` is the 0-based character index."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ParseError):
    pass


class ArityError(ParseError):
    pass


# -- AST ------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple


Node = Union[Num, Var, Const, Neg, BinOp, Call]


# -- IEEE-style scalar math ----------------------------------------------
# The math module raises where C returns inf/nan; these wrappers restore the
# C results so the Python backend matches the compiled kernel bit for bit.

_INF = math.inf
_NAN = math.nan


def _div(x, y):
    try:
        return x / y
    except ZeroDivisionError:
        if x != x or x == 0.0:
            return _NAN
        return math.copysign(_INF, x) * math.copysign(1.0, y)


def _is_odd_integer(y):
    return math.isfinite(y) and y == math.floor(y) and math.fmod(y, 2.0) != 0.0


def _pow(x, y):
    try:
        return math.pow(x, y)
    except OverflowError:
        if x < 0.0 and _is_odd_integer(y):
            return -_INF
        return _INF
    except ValueError:
        if x == 0.0:
            # negative exponent of a signed zero
            if _is_odd_integer(y):
                return math.copysign(_INF, x)
            return _INF
        return _NAN


def _exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        return _INF


def _ln(x):
    if x == 0.0:
        return -_INF
    if x < 0.0:
        return _NAN
    return math.log(x)


def _sqrt(x):
    if x < 0.0:
        return _NAN
    return math.sqrt(x)


def _trig(f):
    def wrapped(x):
        try:
            return f(x)
        except ValueError:  # sin(inf) and friends
            return _NAN
    return wrapped


def _hyp(f, odd):
    def wrapped(x):
        try:
            return f(x)
        except OverflowError:
            return math.copysign(_INF, x) if odd else _INF
    return wrapped


SCALAR_FUNCS: dict[str, Callable] = {
    "exp": _exp,
    "ln": _ln,
    "sin": _trig(math.sin),
    "cos": _trig(math.cos),
    "tan": _trig(math.tan),
    "sinh": _hyp(math.sinh, odd=True),
    "cosh": _hyp(math.cosh, odd=False),
    "tanh": math.tanh,
    "sqrt": _sqrt,
    "abs": abs,
    "pow": _pow,
}


# -- tokenizer / parser --------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


def _tokenize(source):
    pos = 0
    tokens = []
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source):
        self.tokens = _tokenize(source)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, value, pos = self.tok
        if value != text or kind != "op":
            found = "end of input" if kind == "end" else repr(value)
            raise ParseError(f"expected {text!r}, found {found}", pos)
        return self.advance()

    def parse(self):
        node = self.sum()
        kind, value, pos = self.tok
        if kind != "end":
            raise ParseError(f"unexpected {value!r}", pos)
        return node

    def sum(self):
        node = self.product()
        while self.tok[0] == "op" and self.tok[1] in ("+", "-"):
            op = self.advance()[1]
            node = BinOp(op, node, self.product())
        return node

    def product(self):
        node = self.unary()
        while self.tok[0] == "op" and self.tok[1] in ("*", "/"):
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, value, pos = self.advance()
        if kind == "num":
            x = float(value)
            if not math.isfinite(x):
                raise ParseError(f"literal {value!r} is not finite", pos)
            return Num(x)
        if kind == "name":
            if self.tok[0] == "op" and self.tok[1] == "(":
                return self.call(value, pos)
            if value in VARIABLES:
                return Var(value)
            if value in CONSTANTS:
                return Const(value)
            if value in FUNCTIONS:
                raise ParseError(f"function {value!r} needs an argument list", self.tok[2])
            raise UnknownIdentifierError(f"unknown identifier {value!r}", pos)
        if kind == "op" and value == "(":
            node = self.sum()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(value)
        raise ParseError(f"unexpected {found}", pos)

    def call(self, name, pos):
        if name not in FUNCTIONS:
            raise UnknownIdentifierError(f"unknown function {name!r}", pos)
        self.expect("(")
        args = [self.sum()]
        while self.tok[0] == "op" and self.tok[1] == ",":
            self.advance()
            args.append(self.sum())
        self.expect(")")
        if len(args) != FUNCTIONS[name]:
            raise ArityError(
                f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)}", pos
            )
        return Call(name, tuple(args))


# -- compiled forms ------------------------------------------------------

# Opcodes shared with the compiled kernel (_rk4.pyx); keep in sync.
OP_CONST, OP_T, OP_U, OP_UP, OP_NEG, OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_POW = range(10)
FUNC_OPCODES = {
    "exp": 10, "ln": 11, "sin": 12, "cos": 13, "tan": 14,
    "sinh": 15, "cosh": 16, "tanh": 17, "sqrt": 18, "abs": 19, "pow": OP_POW,
}
_BINARY_OPCODES = {"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV, "^": OP_POW}


@dataclass(frozen=True)
class Program:
    """Postfix encoding of an expression for the stack-machine kernel.

    ``code`` holds opcodes; ``OP_CONST`` is followed by an index into ``consts``.
    """

    code: tuple
    consts: tuple
    stack_size: int


def _emit(node, code, consts):
    """Append postfix code for ``node``; return the stack depth it needs."""
    if isinstance(node, (Num, Const)):
        consts.append(node.value if isinstance(node, Num) else CONSTANTS[node.name])
        code += (OP_CONST, len(consts) - 1)
        return 1
    if isinstance(node, Var):
        code.append({"t": OP_T, "u": OP_U, "up": OP_UP}[node.name])
        return 1
    if isinstance(node, Neg):
        depth = _emit(node.operand, code, consts)
        code.append(OP_NEG)
        return depth
    if isinstance(node, BinOp):
        left = _emit(node.left, code, consts)
        right = _emit(node.right, code, consts)
        code.append(_BINARY_OPCODES[node.op])
        return max(left, right + 1)
    if isinstance(node, Call):
        depth = 0
        for i, arg in enumerate(node.args):
            depth = max(depth, _emit(arg, code, consts) + i)
        code.append(FUNC_OPCODES[node.func])
        return depth
    raise TypeError(f"not an expression node: {node!r}")


def _closure(node):
    """Build a Python callable ``f(t, u, up)`` equivalent to ``node``."""
    if isinstance(node, Num):
        c = node.value
        return lambda t, u, up: c
    if isinstance(node, Const):
        c = CONSTANTS[node.name]
        return lambda t, u, up: c
    if isinstance(node, Var):
        if node.name == "t":
            return lambda t, u, up: t
        if node.name == "u":
            return lambda t, u, up: u
        return lambda t, u, up: up
    if isinstance(node, Neg):
        f = _closure(node.operand)
        return lambda t, u, up: -f(t, u, up)
    if isinstance(node, BinOp):
        f, g = _closure(node.left), _closure(node.right)
        if node.op == "+":
            return lambda t, u, up: f(t, u, up) + g(t, u, up)
        if node.op == "-":
            return lambda t, u, up: f(t, u, up) - g(t, u, up)
        if node.op == "*":
            return lambda t, u, up: f(t, u, up) * g(t, u, up)
        if node.op == "/":
            return lambda t, u, up: _div(f(t, u, up), g(t, u, up))
        return lambda t, u, up: _pow(f(t, u, up), g(t, u, up))
    if isinstance(node, Call):
        fn = SCALAR_FUNCS[node.func]
        if len(node.args) == 2:
            f, g = _closure(node.args[0]), _closure(node.args[1])
            return lambda t, u, up: fn(f(t, u, up), g(t, u, up))
        f = _closure(node.args[0])
        return lambda t, u, up: fn(f(t, u, up))
    raise TypeError(f"not an expression node: {node!r}")


@dataclass(frozen=True)
class Expression:
    """A parsed right-hand side. Equality compares trees, not source text."""

    root: Node
    source: str = field(default="", compare=False)
    _func: Callable = field(init=False, repr=False, compare=False)
    _program: Program = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        code, consts = [], []
        depth = _emit(self.root, code, consts)
        object.__setattr__(self, "_program", Program(tuple(code), tuple(consts), depth))
        object.__setattr__(self, "_func", _closure(self.root))

    @property
    def func(self) -> Callable[[float, float, float], float]:
        return self._func

    @property
    def program(self) -> Program:
        return self._program

    def __call__(self, t: float, u: float, up: float) -> float:
        return self._func(t, u, up)

    def __str__(self):
        return to_source(self)


def parse(source: str) -> Expression:
    if not isinstance(source, str) or not source.strip():
        raise ParseError("empty expression", 0)
    return Expression(_Parser(source).parse(), source)


def evaluate(e: Expression, t: float, u: float, up: float) -> float:
    return e.func(float(t), float(u), float(up))


# -- pretty printing -----------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _fmt(node, ctx):
    """Format ``node`` inside a context of binding strength ``ctx``."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({', '.join(_fmt(a, 0) for a in node.args)})"
    if isinstance(node, Neg):
        s = "-" + _fmt(node.operand, _PREC["neg"])
        prec = _PREC["neg"]
    else:
        p = _PREC[node.op]
        if node.op == "^":
            # base must bind tighter than ^; exponent may be a unary minus
            s = f"{_fmt(node.left, p + 1)}^{_fmt(node.right, _PREC['neg'])}"
        else:
            s = f"{_fmt(node.left, p)} {node.op} {_fmt(node.right, p + 1)}"
        prec = p
    return f"({s})" if prec < ctx else s


def to_source(e: Union[Expression, Node]) -> str:
    """Render with the minimum parentheses needed to reparse to the same tree."""
    root = e.root if isinstance(e, Expression) else e
    return _fmt(root, 0)
