"""Closed-form scalar functions of time: parsing, evaluation, printing.

The language covers numeric literals, the time variable ``t``, named constants
bound at evaluation time, unary minus, the binary operators ``+ - * / ^``, and
the functions exp, log, sin, cos, sqrt, abs and pow.  ``^`` binds tightest and
is right-associative, so ``2^3^2`` is 512; unary minus binds more loosely than
``^`` but more tightly than ``*`` and ``/``, so ``-2^2`` is -4 and ``-2/t`` is
(-2)/t.  There is no implicit multiplication: write ``2*t``, never ``2t``.

Domain violations (log of a nonpositive number, division by zero, a negative
base under a fractional exponent, ...) raise EvalDomainError instead of
producing NaN or a complex value.  This module also owns ``real_power``, the
powering rule used across the package.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

__all__ = [
    "Expr", "Num", "Name", "Neg", "Bin", "Call",
    "ExprError", "ExprSyntaxError", "UnknownFunctionError",
    "UnboundIdentifierError", "EvalDomainError",
    "parse", "evaluate", "to_source", "free_names", "compile_fn", "real_power",
]


class ExprError(ValueError):
    """Base class for everything this module raises on purpose."""


class ExprSyntaxError(ExprError):
    """Source text could not be parsed; carries the byte offset of the fault."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at offset {offset})")


class UnknownFunctionError(ExprSyntaxError):
    pass


class UnboundIdentifierError(ExprError):
    pass


class EvalDomainError(ExprError):
    pass


# ---------------------------------------------------------------------------
# syntax tree


class Expr:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Num(Expr):
    value: float


@dataclass(frozen=True, slots=True)
class Name(Expr):
    id: str


@dataclass(frozen=True, slots=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, slots=True)
class Bin(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Call(Expr):
    fn: str
    args: tuple


def real_power(x: float, p: float) -> float:
    """x**p over the reals.

    Negative bases are allowed only for integer exponents, 0**p needs p >= 0.
    Raises EvalDomainError outside that domain or on overflow, so no NaN and
    no complex value ever leaks out.
    """
    if x == 0.0:
        if p > 0:
            return 0.0
        if p == 0:
            return 1.0
        raise EvalDomainError("0 raised to a negative power")
    if x < 0.0 and p != math.floor(p):
        raise EvalDomainError(f"negative base {x!r} under non-integer exponent {p!r}")
    try:
        r = math.pow(x, p)
    except (OverflowError, ValueError) as exc:
        raise EvalDomainError(f"pow({x!r}, {p!r}) left the real range") from exc
    if not math.isfinite(r):
        raise EvalDomainError(f"pow({x!r}, {p!r}) overflowed")
    return r


def _exp(x):
    try:
        return math.exp(x)
    except OverflowError as exc:
        raise EvalDomainError(f"exp({x!r}) overflowed") from exc


def _log(x):
    if x <= 0.0:
        raise EvalDomainError(f"log of nonpositive value {x!r}")
    return math.log(x)


def _sqrt(x):
    if x < 0.0:
        raise EvalDomainError(f"sqrt of negative value {x!r}")
    return math.sqrt(x)


FUNCTIONS = {
    "exp": (1, _exp),
    "log": (1, _log),
    "sin": (1, math.sin),
    "cos": (1, math.cos),
    "sqrt": (1, _sqrt),
    "abs": (1, abs),
    "pow": (2, real_power),
}


# ---------------------------------------------------------------------------
# tokenizer / parser

_TOKEN = re.compile(
    r"""(?P<ws>\s+)
      | (?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
      | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


def _tokenize(src: str):
    pos = 0
    out = []
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", pos)
        if m.lastgroup == "num":
            out.append(("num", m.group(), pos))
        elif m.lastgroup == "name":
            out.append(("name", m.group(), pos))
        elif m.lastgroup == "op":
            out.append(("op", m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(src)))
    return out


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, text, pos = self.peek()
        if kind != "op" or text != op:
            raise ExprSyntaxError(f"expected {op!r}", pos)
        return self.next()

    # expr := term (('+' | '-') term)*
    def expr(self):
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.next()
                node = Bin(text, node, self.term())
            else:
                return node

    # term := unary (('*' | '/') unary)*
    def term(self):
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.next()
                node = Bin(text, node, self.unary())
            else:
                return node

    # unary := '-' unary | power
    def unary(self):
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.next()
            return Neg(self.unary())
        return self.power()

    # power := atom ('^' unary)?     right-associative, exponent may be signed
    def power(self):
        node = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.next()
            return Bin("^", node, self.unary())
        return node

    def atom(self):
        kind, text, pos = self.next()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            k2, t2, _ = self.peek()
            if k2 == "op" and t2 == "(":
                return self.call(text, pos)
            return Name(text)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(f"unexpected token {text!r}" if text else "unexpected end of input", pos)

    def call(self, fn, pos):
        if fn not in FUNCTIONS:
            raise UnknownFunctionError(f"unknown function {fn!r}", pos)
        self.expect_op("(")
        args = [self.expr()]
        while True:
            kind, text, p = self.peek()
            if kind == "op" and text == ",":
                self.next()
                args.append(self.expr())
            elif kind == "op" and text == ")":
                self.next()
                break
            else:
                raise ExprSyntaxError("expected ',' or ')'", p)
        arity = FUNCTIONS[fn][0]
        if len(args) != arity:
            raise ExprSyntaxError(f"{fn} takes {arity} argument(s), got {len(args)}", pos)
        return Call(fn, tuple(args))


def parse(src: str) -> Expr:
    """Parse source text to a tree.  Syntax errors carry the byte offset."""
    p = _Parser(src)
    node = p.expr()
    kind, text, pos = p.peek()
    if kind != "end":
        raise ExprSyntaxError(f"trailing input {text!r}", pos)
    return node


# ---------------------------------------------------------------------------
# evaluation

def _check_finite(r, what):
    if not math.isfinite(r):
        raise EvalDomainError(f"{what} is not finite")
    return r


def evaluate(expr: Expr, t: float | None = None, constants: dict | None = None) -> float:
    """Evaluate the tree at time t with the given constant bindings.

    Every identifier must be bound ('t' by the t argument, anything else via
    constants); an unbound name raises UnboundIdentifierError.
    """
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Name):
        if expr.id == "t":
            if t is None:
                raise UnboundIdentifierError("no value supplied for 't'")
            return t
        if constants is not None and expr.id in constants:
            return float(constants[expr.id])
        raise UnboundIdentifierError(f"unbound identifier {expr.id!r}")
    if isinstance(expr, Neg):
        return -evaluate(expr.arg, t, constants)
    if isinstance(expr, Bin):
        a = evaluate(expr.left, t, constants)
        b = evaluate(expr.right, t, constants)
        if expr.op == "+":
            return _check_finite(a + b, "sum")
        if expr.op == "-":
            return _check_finite(a - b, "difference")
        if expr.op == "*":
            return _check_finite(a * b, "product")
        if expr.op == "/":
            if b == 0.0:
                raise EvalDomainError("division by zero")
            return _check_finite(a / b, "quotient")
        return real_power(a, b)
    if isinstance(expr, Call):
        fn = FUNCTIONS[expr.fn][1]
        return fn(*(evaluate(a, t, constants) for a in expr.args))
    raise TypeError(f"not an Expr node: {expr!r}")


def free_names(expr: Expr) -> set:
    if isinstance(expr, Name):
        return {expr.id}
    if isinstance(expr, Neg):
        return free_names(expr.arg)
    if isinstance(expr, Bin):
        return free_names(expr.left) | free_names(expr.right)
    if isinstance(expr, Call):
        out = set()
        for a in expr.args:
            out |= free_names(a)
        return out
    return set()


def compile_fn(src, constants: dict | None = None):
    """Compile source text (or a tree) to a fast callable of t.

    All names other than 't' must appear in constants; checked here, at bind
    time, rather than on first call.
    """
    expr = parse(src) if isinstance(src, str) else src
    constants = dict(constants or {})
    missing = free_names(expr) - {"t"} - set(constants)
    if missing:
        raise UnboundIdentifierError(f"unbound identifier(s): {', '.join(sorted(missing))}")
    return _compile(expr, constants)


def _compile(expr, constants):
    # nested closures, same operation order as evaluate()
    if isinstance(expr, Num):
        v = expr.value
        return lambda t: v
    if isinstance(expr, Name):
        if expr.id == "t":
            return lambda t: t
        v = float(constants[expr.id])
        return lambda t: v
    if isinstance(expr, Neg):
        f = _compile(expr.arg, constants)
        return lambda t: -f(t)
    if isinstance(expr, Bin):
        fa = _compile(expr.left, constants)
        fb = _compile(expr.right, constants)
        op = expr.op
        if op == "+":
            return lambda t: _check_finite(fa(t) + fb(t), "sum")
        if op == "-":
            return lambda t: _check_finite(fa(t) - fb(t), "difference")
        if op == "*":
            return lambda t: _check_finite(fa(t) * fb(t), "product")
        if op == "/":
            def div(t):
                b = fb(t)
                if b == 0.0:
                    raise EvalDomainError("division by zero")
                return _check_finite(fa(t) / b, "quotient")
            return div
        return lambda t: real_power(fa(t), fb(t))
    if isinstance(expr, Call):
        fn = FUNCTIONS[expr.fn][1]
        fargs = tuple(_compile(a, constants) for a in expr.args)
        if len(fargs) == 1:
            fa = fargs[0]
            return lambda t: fn(fa(t))
        return lambda t: fn(*(g(t) for g in fargs))
    raise TypeError(f"not an Expr node: {expr!r}")


# ---------------------------------------------------------------------------
# printing

_LEVEL_ADD, _LEVEL_MUL, _LEVEL_UNARY, _LEVEL_POW, _LEVEL_ATOM = 1, 2, 3, 4, 5


def _level(expr):
    if isinstance(expr, (Num, Name, Call)):
        return _LEVEL_ATOM
    if isinstance(expr, Neg):
        return _LEVEL_UNARY
    if expr.op in "+-":
        return _LEVEL_ADD
    if expr.op in "*/":
        return _LEVEL_MUL
    return _LEVEL_POW


def to_source(expr: Expr) -> str:
    """Render with minimal parentheses; parse(to_source(e)) == e."""
    def wrap(child, minlevel):
        s = to_source(child)
        return f"({s})" if _level(child) < minlevel else s

    if isinstance(expr, Num):
        return repr(expr.value)
    if isinstance(expr, Name):
        return expr.id
    if isinstance(expr, Neg):
        return "-" + wrap(expr.arg, _LEVEL_UNARY)
    if isinstance(expr, Call):
        return f"{expr.fn}({', '.join(to_source(a) for a in expr.args)})"
    if expr.op in "+-":
        return f"{wrap(expr.left, _LEVEL_ADD)} {expr.op} {wrap(expr.right, _LEVEL_ADD + 1)}"
    if expr.op in "*/":
        return f"{wrap(expr.left, _LEVEL_MUL)}{expr.op}{wrap(expr.right, _LEVEL_MUL + 1)}"
    # '^' is right-associative: any compound left operand needs parentheses,
    # the right operand may be another power or a signed exponent
    return f"{wrap(expr.left, _LEVEL_ATOM)}^{wrap(expr.right, _LEVEL_UNARY)}"
