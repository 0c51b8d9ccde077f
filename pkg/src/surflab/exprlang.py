"""A tiny single-variable expression language for profile functions.

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' exponent)?
    exponent:= ['-'] INTEGER | '(' expr ')'        -- must fold to an integer
    primary := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Values are evaluated with numpy, so every expression accepts arrays.
"""

from __future__ import annotations

import math
import re
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FUNCTIONS",
    "VARIABLES",
    "Bin",
    "Call",
    "EvaluationError",
    "Expr",
    "ExprSyntaxError",
    "Neg",
    "Num",
    "Pow",
    "UnknownIdentifierError",
    "Var",
    "catalog",
    "compile",
    "differentiate",
    "evaluate",
    "parse",
    "to_string",
]

VARIABLES = ("z", "u", "v", "U", "V", "x", "t", "s", "xi")
CONSTANTS = {"pi": math.pi}


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprSyntaxError):
    pass


class EvaluationError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# AST


class Expr:
    """Base class of expression nodes.  Nodes are immutable and hashable."""

    def __call__(self, x):
        return evaluate(self, x)

    def __str__(self) -> str:
        return to_string(self)

    @property
    def variable(self) -> str | None:
        names = _free_names(self)
        return next(iter(names)) if names else None


@dataclass(frozen=True, eq=True)
class Num(Expr):
    value: float


@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, eq=True)
class Bin(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True, eq=True)
class Call(Expr):
    fn: str
    arg: Expr


def _free_names(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Num):
        return set()
    if isinstance(e, (Neg, Call)):
        return _free_names(e.arg)
    if isinstance(e, Pow):
        return _free_names(e.base)
    return _free_names(e.left) | _free_names(e.right)


def _safe_log(x):
    if np.any(x <= 0):
        raise EvaluationError("log of a non-positive number")
    return np.log(x)


def _safe_sqrt(x):
    if np.any(x < 0):
        raise EvaluationError("sqrt of a negative number")
    return np.sqrt(x)


FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "exp": np.exp,
    "log": _safe_log,
    "sqrt": _safe_sqrt,
    "atan": np.arctan,
}


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            rest = text[pos:]
            if rest.strip() == "":
                break
            off = pos + len(rest) - len(rest.lstrip())
            raise ExprSyntaxError(f"unexpected character {text[off]!r}", off)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Iterable[str]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = tuple(variables)
        self.seen_var: str | None = None

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            raise ExprSyntaxError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"unexpected token {tok[1]!r}", tok[2])
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            e = Bin(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            e = Bin(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.peek()[1] == "-" and self.peek()[0] == "op":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.peek()[1] == "^":
            self.take()
            return Pow(base, self.exponent())
        return base

    def exponent(self) -> int:
        tok = self.peek()
        if tok[1] == "(":
            self.take()
            inner = self.expr()
            self.expect(")")
        elif tok[1] == "-":
            self.take()
            inner = Neg(self.primary())
        else:
            inner = self.primary()
        folded = simplify(inner)
        if not isinstance(folded, Num) or not float(folded.value).is_integer():
            raise ExprSyntaxError("exponent must be an integer constant", tok[2])
        return int(folded.value)

    def primary(self) -> Expr:
        kind, text, off = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if text in CONSTANTS:
                return Num(CONSTANTS[text])
            if text in self.variables:
                if self.seen_var is not None and self.seen_var != text:
                    raise UnknownIdentifierError(
                        f"second variable {text!r} (already using {self.seen_var!r})", off
                    )
                self.seen_var = text
                return Var(text)
            raise UnknownIdentifierError(f"unknown identifier {text!r}", off)
        if text == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ExprSyntaxError(f"unexpected {text or 'end of input'!r}", off)


def parse(text: str, variables: Iterable[str] = VARIABLES) -> Expr:
    """Parse ``text`` into an expression tree over at most one variable."""
    return _Parser(text, variables).parse()


# ---------------------------------------------------------------------------
# evaluation


def evaluate(e: Expr, x):
    """Evaluate with IEEE doubles; ``x`` may be a scalar or an array."""
    with np.errstate(all="ignore"):
        out = _eval(e, np.asarray(x, dtype=float))
    out = np.broadcast_to(out, np.shape(x)) if np.ndim(out) < np.ndim(x) else out
    if not np.all(np.isfinite(out)):
        raise EvaluationError(f"non-finite value of {to_string(e)}")
    return float(out) if np.ndim(out) == 0 else np.array(out)


def _eval(e: Expr, x):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return x
    if isinstance(e, Neg):
        return -_eval(e.arg, x)
    if isinstance(e, Call):
        return FUNCTIONS[e.fn](_eval(e.arg, x))
    if isinstance(e, Pow):
        b = _eval(e.base, x)
        if e.exponent < 0 and np.any(np.asarray(b) == 0):
            raise EvaluationError("division by zero")
        return b ** e.exponent if e.exponent >= 0 else 1.0 / b ** (-e.exponent)
    a, b = _eval(e.left, x), _eval(e.right, x)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if np.any(np.asarray(b) == 0):
        raise EvaluationError("division by zero")
    return a / b


def compile(e: Expr):
    """A fast numpy callable for ``e`` without the finiteness check of :func:`evaluate`.

    Intended for inner loops (ODE right-hand sides) whose results are
    checked for finiteness downstream.  Constants broadcast to the input shape.
    """
    fn = _compile(e)

    def run(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            out = fn(x)
        return out if np.shape(out) == x.shape else np.broadcast_to(out, x.shape)

    return run


def _compile(e: Expr):
    if isinstance(e, Num):
        value = e.value
        return lambda x: value
    if isinstance(e, Var):
        return lambda x: x
    if isinstance(e, Neg):
        arg = _compile(e.arg)
        return lambda x: -arg(x)
    if isinstance(e, Call):
        fn, arg = FUNCTIONS[e.fn], _compile(e.arg)
        return lambda x: fn(arg(x))
    if isinstance(e, Pow):
        base, k = _compile(e.base), e.exponent
        return (lambda x: base(x) ** k) if k >= 0 else (lambda x: 1.0 / base(x) ** (-k))
    a, b = _compile(e.left), _compile(e.right)
    op = {"+": np.add, "-": np.subtract, "*": np.multiply, "/": np.divide}[e.op]
    return lambda x: op(a(x), b(x))


# ---------------------------------------------------------------------------
# simplifying constructors


def _is(e: Expr, value: float) -> bool:
    return isinstance(e, Num) and e.value == value


def add(a: Expr, b: Expr) -> Expr:
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if isinstance(b, Neg):
        return sub(a, b.arg)
    return Bin("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is(b, 0):
        return a
    if _is(a, 0):
        return neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if isinstance(b, Neg):
        return add(a, b.arg)
    return Bin("-", a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def mul(a: Expr, b: Expr) -> Expr:
    if _is(a, 0) or _is(b, 0):
        return Num(0.0)
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if _is(a, -1):
        return neg(b)
    if _is(b, -1):
        return neg(a)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if isinstance(b, Num):
        a, b = b, a
    if isinstance(a, Num) and isinstance(b, Bin) and b.op == "*" and isinstance(b.left, Num):
        return mul(Num(a.value * b.left.value), b.right)
    if isinstance(a, Neg):
        return neg(mul(a.arg, b))
    if isinstance(b, Neg):
        return neg(mul(a, b.arg))
    return Bin("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is(a, 0):
        return Num(0.0)
    if _is(b, 1):
        return a
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0:
        return Num(a.value / b.value)
    return Bin("/", a, b)


def power(a: Expr, n: int) -> Expr:
    if n == 0:
        return Num(1.0)
    if n == 1:
        return a
    if isinstance(a, Num) and (a.value != 0 or n > 0):
        return Num(a.value**n)
    if isinstance(a, Pow):
        return power(a.base, a.exponent * n)
    return Pow(a, n)


def call(fn: str, a: Expr) -> Expr:
    if isinstance(a, Num):
        try:
            return Num(float(FUNCTIONS[fn](np.float64(a.value))))
        except EvaluationError:
            pass
    return Call(fn, a)


def simplify(e: Expr) -> Expr:
    """Constant folding and 0/1 elimination, bottom-up."""
    if isinstance(e, (Num, Var)):
        return e
    if isinstance(e, Neg):
        return neg(simplify(e.arg))
    if isinstance(e, Pow):
        return power(simplify(e.base), e.exponent)
    if isinstance(e, Call):
        return call(e.fn, simplify(e.arg))
    a, b = simplify(e.left), simplify(e.right)
    return {"+": add, "-": sub, "*": mul, "/": div}[e.op](a, b)


# ---------------------------------------------------------------------------
# differentiation


def differentiate(e: Expr, variable: str | None = None) -> Expr:
    """Exact derivative with respect to the expression's variable."""
    if variable is None:
        variable = e.variable
    return _d(e, variable)


def _d(e: Expr, x: str | None) -> Expr:
    if isinstance(e, Num):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0 if e.name == x else 0.0)
    if isinstance(e, Neg):
        return neg(_d(e.arg, x))
    if isinstance(e, Bin):
        a, b = e.left, e.right
        da, db = _d(a, x), _d(b, x)
        if e.op == "+":
            return add(da, db)
        if e.op == "-":
            return sub(da, db)
        if e.op == "*":
            return add(mul(da, b), mul(a, db))
        return div(sub(mul(da, b), mul(a, db)), power(b, 2))
    if isinstance(e, Pow):
        return mul(mul(Num(float(e.exponent)), power(e.base, e.exponent - 1)), _d(e.base, x))
    a = e.arg
    da = _d(a, x)
    if _is(da, 0):
        return Num(0.0)
    outer = {
        "sin": lambda: call("cos", a),
        "cos": lambda: neg(call("sin", a)),
        "tan": lambda: add(Num(1.0), power(call("tan", a), 2)),
        "sinh": lambda: call("cosh", a),
        "cosh": lambda: call("sinh", a),
        "tanh": lambda: sub(Num(1.0), power(call("tanh", a), 2)),
        "exp": lambda: call("exp", a),
        "log": lambda: div(Num(1.0), a),
        "sqrt": lambda: div(Num(1.0), mul(Num(2.0), call("sqrt", a))),
        "atan": lambda: div(Num(1.0), add(Num(1.0), power(a, 2))),
    }[e.fn]()
    return mul(outer, da)


# ---------------------------------------------------------------------------
# printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _num_str(value: float) -> str:
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def _prec(e: Expr) -> int:
    if isinstance(e, Bin):
        return _PREC[e.op]
    if isinstance(e, Neg) or (isinstance(e, Num) and (e.value < 0 or str(e.value).startswith("-"))):
        return 3
    if isinstance(e, Pow):
        return 4
    return 5


def to_string(e: Expr) -> str:
    """Render with the minimum of parentheses; ``parse(to_string(e))`` rebuilds ``e``."""
    if isinstance(e, Num):
        return _num_str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.fn}({to_string(e.arg)})"
    if isinstance(e, Neg):
        inner = to_string(e.arg)
        return "-" + (inner if _prec(e.arg) >= 3 else f"({inner})")
    if isinstance(e, Pow):
        base = to_string(e.base)
        if _prec(e.base) < 5:
            base = f"({base})"
        return f"{base}^{e.exponent}"
    p = _PREC[e.op]
    left = to_string(e.left)
    if _prec(e.left) < p:
        left = f"({left})"
    right = to_string(e.right)
    if _prec(e.right) < p or (_prec(e.right) == p and e.op in "-/"):
        right = f"({right})"
    if e.op in "+-":
        return f"{left} {e.op} {right}"
    return f"{left}{e.op}{right}"


# ---------------------------------------------------------------------------
# shortcuts

_SHORTCUT = re.compile(r"^\s*linear\(\s*([^,]+)\s*,\s*([^)]+)\s*\)\s*$")


def catalog(name: str, variable: str = "z") -> Expr:
    """Built-in profile shortcuts: ``one``, ``exp``, ``cosh``, ``linear(a,b)`` (= a + b*var)."""
    x = Var(variable)
    if name == "one":
        return Num(1.0)
    if name in ("exp", "cosh"):
        return Call(name, x)
    m = _SHORTCUT.match(name)
    if m:
        a, b = float(m.group(1)), float(m.group(2))
        return add(Num(a), mul(Num(b), x))
    raise KeyError(f"unknown catalog function {name!r}")


def as_expr(spec, variable: str = "z") -> Expr:
    """Accept an Expr, a number, a catalog shortcut or expression text."""
    if isinstance(spec, Expr):
        return spec
    if isinstance(spec, (int, float)):
        return Num(float(spec))
    try:
        return catalog(spec, variable)
    except KeyError:
        return parse(spec, (variable,))
