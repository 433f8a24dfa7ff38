"""Tiny expression language for scalar functions of chart coordinates.

Grammar (standard precedence, left-associative, unary minus, right-assoc ^):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

Known functions: exp, log, sin, cos, sqrt.  Division, log, sqrt and
fractional powers are guarded at evaluation time, not parse time.
"""

from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .jets import DiffScalar, Jet, JetDomainError

FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt")


class ExprError(ValueError):
    pass


class ParseError(ExprError):
    def __init__(self, message, src, pos):
        self.pos = pos
        marker = src[:pos] + ">>>" + src[pos:]
        super().__init__(f"{message} at offset {pos}: {marker!r}")


class UnknownSymbolError(ExprError):
    pass


class EvalFault(ExprError):
    """Evaluation fault carrying the offending subexpression."""

    def __init__(self, message, subexpr):
        self.subexpr = subexpr
        super().__init__(f"{message} in {pretty(subexpr)!r}")


# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    val: float


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expr"


Expr = Union[Num, Sym, Neg, BinOp, Call]


# -- tokenizer / parser -------------------------------------------------------

_OPS = set("+-*/^()")


def _tokenize(src):
    toks = []
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
        elif c in _OPS:
            toks.append((c, c, i))
            i += 1
        elif c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            while j < n and (src[j].isdigit() or src[j] == "."):
                j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    j = k
                    while j < n and src[j].isdigit():
                        j += 1
            text = src[i:j]
            try:
                val = float(text)
            except ValueError:
                raise ParseError(f"bad number {text!r}", src, i) from None
            toks.append(("num", val, i))
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            toks.append(("ident", src[i:j], i))
            i = j
        else:
            raise ParseError(f"unexpected character {c!r}", src, i)
    toks.append(("end", None, n))
    return toks


class _Parser:
    def __init__(self, src):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind):
        t = self.next()
        if t[0] != kind:
            raise ParseError(f"expected {kind!r}, found {t[1]!r}", self.src, t[2])
        return t

    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.next()[0]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.next()[0]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        if self.peek()[0] == "-":
            self.next()
            return Neg(self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            self.next()
            return BinOp("^", base, self.factor())
        return base

    def atom(self):
        kind, val, pos = self.next()
        if kind == "num":
            return Num(val)
        if kind == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "ident":
            if self.peek()[0] == "(":
                if val not in FUNCTIONS:
                    raise ParseError(
                        f"unknown function {val!r} (known: {', '.join(FUNCTIONS)})",
                        self.src,
                        pos,
                    )
                self.next()
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            return Sym(val)
        raise ParseError(f"unexpected token {val!r}", self.src, pos)


def parse(src: str) -> Expr:
    """Parse ``src`` into an AST, or raise ParseError with a byte offset."""
    p = _Parser(src)
    node = p.expr()
    kind, val, pos = p.peek()
    if kind != "end":
        raise ParseError(f"trailing input {val!r}", src, pos)
    return node


# -- pretty printer -----------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _fmt(node, minprec):
    if isinstance(node, Num):
        return repr(node.val)
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Call):
        return f"{node.fn}({_fmt(node.arg, 0)})"
    if isinstance(node, Neg):
        p = _PREC["neg"]
        text = f"-{_fmt(node.arg, p)}"
    else:
        p = _PREC[node.op]
        if node.op == "^":
            text = f"{_fmt(node.lhs, p + 1)}^{_fmt(node.rhs, 3)}"
        else:
            text = f"{_fmt(node.lhs, p)} {node.op} {_fmt(node.rhs, p + 1)}"
    return f"({text})" if p < minprec else text


def pretty(node: Expr) -> str:
    return _fmt(node, 0)


# -- symbols ------------------------------------------------------------------


def free_symbols(node: Expr) -> set:
    if isinstance(node, Num):
        return set()
    if isinstance(node, Sym):
        return {node.name}
    if isinstance(node, Neg):
        return free_symbols(node.arg)
    if isinstance(node, Call):
        return free_symbols(node.arg)
    return free_symbols(node.lhs) | free_symbols(node.rhs)


def ensure_symbols(node: Expr, declared) -> None:
    unknown = sorted(free_symbols(node) - set(declared))
    if unknown:
        raise UnknownSymbolError(
            f"unknown symbol(s) {', '.join(unknown)}; "
            f"declared: {', '.join(sorted(declared))}"
        )


# -- evaluation ---------------------------------------------------------------


def eval_jets(node, pts, coords, params=None, order=2):
    """Evaluate ``node`` on points (N, d) as a :class:`Jet` of given order.

    ``coords`` fixes the differentiation axes; ``params`` binds the remaining
    symbols to constants.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    params = params or {}
    n, d = pts.shape
    if len(coords) != d:
        raise ExprError(f"{len(coords)} coordinates declared but points have dim {d}")
    env = {name: Jet.coordinate(pts, mu, order) for mu, name in enumerate(coords)}
    return _eval(node, env, params, n, d, order)


def _eval(node, env, params, n, d, order):
    if isinstance(node, Num):
        return Jet.constant(node.val, n, d, order)
    if isinstance(node, Sym):
        if node.name in env:
            return env[node.name]
        if node.name in params:
            return Jet.constant(float(params[node.name]), n, d, order)
        raise UnknownSymbolError(
            f"unbound symbol {node.name!r}; bound: "
            f"{', '.join(sorted(set(env) | set(params)))}"
        )
    if isinstance(node, Neg):
        return -_eval(node.arg, env, params, n, d, order)
    if isinstance(node, Call):
        arg = _eval(node.arg, env, params, n, d, order)
        try:
            return getattr(arg, node.fn)()
        except JetDomainError as e:
            raise EvalFault(str(e), node) from None
    lhs = _eval(node.lhs, env, params, n, d, order)
    try:
        if node.op == "+":
            return lhs + _eval(node.rhs, env, params, n, d, order)
        if node.op == "-":
            return lhs - _eval(node.rhs, env, params, n, d, order)
        if node.op == "*":
            return lhs * _eval(node.rhs, env, params, n, d, order)
        if node.op == "/":
            return lhs / _eval(node.rhs, env, params, n, d, order)
        # power: constant exponents keep integer semantics, otherwise lower
        # to exp(rhs*log(lhs))
        if isinstance(node.rhs, Num):
            return lhs**node.rhs.val
        if isinstance(node.rhs, Neg) and isinstance(node.rhs.arg, Num):
            return lhs ** (-node.rhs.arg.val)
        rhs = _eval(node.rhs, env, params, n, d, order)
        return (rhs * lhs.log()).exp()
    except JetDomainError as e:
        raise EvalFault(str(e), node) from None


def eval_values(node, pts, coords, params=None):
    """Value-only evaluation (no derivative tracking); same domain guards."""
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    params = params or {}
    env = {name: pts[:, mu] for mu, name in enumerate(coords)}
    return _eval_val(node, env, params, pts.shape[0])


_VAL_FN = {
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": np.sqrt,
}


def _eval_val(node, env, params, n):
    if isinstance(node, Num):
        return np.full(n, node.val)
    if isinstance(node, Sym):
        if node.name in env:
            return env[node.name]
        if node.name in params:
            return np.full(n, float(params[node.name]))
        raise UnknownSymbolError(
            f"unbound symbol {node.name!r}; bound: "
            f"{', '.join(sorted(set(env) | set(params)))}"
        )
    if isinstance(node, Neg):
        return -_eval_val(node.arg, env, params, n)
    if isinstance(node, Call):
        arg = _eval_val(node.arg, env, params, n)
        if node.fn == "log" and np.any(arg <= 0):
            raise EvalFault("log of a non-positive value", node)
        if node.fn == "sqrt" and np.any(arg < 0):
            raise EvalFault("sqrt of a negative value", node)
        return _VAL_FN[node.fn](arg)
    lhs = _eval_val(node.lhs, env, params, n)
    rhs = _eval_val(node.rhs, env, params, n)
    if node.op == "+":
        return lhs + rhs
    if node.op == "-":
        return lhs - rhs
    if node.op == "*":
        return lhs * rhs
    if node.op == "/":
        if np.any(rhs == 0):
            raise EvalFault("division by zero", node)
        return lhs / rhs
    if np.any((lhs <= 0) & (rhs != np.round(rhs))):
        raise EvalFault("fractional power of a non-positive value", node)
    with np.errstate(invalid="raise", divide="raise"):
        try:
            return lhs**rhs
        except FloatingPointError:
            raise EvalFault("invalid power", node) from None


def eval_diff(
    node: Expr,
    point: Mapping[str, float],
    params: Mapping[str, float] | None = None,
    order: int = 2,
) -> DiffScalar:
    """Evaluate at one point; differentiation axes follow ``point``'s keys."""
    coords = list(point)
    pts = np.array([[float(point[c]) for c in coords]])
    jet = eval_jets(node, pts, coords, params, order)
    g = jet.grad[0] if jet.grad is not None else np.zeros(len(coords))
    h = (
        jet.hess[0]
        if jet.hess is not None
        else np.zeros((len(coords), len(coords)))
    )
    return DiffScalar(float(jet.value[0]), g, h)
