"""Scalar fields over a chart: expression-backed leaves plus lazy algebra.

A field produces values and jets at batches of points.  Two derivative
engines exist:

* AD  -- exact forward-mode jets through the expression evaluator,
* FD  -- central finite differences of plain value sweeps,

selected per call, so every check in the library can be replayed on the
independent finite-difference path.  Fields are immutable and side-effect
free; evaluation never mutates shared state.
"""

import numpy as np

from . import exprlang
from .jets import Jet, complex_jet, fd_jet


class Engine:
    __slots__ = ("kind", "step")

    def __init__(self, kind, step=1e-4):
        self.kind = kind
        self.step = step

    def __repr__(self):
        return f"Engine({self.kind}, step={self.step})"


AD = Engine("ad")


def FD(step=1e-4):
    return Engine("fd", step)


class Field:
    def values(self, pts):
        raise NotImplementedError

    def _jet_ad(self, pts, order):
        raise NotImplementedError

    def jet(self, pts, order=2, engine=AD):
        if engine.kind == "ad":
            return self._jet_ad(pts, order)
        return fd_jet(self.values, pts, order, engine.step)

    # lazy algebra --------------------------------------------------------

    def __add__(self, other):
        return OpField("+", self, as_field(other))

    def __radd__(self, other):
        return OpField("+", as_field(other), self)

    def __sub__(self, other):
        return OpField("-", self, as_field(other))

    def __rsub__(self, other):
        return OpField("-", as_field(other), self)

    def __mul__(self, other):
        return OpField("*", self, as_field(other))

    def __rmul__(self, other):
        return OpField("*", as_field(other), self)

    def __truediv__(self, other):
        return OpField("/", self, as_field(other))

    def __rtruediv__(self, other):
        return OpField("/", as_field(other), self)

    def __neg__(self):
        return OpField("neg", self, None)

    def __pow__(self, p):
        return PowField(self, p)


class ConstField(Field):
    def __init__(self, c):
        self.c = float(c)

    def values(self, pts):
        return np.full(np.atleast_2d(pts).shape[0], self.c)

    def _jet_ad(self, pts, order):
        pts = np.atleast_2d(pts)
        return Jet.constant(self.c, pts.shape[0], pts.shape[1], order)


def as_field(x):
    if isinstance(x, Field):
        return x
    return ConstField(x)


class ExprField(Field):
    """Leaf field defined by an expression in the chart coordinates."""

    def __init__(self, expr, coords, params=None):
        if isinstance(expr, str):
            expr = exprlang.parse(expr)
        self.expr = expr
        self.coords = tuple(coords)
        self.params = dict(params or {})
        exprlang.ensure_symbols(expr, set(self.coords) | set(self.params))

    def values(self, pts):
        return exprlang.eval_values(self.expr, pts, self.coords, self.params)

    def _jet_ad(self, pts, order):
        return exprlang.eval_jets(self.expr, pts, self.coords, self.params, order)


class OpField(Field):
    def __init__(self, op, lhs, rhs):
        self.op = op
        self.lhs = lhs
        self.rhs = rhs

    def values(self, pts):
        a = self.lhs.values(pts)
        if self.op == "neg":
            return -a
        b = self.rhs.values(pts)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if np.any(b == 0):
            raise exprlang.ExprError("field division by zero")
        return a / b

    def _jet_ad(self, pts, order):
        a = self.lhs._jet_ad(pts, order)
        if self.op == "neg":
            return -a
        b = self.rhs._jet_ad(pts, order)
        return {"+": a.__add__, "-": a.__sub__, "*": a.__mul__, "/": a.__truediv__}[
            self.op
        ](b)


class PowField(Field):
    def __init__(self, base, p):
        self.base = base
        self.p = p

    def values(self, pts):
        return self.base.values(pts) ** self.p

    def _jet_ad(self, pts, order):
        return self.base._jet_ad(pts, order) ** self.p


class FuncField(Field):
    def __init__(self, fn, arg):
        if fn not in exprlang.FUNCTIONS:
            raise ValueError(f"unknown function {fn!r}")
        self.fn = fn
        self.arg = as_field(arg)

    def values(self, pts):
        return getattr(np, self.fn)(self.arg.values(pts))

    def _jet_ad(self, pts, order):
        return getattr(self.arg._jet_ad(pts, order), self.fn)()


class DerivField(Field):
    """Definitional coordinate derivative d(base)/d(coord mu).

    The value is produced by one analytic derivative of the base field, so
    jets of this field cap at one order below the base field's.
    """

    def __init__(self, base, mu):
        self.base = base
        self.mu = mu

    def values(self, pts):
        return self.base._jet_ad(pts, 1).grad[:, self.mu]

    def _jet_ad(self, pts, order):
        base = self.base._jet_ad(pts, min(order + 1, 2))
        g = base.hess[:, self.mu, :] if (order >= 1 and base.hess is not None) else None
        return Jet(base.grad[:, self.mu], g, None)


def jet_partial(jet, mu):
    """The coordinate partial of a jet, one order lower."""
    g = jet.hess[:, mu, :] if jet.hess is not None else None
    if jet.grad is None:
        raise ValueError("jet carries no gradient to take a partial from")
    return Jet(jet.grad[:, mu], g, None)


def jet_matrix_inverse(rows):
    """Inverse of a d x d matrix of jets (d <= 3) via the adjugate."""
    d = len(rows)
    a = rows
    if d == 1:
        det = a[0][0]
        inv = [[det.reciprocal()]]
        return inv, det
    if d == 2:
        det = a[0][0] * a[1][1] - a[0][1] * a[1][0]
        idet = det.reciprocal()
        inv = [
            [a[1][1] * idet, -a[0][1] * idet],
            [-a[1][0] * idet, a[0][0] * idet],
        ]
        return inv, det
    if d == 3:
        c = [[None] * 3 for _ in range(3)]
        for i in range(3):
            for j in range(3):
                r = [k for k in range(3) if k != i]
                s = [k for k in range(3) if k != j]
                minor = a[r[0]][s[0]] * a[r[1]][s[1]] - a[r[0]][s[1]] * a[r[1]][s[0]]
                c[i][j] = minor if (i + j) % 2 == 0 else -minor
        det = a[0][0] * c[0][0] + a[0][1] * c[0][1] + a[0][2] * c[0][2]
        idet = det.reciprocal()
        inv = [[c[j][i] * idet for j in range(3)] for i in range(3)]
        return inv, det
    raise ValueError("only dimensions 1..3 are supported")


class ComplexField:
    """Pair of real fields representing re + i*im; closed under complex
    constant linear combinations, which is all spinor algebra needs."""

    def __init__(self, re, im=None):
        self.re = as_field(re)
        self.im = as_field(im if im is not None else 0.0)

    def values(self, pts):
        return self.re.values(pts) + 1j * self.im.values(pts)

    def jet(self, pts, order=2, engine=AD):
        return complex_jet(
            self.re.jet(pts, order, engine), self.im.jet(pts, order, engine)
        )

    def __add__(self, other):
        other = _as_cfield(other)
        return ComplexField(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_cfield(other)
        return ComplexField(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return ComplexField(-self.re, -self.im)

    def scaled(self, c):
        """Multiply by a complex constant."""
        c = complex(c)
        return ComplexField(
            c.real * self.re - c.imag * self.im,
            c.real * self.im + c.imag * self.re,
        )

    def mul_field(self, f):
        """Multiply by a real scalar field."""
        f = as_field(f)
        return ComplexField(self.re * f, self.im * f)


def _as_cfield(x):
    if isinstance(x, ComplexField):
        return x
    if isinstance(x, Field):
        return ComplexField(x)
    c = complex(x)
    return ComplexField(ConstField(c.real), ConstField(c.imag))
