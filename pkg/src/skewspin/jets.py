"""Second-order forward-mode jets over batches of evaluation points.

A :class:`Jet` carries the value, gradient and Hessian of a scalar quantity
with respect to the chart coordinates, evaluated at N points at once:

    value (N,)    grad (N, d)    hess (N, d, d)

``grad``/``hess`` may be ``None`` when fewer derivative orders are tracked;
arithmetic propagates the minimum available order.  Entries are float64 or
complex128; mixed operations promote.  The heavy product/chain updates are
delegated to the selected kernel backend.
"""

from dataclasses import dataclass

import numpy as np

from . import backend


class JetDomainError(ArithmeticError):
    """Raised for evaluation faults: division by zero, log of a non-positive
    value, sqrt of a negative value, or a fractional power of one."""


@dataclass(frozen=True)
class DiffScalar:
    """Single-point result: value, first partials, symmetric second partials."""

    value: float
    grad: np.ndarray
    hess: np.ndarray


def _promote(*arrays):
    dt = np.result_type(*[a.dtype for a in arrays])
    return [np.ascontiguousarray(a, dtype=dt) for a in arrays]


class Jet:
    __slots__ = ("value", "grad", "hess")

    def __init__(self, value, grad=None, hess=None):
        self.value = value
        self.grad = grad
        self.hess = hess

    @property
    def order(self):
        if self.hess is not None:
            return 2
        if self.grad is not None:
            return 1
        return 0

    @property
    def npoints(self):
        return self.value.shape[0]

    @property
    def dim(self):
        if self.grad is not None:
            return self.grad.shape[1]
        return self.hess.shape[1] if self.hess is not None else None

    @staticmethod
    def constant(c, npoints, dim, order=2, dtype=None):
        dt = dtype or (np.complex128 if isinstance(c, complex) else np.float64)
        v = np.full(npoints, c, dtype=dt)
        g = np.zeros((npoints, dim), dtype=dt) if order >= 1 else None
        h = np.zeros((npoints, dim, dim), dtype=dt) if order >= 2 else None
        return Jet(v, g, h)

    @staticmethod
    def coordinate(pts, mu, order=2):
        """Jet of the mu-th coordinate function on points of shape (N, d)."""
        n, d = pts.shape
        v = np.ascontiguousarray(pts[:, mu], dtype=np.float64)
        g = h = None
        if order >= 1:
            g = np.zeros((n, d))
            g[:, mu] = 1.0
        if order >= 2:
            h = np.zeros((n, d, d))
        return Jet(v, g, h)

    def astype(self, dt):
        cast = lambda a: None if a is None else a.astype(dt, copy=False)
        return Jet(cast(self.value), cast(self.grad), cast(self.hess))

    def conj(self):
        cast = lambda a: None if a is None else np.conj(a)
        return Jet(cast(self.value), cast(self.grad), cast(self.hess))

    def real_part(self):
        cast = lambda a: None if a is None else np.real(a)
        return Jet(cast(self.value), cast(self.grad), cast(self.hess))

    def truncate(self, order):
        return Jet(
            self.value,
            self.grad if order >= 1 else None,
            self.hess if order >= 2 else None,
        )

    # -- ring operations ----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet):
            k = min(self.order, other.order)
            return Jet(
                self.value + other.value,
                self.grad + other.grad if k >= 1 else None,
                self.hess + other.hess if k >= 2 else None,
            )
        return Jet(self.value + other, self.grad, self.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet(
            -self.value,
            None if self.grad is None else -self.grad,
            None if self.hess is None else -self.hess,
        )

    def __sub__(self, other):
        if isinstance(other, Jet):
            return self + (-other)
        return Jet(self.value - other, self.grad, self.hess)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(
                self.value * other,
                None if self.grad is None else self.grad * other,
                None if self.hess is None else self.hess * other,
            )
        k = min(self.order, other.order)
        v = self.value * other.value
        g = h = None
        if k >= 1:
            va, ga, vb, gb = _promote(self.value, self.grad, other.value, other.grad)
            g = backend.mul_grad(va, ga, vb, gb)
            if k >= 2:
                ha, hb = _promote(self.hess, other.hess)
                h = backend.mul_hess(va, ga, ha, vb, gb, hb)
        return Jet(v, g, h)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def reciprocal(self):
        v = self.value
        if np.any(v == 0):
            raise JetDomainError("division by zero")
        iv = 1.0 / v
        return self._chain(iv, -iv * iv, 2.0 * iv * iv * iv)

    def __pow__(self, p):
        if isinstance(p, Jet):
            raise TypeError("jet exponent: lower to exp(p*log(x)) first")
        if float(p) == int(p):
            return self._int_pow(int(p))
        if np.any(self.value <= 0):
            raise JetDomainError("fractional power of a non-positive value")
        v = self.value
        f0 = v**p
        return self._chain(f0, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def _int_pow(self, n):
        if n == 0:
            return Jet.constant(1.0, self.npoints, self.dim or 1, self.order)
        if n < 0:
            return self.reciprocal()._int_pow(-n)
        out = self
        for _ in range(n - 1):
            out = out * self
        return out

    # -- chain rule for elementary functions --------------------------------

    def _chain(self, f0, f1, f2):
        g = h = None
        if self.order >= 1:
            f1c, gc = _promote(f1, self.grad)
            g = backend.chain_grad(f1c, gc)
            if self.order >= 2:
                f1c, f2c, gc, hc = _promote(f1, f2, self.grad, self.hess)
                h = backend.chain_hess(f1c, f2c, gc, hc)
        return Jet(f0, g, h)

    def exp(self):
        e = np.exp(self.value)
        return self._chain(e, e, e)

    def log(self):
        if np.any(self.value <= 0):
            raise JetDomainError("log of a non-positive value")
        v = self.value
        iv = 1.0 / v
        return self._chain(np.log(v), iv, -iv * iv)

    def sin(self):
        s, c = np.sin(self.value), np.cos(self.value)
        return self._chain(s, c, -s)

    def cos(self):
        s, c = np.sin(self.value), np.cos(self.value)
        return self._chain(c, -s, -c)

    def sqrt(self):
        if np.any(self.value < 0):
            raise JetDomainError("sqrt of a negative value")
        if self.order >= 1 and np.any(self.value == 0):
            raise JetDomainError("sqrt derivative at zero")
        r = np.sqrt(self.value)
        f1 = 0.5 / r
        return self._chain(r, f1, -0.5 * f1 / self.value)


def complex_jet(re, im):
    """Combine two real jets into one complex jet (re + 1j*im)."""
    k = min(re.order, im.order)
    comb = lambda a, b: a + 1j * b
    return Jet(
        comb(re.value, im.value),
        comb(re.grad, im.grad) if k >= 1 else None,
        comb(re.hess, im.hess) if k >= 2 else None,
    )


def fd_jet(values_fn, pts, order, step):
    """Jet of ``values_fn`` built from central finite differences.

    ``values_fn(pts) -> (N,)`` is evaluated on shifted copies of ``pts``;
    this is the derivative engine that cross-checks the analytic path.
    """
    pts = np.asarray(pts, dtype=np.float64)
    n, d = pts.shape
    v = np.asarray(values_fn(pts))
    if order == 0:
        return Jet(v)
    h = step
    plus = []
    minus = []
    for mu in range(d):
        e = np.zeros(d)
        e[mu] = h
        plus.append(np.asarray(values_fn(pts + e)))
        minus.append(np.asarray(values_fn(pts - e)))
    g = np.stack([(plus[mu] - minus[mu]) / (2 * h) for mu in range(d)], axis=1)
    if order == 1:
        return Jet(v, g)
    hess = np.empty((n, d, d), dtype=g.dtype)
    for mu in range(d):
        hess[:, mu, mu] = (plus[mu] - 2 * v + minus[mu]) / (h * h)
    for mu in range(d):
        for nu in range(mu + 1, d):
            emu = np.zeros(d)
            emu[mu] = h
            enu = np.zeros(d)
            enu[nu] = h
            pp = np.asarray(values_fn(pts + emu + enu))
            pm = np.asarray(values_fn(pts + emu - enu))
            mp = np.asarray(values_fn(pts - emu + enu))
            mm = np.asarray(values_fn(pts - emu - enu))
            hess[:, mu, nu] = hess[:, nu, mu] = (pp - pm - mp + mm) / (4 * h * h)
    return Jet(v, g, hess)
