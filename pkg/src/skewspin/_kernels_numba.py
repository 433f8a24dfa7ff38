"""Numba-compiled jet kernels.

Same contracts as ``_kernels_numpy``; the loops fuse the outer products and
broadcast multiplies that the numpy path spreads over temporaries.  Lazy
compilation specializes each kernel for float64 and complex128 operands.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def mul_grad(va, ga, vb, gb):
    n, d = ga.shape
    out = np.empty_like(ga)
    for p in range(n):
        for i in range(d):
            out[p, i] = ga[p, i] * vb[p] + gb[p, i] * va[p]
    return out


@njit(cache=True)
def mul_hess(va, ga, ha, vb, gb, hb):
    n, d = ga.shape
    out = np.empty_like(ha)
    for p in range(n):
        for i in range(d):
            for j in range(d):
                out[p, i, j] = (
                    ha[p, i, j] * vb[p]
                    + hb[p, i, j] * va[p]
                    + ga[p, i] * gb[p, j]
                    + gb[p, i] * ga[p, j]
                )
    return out


@njit(cache=True)
def chain_grad(f1, g):
    n, d = g.shape
    out = np.empty_like(g)
    for p in range(n):
        for i in range(d):
            out[p, i] = f1[p] * g[p, i]
    return out


@njit(cache=True)
def chain_hess(f1, f2, g, h):
    n, d = g.shape
    out = np.empty_like(h)
    for p in range(n):
        for i in range(d):
            for j in range(d):
                out[p, i, j] = f1[p] * h[p, i, j] + f2[p] * g[p, i] * g[p, j]
    return out
