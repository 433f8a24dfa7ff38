"""Pure-numpy jet kernels: the fallback backend.

Shapes: values (N,), gradients (N, d), Hessians (N, d, d).  All functions
allocate and return fresh arrays; inputs are never mutated.
"""

import numpy as np


def mul_grad(va, ga, vb, gb):
    """Gradient of a product: ga*vb + gb*va."""
    return ga * vb[:, None] + gb * va[:, None]


def mul_hess(va, ga, ha, vb, gb, hb):
    """Hessian of a product: ha*vb + hb*va + ga (x) gb + gb (x) ga."""
    h = ha * vb[:, None, None] + hb * va[:, None, None]
    h += ga[:, :, None] * gb[:, None, :]
    h += gb[:, :, None] * ga[:, None, :]
    return h


def chain_grad(f1, g):
    """Gradient of f(u): f'(u) * grad u."""
    return f1[:, None] * g


def chain_hess(f1, f2, g, h):
    """Hessian of f(u): f'(u) * hess u + f''(u) * grad u (x) grad u."""
    return f1[:, None, None] * h + f2[:, None, None] * (
        g[:, :, None] * g[:, None, :]
    )
