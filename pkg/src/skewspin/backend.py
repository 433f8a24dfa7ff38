"""Kernel backend selection for the second-order jet arithmetic.

The hot inner loops of every grid sweep are the jet product / chain-rule
updates on arrays of shape (N,), (N, d) and (N, d, d).  Two interchangeable
implementations exist:

* ``numba``  -- fused @njit loops (default when numba imports cleanly)
* ``numpy``  -- pure vectorized numpy, always available

Selection is controlled by the environment variable ``SKEWSPIN_BACKEND``
(``auto`` | ``numba`` | ``numpy``), read once at import time.
``benchmarks/bench_backends.py`` compares the two.
"""

import os

_choice = os.environ.get("SKEWSPIN_BACKEND", "auto").strip().lower()
if _choice not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        f"SKEWSPIN_BACKEND must be one of auto|numba|numpy, got {_choice!r}"
    )

if _choice in ("auto", "numba"):
    try:
        from . import _kernels_numba as kernels

        BACKEND = "numba"
    except ImportError:
        if _choice == "numba":
            raise
        from . import _kernels_numpy as kernels

        BACKEND = "numpy"
else:
    from . import _kernels_numpy as kernels

    BACKEND = "numpy"


def backend_name() -> str:
    return BACKEND


mul_grad = kernels.mul_grad
mul_hess = kernels.mul_hess
chain_grad = kernels.chain_grad
chain_hess = kernels.chain_hess
