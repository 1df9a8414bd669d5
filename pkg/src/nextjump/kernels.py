"""Backend selection for the hot loops.

The compiled extension ``_ckernels`` is used when it imports; otherwise the
numpy/pure-Python versions in ``_pykernels`` are used. Set
``NEXTJUMP_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import math
import os

import numpy as np

from . import _pykernels

if os.environ.get("NEXTJUMP_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _ckernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

_active = _compiled if _compiled is not None else _pykernels
BACKEND = "cython" if _compiled is not None else "python"


def available_backends():
    return ("cython", "python") if _compiled is not None else ("python",)


def get_backend(name=None):
    """Return the kernel module for ``name`` (``None`` means the active one)."""
    if name is None:
        return _active
    if name == "python":
        return _pykernels
    if name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def rk4_poly(A, h):
    """Coefficients of the RK4 sub-step propagator as a quartic in theta.

    One classical RK4 step of length ``theta*h`` on y' = A y is
    ``sum_j theta**j * P[j] @ y`` with ``P[j] = (h A)**j / j!``.
    """
    B = h * np.asarray(A, dtype=np.float64)
    P = np.empty((5, 3, 3))
    P[0] = np.eye(3)
    term = np.eye(3)
    for j in range(1, 5):
        term = term @ B
        P[j] = term / math.factorial(j)
    return P


def rk4_matrix(A, h):
    """Full-step RK4 propagator I + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24."""
    P = rk4_poly(A, h)
    return P[0] + P[1] + P[2] + P[3] + P[4]


def propagate(M, y0, n_steps, stride=1, backend=None):
    return get_backend(backend).propagate(M, np.asarray(y0, dtype=np.float64), int(n_steps), int(stride))


def scan_survival(M, y0, w_stop, max_steps, backend=None):
    return get_backend(backend).scan_survival(
        M, np.asarray(y0, dtype=np.float64), float(w_stop), int(max_steps)
    )


def refine_crossings(states, idx, us, P, n_bisect=20, backend=None):
    return get_backend(backend).refine_crossings(states, idx, us, P, int(n_bisect))
