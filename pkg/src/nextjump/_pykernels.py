"""Pure-Python fallback for the compiled kernels in ``_ckernels.pyx``.

Arithmetic is written in the same order as the C version so both produce
the same doubles on platforms without fused multiply-add contraction.
"""

from __future__ import annotations

import numpy as np


def propagate(M, y0, n_steps, stride=1):
    """Apply the 3x3 step matrix ``n_steps`` times, keeping every ``stride``-th state."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    m = np.ascontiguousarray(M, dtype=np.float64)
    m00, m01, m02 = float(m[0, 0]), float(m[0, 1]), float(m[0, 2])
    m10, m11, m12 = float(m[1, 0]), float(m[1, 1]), float(m[1, 2])
    m20, m21, m22 = float(m[2, 0]), float(m[2, 1]), float(m[2, 2])
    a, b, c = float(y0[0]), float(y0[1]), float(y0[2])
    out = np.empty((n_steps // stride + 1, 3))
    out[0] = (a, b, c)
    row = 1
    for k in range(1, n_steps + 1):
        a, b, c = (
            m00 * a + m01 * b + m02 * c,
            m10 * a + m11 * b + m12 * c,
            m20 * a + m21 * b + m22 * c,
        )
        if k % stride == 0:
            out[row, 0] = a
            out[row, 1] = b
            out[row, 2] = c
            row += 1
    return out


def scan_survival(M, y0, w_stop, max_steps):
    """States y0, y1, ... up to the first with squared norm < ``w_stop``.

    Stops after ``max_steps`` steps if the threshold is never crossed.
    """
    m = np.ascontiguousarray(M, dtype=np.float64)
    m00, m01, m02 = float(m[0, 0]), float(m[0, 1]), float(m[0, 2])
    m10, m11, m12 = float(m[1, 0]), float(m[1, 1]), float(m[1, 2])
    m20, m21, m22 = float(m[2, 0]), float(m[2, 1]), float(m[2, 2])
    a, b, c = float(y0[0]), float(y0[1]), float(y0[2])
    xs = [a]
    ys = [b]
    zs = [c]
    k = 0
    while k < max_steps and a * a + b * b + c * c >= w_stop:
        a, b, c = (
            m00 * a + m01 * b + m02 * c,
            m10 * a + m11 * b + m12 * c,
            m20 * a + m21 * b + m22 * c,
        )
        xs.append(a)
        ys.append(b)
        zs.append(c)
        k += 1
    return np.column_stack((xs, ys, zs))


def _apply_poly(P, theta, y):
    # Horner in theta for each matrix entry, then (..,3,3) @ y.
    n = theta.shape[0]
    out = np.empty((n, 3))
    for i in range(3):
        acc = np.zeros(n)
        for j in range(3):
            e = np.full(n, P[4, i, j])
            e = P[3, i, j] + theta * e
            e = P[2, i, j] + theta * e
            e = P[1, i, j] + theta * e
            e = P[0, i, j] + theta * e
            if j == 0:
                acc = e * y[:, 0]
            else:
                acc = acc + e * y[:, j]
        out[:, i] = acc
    return out


def refine_crossings(states, idx, us, P, n_bisect=20):
    """Bisect the fractional step where the squared norm drops to ``us``.

    ``states[idx]`` brackets each crossing from above; ``P`` holds the
    matrix coefficients of the sub-step propagator as a quartic in the
    step fraction.
    """
    P = np.ascontiguousarray(P, dtype=np.float64)
    y = np.ascontiguousarray(states, dtype=np.float64)[np.asarray(idx, dtype=np.intp)]
    us = np.asarray(us, dtype=np.float64)
    lo = np.zeros(us.shape[0])
    hi = np.ones(us.shape[0])
    for _ in range(n_bisect):
        mid = 0.5 * (lo + hi)
        v = _apply_poly(P, mid, y)
        w = v[:, 0] * v[:, 0] + v[:, 1] * v[:, 1] + v[:, 2] * v[:, 2]
        above = w >= us
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    theta = 0.5 * (lo + hi)
    return theta, _apply_poly(P, theta, y)
