# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: fixed-step propagation and first-passage refinement.

Same signatures and arithmetic order as ``_pykernels``.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def propagate(M, y0, Py_ssize_t n_steps, Py_ssize_t stride=1):
    if stride < 1:
        raise ValueError("stride must be >= 1")
    cdef double[:, ::1] m = np.ascontiguousarray(M, dtype=np.float64)
    cdef double m00 = m[0, 0], m01 = m[0, 1], m02 = m[0, 2]
    cdef double m10 = m[1, 0], m11 = m[1, 1], m12 = m[1, 2]
    cdef double m20 = m[2, 0], m21 = m[2, 1], m22 = m[2, 2]
    cdef double a = y0[0], b = y0[1], c = y0[2]
    cdef double na, nb, nc
    out_arr = np.empty((n_steps // stride + 1, 3))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t k, row = 1
    out[0, 0] = a
    out[0, 1] = b
    out[0, 2] = c
    with nogil:
        for k in range(1, n_steps + 1):
            na = m00 * a + m01 * b + m02 * c
            nb = m10 * a + m11 * b + m12 * c
            nc = m20 * a + m21 * b + m22 * c
            a = na
            b = nb
            c = nc
            if k % stride == 0:
                out[row, 0] = a
                out[row, 1] = b
                out[row, 2] = c
                row += 1
    return out_arr


def scan_survival(M, y0, double w_stop, Py_ssize_t max_steps):
    cdef double[:, ::1] m = np.ascontiguousarray(M, dtype=np.float64)
    cdef double m00 = m[0, 0], m01 = m[0, 1], m02 = m[0, 2]
    cdef double m10 = m[1, 0], m11 = m[1, 1], m12 = m[1, 2]
    cdef double m20 = m[2, 0], m21 = m[2, 1], m22 = m[2, 2]
    cdef double a = y0[0], b = y0[1], c = y0[2]
    cdef double na, nb, nc
    cdef Py_ssize_t cap = 1024 if max_steps > 1023 else max_steps + 1
    buf_arr = np.empty((cap, 3))
    cdef double[:, ::1] buf = buf_arr
    cdef Py_ssize_t k = 0
    buf[0, 0] = a
    buf[0, 1] = b
    buf[0, 2] = c
    while k < max_steps and a * a + b * b + c * c >= w_stop:
        if k + 1 >= cap:
            cap = cap * 2
            if cap > max_steps + 1:
                cap = max_steps + 1
            buf_arr = np.resize(buf_arr, (cap, 3))
            buf = buf_arr
        with nogil:
            while k < max_steps and k + 1 < cap and a * a + b * b + c * c >= w_stop:
                na = m00 * a + m01 * b + m02 * c
                nb = m10 * a + m11 * b + m12 * c
                nc = m20 * a + m21 * b + m22 * c
                a = na
                b = nb
                c = nc
                k += 1
                buf[k, 0] = a
                buf[k, 1] = b
                buf[k, 2] = c
    return buf_arr[: k + 1].copy()


cdef inline double _entry(const double* P, Py_ssize_t k, double t) noexcept nogil:
    # P is the flattened (5, 3, 3) coefficient array; k = 3*i + j
    cdef double e = P[36 + k]
    e = P[27 + k] + t * e
    e = P[18 + k] + t * e
    e = P[9 + k] + t * e
    e = P[k] + t * e
    return e


cdef inline void _apply(const double* P, double t, double y0, double y1, double y2,
                        double* o) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(3):
        o[i] = _entry(P, 3 * i, t) * y0 + _entry(P, 3 * i + 1, t) * y1 + _entry(P, 3 * i + 2, t) * y2


def refine_crossings(states, idx, us, P, int n_bisect=20):
    cdef double[:, ::1] s = np.ascontiguousarray(states, dtype=np.float64)
    cdef cnp.intp_t[::1] ix = np.ascontiguousarray(idx, dtype=np.intp)
    cdef double[::1] u = np.ascontiguousarray(us, dtype=np.float64)
    cdef double[:, :, ::1] p = np.ascontiguousarray(P, dtype=np.float64)
    cdef Py_ssize_t n = u.shape[0], r
    theta_arr = np.empty(n)
    jump_arr = np.empty((n, 3))
    cdef double[::1] theta = theta_arr
    cdef double[:, ::1] jump = jump_arr
    cdef double lo, hi, mid, w, y0, y1, y2
    cdef double o[3]
    cdef double pc[45]
    cdef int it, k
    for k in range(45):
        pc[k] = p[k // 9, (k // 3) % 3, k % 3]
    with nogil:
        for r in range(n):
            y0 = s[ix[r], 0]
            y1 = s[ix[r], 1]
            y2 = s[ix[r], 2]
            lo = 0.0
            hi = 1.0
            for it in range(n_bisect):
                mid = 0.5 * (lo + hi)
                _apply(pc, mid, y0, y1, y2, o)
                w = o[0] * o[0] + o[1] * o[1] + o[2] * o[2]
                if w >= u[r]:
                    lo = mid
                else:
                    hi = mid
            mid = 0.5 * (lo + hi)
            theta[r] = mid
            _apply(pc, mid, y0, y1, y2, o)
            jump[r, 0] = o[0]
            jump[r, 1] = o[1]
            jump[r, 2] = o[2]
    return theta_arr, jump_arr
