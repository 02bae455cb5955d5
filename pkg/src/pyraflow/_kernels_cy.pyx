# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``pyraflow._kernels_py``.

Every loop reproduces the fallback's floating-point evaluation order exactly
(compiled with -ffp-contract=off), so results are bit-identical across the
two backends.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

NAME = "cython"


def halve(cnp.ndarray[cnp.float64_t, ndim=4, mode="c"] a):
    cdef Py_ssize_t b = a.shape[0], h = a.shape[1], w = a.shape[2], c = a.shape[3]
    cdef Py_ssize_t hh = h // 2, hw = w // 2
    cdef cnp.ndarray[cnp.float64_t, ndim=4, mode="c"] out = np.empty((b, hh, hw, c), dtype=np.float64)
    cdef Py_ssize_t i, r, q, k
    cdef double s
    for i in range(b):
        for r in range(hh):
            for q in range(hw):
                for k in range(c):
                    s = a[i, 2 * r, 2 * q, k] + a[i, 2 * r, 2 * q + 1, k]
                    s = s + a[i, 2 * r + 1, 2 * q, k]
                    s = s + a[i, 2 * r + 1, 2 * q + 1, k]
                    out[i, r, q, k] = s * 0.25
    return out


def repeat_nearest(cnp.ndarray[cnp.float64_t, ndim=4, mode="c"] a, int factor):
    cdef Py_ssize_t b = a.shape[0], h = a.shape[1], w = a.shape[2], c = a.shape[3]
    cdef cnp.ndarray[cnp.float64_t, ndim=4, mode="c"] out = np.empty(
        (b, h * factor, w * factor, c), dtype=np.float64
    )
    cdef Py_ssize_t i, r, rr, q, fq, k, f = factor
    cdef double v
    for i in range(b):
        for rr in range(h * f):
            r = rr // f
            for q in range(w):
                for k in range(c):
                    v = a[i, r, q, k]
                    for fq in range(f):
                        out[i, rr, q * f + fq, k] = v
    return out


def block_noise(
    cnp.ndarray[cnp.float64_t, ndim=4, mode="c"] z,
    double coef_z,
    double coef_mean,
    bint force_zero_sum,
):
    cdef Py_ssize_t b = z.shape[0], h = z.shape[1], w = z.shape[2], c = z.shape[3]
    cdef cnp.ndarray[cnp.float64_t, ndim=4, mode="c"] out = np.empty_like(z)
    cdef Py_ssize_t i, r, q, k
    cdef double z00, z01, z10, z11, m, n00, n01, n10, n11
    for i in range(b):
        for r in range(0, h, 2):
            for q in range(0, w, 2):
                for k in range(c):
                    z00 = z[i, r, q, k]
                    z01 = z[i, r, q + 1, k]
                    z10 = z[i, r + 1, q, k]
                    z11 = z[i, r + 1, q + 1, k]
                    m = ((z00 + z01) + z10 + z11) * 0.25
                    n00 = coef_z * z00 + coef_mean * m
                    n01 = coef_z * z01 + coef_mean * m
                    n10 = coef_z * z10 + coef_mean * m
                    if force_zero_sum:
                        n11 = -((n00 + n01) + n10)
                    else:
                        n11 = coef_z * z11 + coef_mean * m
                    out[i, r, q, k] = n00
                    out[i, r, q + 1, k] = n01
                    out[i, r + 1, q, k] = n10
                    out[i, r + 1, q + 1, k] = n11
    return out


def patch9(cnp.ndarray[cnp.float64_t, ndim=3, mode="c"] img):
    cdef Py_ssize_t b = img.shape[0], h = img.shape[1], w = img.shape[2]
    cdef cnp.ndarray[cnp.float64_t, ndim=4, mode="c"] out = np.empty((b, h, w, 9), dtype=np.float64)
    cdef Py_ssize_t i, r, q, dr, dc, rr, qq, k
    for i in range(b):
        for r in range(h):
            for q in range(w):
                k = 0
                for dr in range(-1, 2):
                    for dc in range(-1, 2):
                        rr = r + dr
                        if rr < 0:
                            rr = 0
                        elif rr >= h:
                            rr = h - 1
                        qq = q + dc
                        if qq < 0:
                            qq = 0
                        elif qq >= w:
                            qq = w - 1
                        out[i, r, q, k] = img[i, rr, qq]
                        k += 1
    return out
