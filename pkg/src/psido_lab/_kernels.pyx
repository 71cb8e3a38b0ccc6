# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; semantics mirror ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, fabs, hypot

cnp.import_array()

cdef int MAX_ITER = 500
cdef double REL_TOL = 1e-14
cdef double FLAT_TOL = 1e-12


def bilinear_sum(P, Q, double sign, amp, v):
    cdef const double[:, ::1] p = np.ascontiguousarray(P, dtype=np.float64)
    cdef const double[:, ::1] q = np.ascontiguousarray(Q, dtype=np.float64)
    cdef const double complex[:, ::1] A = np.ascontiguousarray(amp, dtype=np.complex128)
    cdef const double complex[::1] w = np.ascontiguousarray(v, dtype=np.complex128)
    cdef Py_ssize_t R = A.shape[0], C = A.shape[1], D = p.shape[1]
    out = np.empty(R, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef Py_ssize_t r, c, k
    cdef double th, sr, si, tr, ti
    cdef double complex z
    for r in range(R):
        sr = 0.0
        si = 0.0
        for c in range(C):
            th = 0.0
            for k in range(D):
                th += p[r, k] * q[c, k]
            th *= sign
            z = A[r, c] * w[c]
            tr = cos(th)
            ti = sin(th)
            sr += tr * z.real - ti * z.imag
            si += tr * z.imag + ti * z.real
        o[r] = sr + 1j * si
    return out


def phase_sum(phase, amp, v):
    cdef const double[:, ::1] ph = np.ascontiguousarray(phase, dtype=np.float64)
    cdef const double complex[:, ::1] A = np.ascontiguousarray(amp, dtype=np.complex128)
    cdef const double complex[::1] w = np.ascontiguousarray(v, dtype=np.complex128)
    cdef Py_ssize_t R = A.shape[0], C = A.shape[1]
    out = np.empty(R, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef Py_ssize_t r, c
    cdef double th, sr, si, tr, ti
    cdef double complex z
    for r in range(R):
        sr = 0.0
        si = 0.0
        for c in range(C):
            th = ph[r, c]
            z = A[r, c] * w[c]
            tr = cos(th)
            ti = sin(th)
            sr += tr * z.real - ti * z.imag
            si += tr * z.imag + ti * z.real
        o[r] = sr + 1j * si
    return out


cdef double _mean_abs(const double complex[:, ::1] z, Py_ssize_t r, double cr, double ci) nogil:
    cdef Py_ssize_t k, m = z.shape[1]
    cdef double s = 0.0
    for k in range(m):
        s += hypot(z[r, k].real - cr, z[r, k].imag - ci)
    return s / m


def min_mean_deviation(rows):
    arr = np.ascontiguousarray(rows, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValueError("rows must be 2-D")
    cdef const double complex[:, ::1] z = arr
    cdef Py_ssize_t R = z.shape[0], m = z.shape[1]
    out = np.empty(R)
    cdef double[::1] o = out
    cdef Py_ssize_t mid = (m - 1) // 2
    med_re = np.partition(arr.real, mid, axis=1)[:, mid].copy()
    med_im = np.partition(arr.imag, mid, axis=1)[:, mid].copy()
    spr_re = np.ptp(arr.real, axis=1)
    spr_im = np.ptp(arr.imag, axis=1)
    cdef double[::1] mre = med_re, mim = med_im, sre = spr_re, sim = spr_im
    cdef Py_ssize_t r, k, it
    cdef double cr, ci, scale, best, f, d, w, sw, Tr, Ti, Rr, Ri, rr, eta, ratio
    cdef double nr, ni, a, b
    for r in range(R):
        cr = mre[r]
        ci = mim[r]
        scale = sre[r] if sre[r] > sim[r] else sim[r]
        best = _mean_abs(z, r, cr, ci)
        if scale == 0.0 or sim[r] <= FLAT_TOL * sre[r] or sre[r] <= FLAT_TOL * sim[r]:
            o[r] = best
            continue
        for it in range(MAX_ITER):
            sw = 0.0
            Tr = 0.0
            Ti = 0.0
            Rr = 0.0
            Ri = 0.0
            eta = 0.0
            for k in range(m):
                a = z[r, k].real - cr
                b = z[r, k].imag - ci
                d = hypot(a, b)
                if d <= 1e-15 * scale:
                    eta += 1.0
                    continue
                w = 1.0 / d
                sw += w
                Tr += w * z[r, k].real
                Ti += w * z[r, k].imag
                Rr += w * a
                Ri += w * b
            if sw == 0.0:
                break
            Tr /= sw
            Ti /= sw
            rr = hypot(Rr, Ri)
            if eta > 0.0 and rr <= eta:
                break
            ratio = eta / rr if rr > 0.0 else 0.0
            a = 1.0 - ratio
            if a < 0.0:
                a = 0.0
            b = ratio if ratio < 1.0 else 1.0
            nr = a * Tr + b * cr
            ni = a * Ti + b * ci
            f = _mean_abs(z, r, nr, ni)
            if f < best:
                best = f
            d = hypot(nr - cr, ni - ci)
            cr = nr
            ci = ni
            if d <= REL_TOL * scale:
                break
        o[r] = best
    return out
