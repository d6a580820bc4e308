# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the kernels in ``_pykernels``."""

import numpy as np

from libc.math cimport cos, sin, exp, log, sqrt, floor, ceil, M_PI


cdef inline double complex _cexp(double complex z) noexcept nogil:
    cdef double r = exp(z.real)
    return r * cos(z.imag) + 1j * r * sin(z.imag)


cdef double complex _series_one(double complex a, double complex b, double c,
                                int sign, int deriv, double width) noexcept nogil:
    cdef double nu0 = -b.imag / (M_PI * a.imag)
    cdef long lo = <long>floor(nu0 - width - c)
    cdef long hi = <long>ceil(nu0 + width - c)
    cdef long n
    cdef double nu
    cdef double complex term
    cdef double complex acc = 0
    for n in range(lo, hi + 1):
        nu = n + c
        term = _cexp(1j * M_PI * a * nu * nu + 2j * nu * b)
        if sign < 0 and (n % 2 != 0):
            term = -term
        if deriv:
            term = term * (2j * nu)
        acc = acc + term
    return acc


def gauss_series(double complex a, b, double c, int sign, int deriv, double tol):
    """Evaluate sum_n sign^n exp(i pi a (n+c)^2 + 2i (n+c) b) over an array ``b``."""
    barr = np.asarray(b, dtype=np.complex128)
    cdef double complex[::1] flat = np.ascontiguousarray(barr.ravel())
    out = np.empty(flat.shape[0], dtype=np.complex128)
    cdef double complex[::1] res = out
    cdef double width = sqrt(-log(tol) / (M_PI * a.imag)) + 2.0
    cdef Py_ssize_t k
    with nogil:
        for k in range(flat.shape[0]):
            res[k] = _series_one(a, flat[k], c, sign, deriv, width)
    return out.reshape(barr.shape)


def apply_site(op, mat, int site, int nsites):
    """Apply a 2x2 operator on tensor factor ``site`` (0-based) to the rows of ``mat``."""
    cdef double complex[:, ::1] o = np.ascontiguousarray(op, dtype=np.complex128)
    cdef double complex[:, ::1] x = np.ascontiguousarray(mat, dtype=np.complex128)
    out = np.empty((x.shape[0], x.shape[1]), dtype=np.complex128)
    cdef double complex[:, ::1] y = out
    cdef Py_ssize_t right = 1 << (nsites - site - 1)
    cdef Py_ssize_t block = 2 * right
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t nblocks = x.shape[0] // block
    cdef Py_ssize_t bidx, base, r, col, i0, i1
    cdef double complex u, v
    with nogil:
        for bidx in range(nblocks):
            base = bidx * block
            for r in range(right):
                i0 = base + r
                i1 = i0 + right
                for col in range(m):
                    u = x[i0, col]
                    v = x[i1, col]
                    y[i0, col] = o[0, 0] * u + o[0, 1] * v
                    y[i1, col] = o[1, 0] * u + o[1, 1] * v
    return out
