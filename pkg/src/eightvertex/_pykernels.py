"""Pure numpy implementations of the hot kernels.

These are the reference versions; ``_ckernels`` mirrors them loop for loop.
"""

import math

import numpy as np


def _window(a, b, c, tol):
    """Integer summation range covering every term above ``tol`` relative to the peak."""
    ima = a.imag
    # |term| = exp(-pi Im(a) (n+c)^2 - 2 (n+c) Im(b)), peaked at n + c = nu0
    nu0 = -np.asarray(b).imag / (math.pi * ima)
    width = math.sqrt(-math.log(tol) / (math.pi * ima)) + 2.0
    lo = int(math.floor(np.min(nu0) - width - c))
    hi = int(math.ceil(np.max(nu0) + width - c))
    return lo, hi


def gauss_series(a, b, c, sign, deriv, tol):
    """Evaluate sum_n sign^n exp(i pi a (n+c)^2 + 2i (n+c) b) over an array ``b``.

    ``deriv`` = 1 returns the derivative with respect to ``b``.
    """
    b = np.asarray(b, dtype=complex)
    flat = b.ravel()
    if flat.size == 0:
        return b.copy()
    lo, hi = _window(a, flat, c, tol)
    n = np.arange(lo, hi + 1)
    nu = n + c
    phase = np.ones(n.shape) if sign > 0 else np.where(n % 2 == 0, 1.0, -1.0)
    expo = 1j * math.pi * a * nu[:, None] ** 2 + 2j * nu[:, None] * flat[None, :]
    terms = phase[:, None] * np.exp(expo)
    if deriv:
        terms = terms * (2j * nu[:, None])
    return terms.sum(axis=0).reshape(b.shape)


def apply_site(op, mat, site, nsites):
    """Apply a 2x2 operator on tensor factor ``site`` (0-based) to the rows of ``mat``."""
    mat = np.asarray(mat, dtype=complex)
    m = mat.shape[1]
    left = 1 << site
    right = 1 << (nsites - site - 1)
    view = mat.reshape(left, 2, right, m)
    out = np.einsum("ij,ajbm->aibm", op, view)
    return out.reshape(mat.shape)
