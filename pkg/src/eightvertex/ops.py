"""Small dense-operator helpers on tensor products of spin-1/2 sites.

Sites are numbered from 0 and the first tensor factor is the most significant
bit of a basis index.  Spin up (sigma^z = +1) is basis state 0.
"""

from __future__ import annotations

import itertools

import numpy as np
import scipy.linalg as sla

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PERM = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def maxabs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def rel_residual(lhs, rhs) -> float:
    """Max-entry distance divided by the larger max-entry norm of the two sides."""
    scale = max(maxabs(lhs), maxabs(rhs))
    diff = maxabs(np.asarray(lhs) - np.asarray(rhs))
    return diff / scale if scale > 0 else diff


def configs(n: int):
    """All spin configurations h in {0,1}^n in basis-index order."""
    return [tuple(h) for h in itertools.product((0, 1), repeat=n)]


def index_of(h) -> int:
    out = 0
    for b in h:
        out = (out << 1) | int(b)
    return out


def kron_all(mats):
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def local_operator(mat, sites, n: int):
    """Embed ``mat`` acting on the ordered ``sites`` into the n-site space."""
    sites = list(sites)
    rest = [s for s in range(n) if s not in sites]
    full = np.kron(np.asarray(mat, dtype=complex), np.eye(1 << len(rest), dtype=complex))
    order = sites + rest
    tens = full.reshape([2] * (2 * n))
    # axes of ``tens`` follow ``order``; move them back to natural order
    perm = np.argsort(order)
    tens = tens.transpose(list(perm) + [n + p for p in perm])
    return tens.reshape(1 << n, 1 << n)


def projector(site: int, value: int, n: int):
    p = np.zeros((2, 2), dtype=complex)
    p[value, value] = 1.0
    return local_operator(p, [site], n)


def branch_operator(func, controls, targets, n: int):
    """Operator sum_s |s><s|_controls (x) func(sz values of s) on ``targets``.

    This realises matrix-valued functions of commuting sigma^z arguments, such as
    R_12(lambda | t + eta sigma_3^z), by exact evaluation on each eigen-branch.
    """
    controls = list(controls)
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for s in itertools.product((0, 1), repeat=len(controls)):
        sz = tuple(1 - 2 * v for v in s)
        proj = np.zeros((1 << len(controls),) * 2, dtype=complex)
        idx = index_of(s)
        proj[idx, idx] = 1.0
        mat = np.kron(proj, np.asarray(func(sz), dtype=complex))
        out += local_operator(mat, controls + list(targets), n)
    return out


def partial_transpose_first(mat):
    """Transpose on the first (2-dimensional) tensor factor only."""
    d = mat.shape[0] // 2
    t = mat.reshape(2, d, 2, d)
    return t.transpose(2, 1, 0, 3).reshape(mat.shape)


def blocks(mat):
    """Split an auxiliary (x) quantum operator into its 2x2 block entries."""
    d = mat.shape[0] // 2
    return mat[:d, :d], mat[:d, d:], mat[d:, :d], mat[d:, d:]


def from_blocks(a, b, c, d):
    return np.block([[a, b], [c, d]])


def lu_inverse(mat):
    """Inverse by LU with partial pivoting, together with the 1-norm condition number."""
    mat = np.asarray(mat, dtype=complex)
    lu, piv = sla.lu_factor(mat)
    inv = sla.lu_solve((lu, piv), np.eye(mat.shape[0], dtype=complex))
    cond = float(np.linalg.norm(mat, 1) * np.linalg.norm(inv, 1))
    return inv, cond


def total_sz(n: int):
    """Diagonal of the total spin S = sum_k sigma_k^z in the computational basis."""
    return np.array([sum(1 - 2 * b for b in h) for h in configs(n)], dtype=float)


def gamma(pauli, n: int):
    return kron_all([pauli] * n)
