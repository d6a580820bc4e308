"""Monodromy and twisted transfer matrices of the inhomogeneous chain, with the
identities they satisfy."""

from __future__ import annotations

import math

import numpy as np

from . import _backend, ops
from .claims import Claim
from .model import ModelParams, r8v
from .theta import jtheta, theta, theta_j_prime


def twist_matrix(twist):
    """K = (sigma^x)^y (sigma^z)^x."""
    x, y = twist
    return np.linalg.matrix_power(ops.SX, y) @ np.linalg.matrix_power(ops.SZ, x)


def _r_blocks(r4):
    """Split a 4x4 (aux (x) site) matrix into the 2x2 site operators r[alpha][gamma]."""
    t = np.asarray(r4).reshape(2, 2, 2, 2)  # (alpha, i, gamma, j)
    return [[t[a, :, g, :] for g in range(2)] for a in range(2)]


def assemble_monodromy(N: int, factors):
    """Left-multiply R-factors onto the identity, site by site.

    ``factors(n)`` returns a list of (mask, R4) pairs for site n (0-based);
    ``mask`` is None or a diagonal weight vector over the 2^N quantum basis that
    selects a sigma^z branch of the sites left of n.  The result is the
    (2 * 2^N)-dimensional operator with the auxiliary leg first.
    """
    dim = 1 << N
    eye = np.eye(dim, dtype=complex)
    zero = np.zeros((dim, dim), dtype=complex)
    M = [[eye, zero], [zero, eye.copy()]]
    for n in range(N):
        new = [[np.zeros((dim, dim), dtype=complex) for _ in range(2)] for _ in range(2)]
        for mask, r4 in factors(n):
            rb = _r_blocks(r4)
            for a in range(2):
                for b in range(2):
                    acc = new[a][b]
                    for g in range(2):
                        op = rb[a][g]
                        if not np.any(op):
                            continue
                        term = _backend.apply_site(op, M[g][b], n, N)
                        acc += term if mask is None else mask[:, None] * term
        M = new
    return ops.from_blocks(M[0][0], M[0][1], M[1][0], M[1][1])


def monodromy_8v(lam, params: ModelParams):
    """M_0(lam) = R_0N(lam - xi_N) ... R_01(lam - xi_1)."""
    xi = params.xi
    return assemble_monodromy(params.N, lambda n: [(None, r8v(lam - xi[n], params))])


def transfer_from_monodromy(M, twist):
    K = twist_matrix(twist)
    A, B, C, D = ops.blocks(M)
    blk = [[A, B], [C, D]]
    out = np.zeros_like(A)
    for a in range(2):
        for g in range(2):
            if K[a, g] != 0:
                out += K[a, g] * blk[g][a]
    return out


def transfer_8v(lam, params: ModelParams, twist=None):
    """T_(x,y)(lam) = tr_0[K M_0(lam)]."""
    twist = params.twist if twist is None else twist
    return transfer_from_monodromy(monodromy_8v(lam, params), twist)


def scripted_a(lam, params: ModelParams):
    out = 1.0 + 0j
    for v in params.xi:
        out = out * theta(lam - v + params.eta, params.elliptic)
    return out


def scripted_d(lam, params: ModelParams):
    return scripted_a(lam - params.eta, params)


def scripted_a_xy(lam, params: ModelParams):
    x, y = params.twist
    return (-1) ** (x + y + x * y) * scripted_a(lam, params)


def quantum_det(lam, params: ModelParams):
    return scripted_a(lam, params) * scripted_d(lam - params.eta, params)


def inversion_residual(lam, params: ModelParams) -> float:
    M = monodromy_8v(lam, params)
    Mm = monodromy_8v(lam - params.eta, params)
    dim = 1 << params.N
    sy0 = np.kron(ops.SY, np.eye(dim))
    lhs = M @ sy0 @ ops.partial_transpose_first(Mm) @ sy0
    return ops.rel_residual(lhs, quantum_det(lam, params) * np.eye(2 * dim))


def qdet_operator_residuals(lam, params: ModelParams) -> tuple:
    A, B, C, D = ops.blocks(monodromy_8v(lam, params))
    Am, Bm, Cm, Dm = ops.blocks(monodromy_8v(lam - params.eta, params))
    rhs = quantum_det(lam, params) * np.eye(A.shape[0])
    return ops.rel_residual(A @ Dm - B @ Cm, rhs), ops.rel_residual(D @ Am - C @ Bm, rhs)


def rtt_residual(l1, l2, params: ModelParams) -> float:
    """R_00'(l1-l2) M_0(l1) M_0'(l2) = M_0'(l2) M_0(l1) R_00'(l1-l2)."""
    N = params.N
    n = N + 2
    dim = 1 << N
    M1 = monodromy_8v(l1, params)
    M2 = monodromy_8v(l2, params)
    # embed into 0 (x) 0' (x) quantum: M_0 acts on legs [0, 2..], M_0' on [1, 2..]
    M0 = ops.local_operator(M1, [0] + list(range(2, n)), n)
    M0p = ops.local_operator(M2, [1] + list(range(2, n)), n)
    R = np.kron(r8v(l1 - l2, params), np.eye(dim))
    return ops.rel_residual(R @ M0 @ M0p, M0p @ M0 @ R)


# ----------------------------------------------------------------------------
# identities at special points


def verify_transfer_identities(params: ModelParams, lam=0.31 + 0.17j, tol=1e-9):
    """Quasi-periodicity, node identities, annihilation and exchange relations."""
    N, eta, om = params.N, params.eta, params.omega
    x, y = params.twist
    claims = []
    T = transfer_8v(lam, params)
    claims.append(Claim(
        "transfer.shift-pi",
        ops.rel_residual(transfer_8v(lam + math.pi, params), (-1) ** (N + y) * T),
        tol, "T(lam+pi) = (-1)^(N+y) T(lam)"))
    fac = (-np.exp(-2j * lam - 1j * math.pi * om)) ** N * np.exp(
        2j * (sum(params.xi) - N * eta / 2 + x * math.pi / 2))
    claims.append(Claim(
        "transfer.shift-pi-omega",
        ops.rel_residual(transfer_8v(lam + math.pi * om, params), fac * T),
        tol, "T(lam+pi omega) = (-exp(-2i lam - i pi omega))^N exp(2i[sum xi - N eta/2 + x pi/2]) T(lam)"))
    dim = 1 << N
    eye = np.eye(dim)
    worst_qdet = worst_ann = worst_ex = 0.0
    prod = np.eye(dim, dtype=complex)
    prod_a = 1.0 + 0j
    for v in params.xi:
        M0 = monodromy_8v(v, params)
        M1 = monodromy_8v(v - eta, params)
        T0 = transfer_from_monodromy(M0, params.twist)
        T1 = transfer_from_monodromy(M1, params.twist)
        rhs = (-1) ** (x + y) * quantum_det(v, params) * eye
        worst_qdet = max(worst_qdet, ops.rel_residual(T0 @ T1, rhs))
        A0, B0, C0, D0 = ops.blocks(M0)
        A1, B1, C1, D1 = ops.blocks(M1)
        for P, Q in ((A0, A1), (D0, D1), (B0, B1), (C0, C1)):
            worst_ann = max(worst_ann, ops.maxabs(P @ Q) / (ops.maxabs(P) * ops.maxabs(Q)))
        worst_ex = max(worst_ex, ops.rel_residual(A0 @ D1, -C0 @ B1), ops.rel_residual(D0 @ A1, -B0 @ C1))
        prod = prod @ T0
        prod_a *= scripted_a(v, params)
    claims.append(Claim("transfer.quantum-determinant-at-nodes", worst_qdet, tol,
                        "T(xi_n) T(xi_n - eta) = (-1)^(x+y) det_q M(xi_n)"))
    Kn = ops.gamma(twist_matrix(params.twist), N)
    claims.append(Claim("transfer.product-at-nodes", ops.rel_residual(prod, prod_a * Kn), tol,
                        "prod_n T(xi_n) = prod_n a(xi_n) prod_n K_n"))
    claims.append(Claim("monodromy.annihilation", worst_ann, tol,
                        "A(xi)A(xi-eta) = D D = B B = C C = 0 at every node"))
    claims.append(Claim("monodromy.exchange", worst_ex, tol,
                        "A(xi)D(xi-eta) = -C(xi)B(xi-eta) and D(xi)A(xi-eta) = -B(xi)C(xi-eta)"))
    return claims


# ----------------------------------------------------------------------------
# reconstruction of local operators


def _periodic_nodes(params: ModelParams):
    out = []
    for v in params.xi:
        T = transfer_8v(v, params, twist=(0, 0))
        inv, cond = ops.lu_inverse(T)
        if not np.isfinite(cond) or cond > 1e12:
            raise np.linalg.LinAlgError(f"periodic transfer matrix at node {v} is singular (cond {cond:.3g})")
        out.append((T, inv, cond))
    return out


def inverse_problem_reconstruct(n: int, X, params: ModelParams, variant: int = 1):
    """Rebuild the local operator X at site n (1-based) from monodromy entries."""
    N = params.N
    X = np.asarray(X, dtype=complex)
    nodes = _periodic_nodes(params)
    dim = 1 << N
    left = np.eye(dim, dtype=complex)
    right = np.eye(dim, dtype=complex)
    v = params.xi[n - 1]
    X0 = np.kron(X, np.eye(dim))
    if variant == 1:
        for k in range(n - 1):
            left = left @ nodes[k][0]
        for k in range(n):
            right = right @ nodes[k][1]
        core = _trace_aux(monodromy_8v(v, params) @ X0)
    else:
        for k in range(n):
            left = left @ nodes[k][0]
        for k in range(n - 1):
            right = right @ nodes[k][1]
        sy0 = np.kron(ops.SY, np.eye(dim))
        Mt = ops.partial_transpose_first(monodromy_8v(v - params.eta, params))
        core = _trace_aux(sy0 @ Mt @ sy0 @ X0) / quantum_det(v, params)
    return left @ core @ right


def _trace_aux(mat):
    d = mat.shape[0] // 2
    return mat[:d, :d] + mat[d:, d:]


# ----------------------------------------------------------------------------
# Hamiltonian limit


def xyz_couplings(params: ModelParams) -> dict:
    """Couplings of the XYZ chain obtained from the logarithmic derivative at the
    homogeneous point.

    The common prefactor of J_x and J_y is theta_1'(0|2w)/theta_4(0|2w); see the
    module notes in the README for how it was fixed.
    """
    om2 = 2 * params.omega
    tol = params.elliptic.tail_tol
    eta = params.eta
    th1, th4 = jtheta(1, eta, om2, tol), jtheta(4, eta, om2, tol)
    d1 = theta_j_prime(1, eta, 2, params.elliptic)
    d4 = theta_j_prime(4, eta, 2, params.elliptic)
    pref = theta_j_prime(1, 0.0, 2, params.elliptic) / jtheta(4, 0.0, om2, tol)
    return {
        "Jx": pref * (th4 / th1 + th1 / th4),
        "Jy": pref * (th4 / th1 - th1 / th4),
        "Jz": d1 / th1 - d4 / th4,
        "J0": d1 / th1 + d4 / th4,
    }


def xyz_hamiltonian(params: ModelParams):
    """H = 1/2 sum_n (Jx sx sx + Jy sy sy + Jz sz sz) + N J0 / 2 with twisted boundary."""
    N = params.N
    J = xyz_couplings(params)
    K = twist_matrix(params.twist)
    Kinv = np.linalg.inv(K)
    dim = 1 << N
    H = np.zeros((dim, dim), dtype=complex)
    for pauli, key in ((ops.SX, "Jx"), (ops.SY, "Jy"), (ops.SZ, "Jz")):
        for n in range(N):
            if n + 1 < N:
                H += 0.5 * J[key] * ops.local_operator(np.kron(pauli, pauli), [n, n + 1], N)
            else:
                first = K @ pauli @ Kinv
                if N == 1:
                    H += 0.5 * J[key] * pauli @ first
                else:
                    H += 0.5 * J[key] * ops.local_operator(np.kron(pauli, first), [n, 0], N)
    H += 0.5 * N * J["J0"] * np.eye(dim)
    return H, J


def log_derivative_fd(params: ModelParams, h: float = 1e-5):
    """Central-difference T'(0) T(0)^{-1}."""
    Tp = transfer_8v(h, params)
    Tm = transfer_8v(-h, params)
    T0 = transfer_8v(0.0, params)
    inv, _ = ops.lu_inverse(T0)
    return (Tp - Tm) / (2 * h) @ inv


def hamiltonian_residual(params: ModelParams, h: float = 1e-5) -> float:
    hom = params.with_xi([0.0] * params.N)
    H, _ = xyz_hamiltonian(hom)
    return ops.maxabs(log_derivative_fd(hom, h) - H) / ops.maxabs(H)
