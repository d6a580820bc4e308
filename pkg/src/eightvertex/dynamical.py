"""Dynamical 6-vertex representation: sectors of the dynamical-spin space, the
operator-valued monodromy, the vertex-IRF operators on the spin space and the
kernel structure of the periodic odd-N case.

Two realisations of the dynamical-spin space are provided.  The compressed one
indexes a sector by spin configurations h only, the dynamical label being
implied by h and the sector.  The windowed one keeps an explicit finite range
of dynamical labels with shift matrices, and is used to check operator
identities literally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import ops
from .claims import Claim
from .lattice import assemble_monodromy, monodromy_8v, quantum_det, scripted_a, transfer_8v
from .model import GenericityError, ModelParams, r6vd, s_gauge
from .theta import theta


# ----------------------------------------------------------------------------
# sectors


@dataclass(frozen=True)
class DynSector:
    """Eigenspace of eta*S + 2*tau with eigenvalue 2 r eta + x pi + y pi omega."""

    params: ModelParams
    r: int = 0

    @property
    def t0(self) -> complex:
        p = self.params
        return -p.eta * p.N / 2 + p.x * math.pi / 2 + p.y * math.pi * p.omega / 2

    @property
    def invariant(self) -> complex:
        p = self.params
        return 2 * self.r * p.eta + p.x * math.pi + p.y * math.pi * p.omega

    def label(self, h) -> complex:
        """Dynamical label t_{r,h} attached to the spin configuration h."""
        p = self.params
        s = sum(1 - 2 * b for b in h)
        return -p.eta * s / 2 + p.x * math.pi / 2 + p.y * math.pi * p.omega / 2 + self.r * p.eta

    def labels(self):
        return np.array([self.label(h) for h in ops.configs(self.params.N)])

    def window_index(self, h) -> int:
        """Index a of the tau-eigenvalue t(a) = t0 - eta a carried by h."""
        return -self.r - sum(h)


def spin_sums_before(N: int, n: int):
    """For every basis state, sum of sigma^z over the sites strictly left of n."""
    return np.array([sum(1 - 2 * b for b in h[:n]) for h in ops.configs(N)])


# ----------------------------------------------------------------------------
# dynamical monodromy at numeric t


def dyn_monodromy(lam, t, params: ModelParams):
    """M_0(lam|t) = R_0N(lam - xi_N | t + eta sum_{a<N} sz_a) ... R_01(lam - xi_1 | t)."""
    N, eta, xi = params.N, params.eta, params.xi

    def factors(n):
        sums = spin_sums_before(N, n)
        out = []
        for m in np.unique(sums):
            mask = (sums == m).astype(float)
            out.append((mask if n > 0 else None, r6vd(lam - xi[n], t + eta * m, params)))
        return out

    return assemble_monodromy(N, factors)


# ----------------------------------------------------------------------------
# compressed sector representation


@dataclass(frozen=True)
class DynOperator:
    """Operator between sectors, as a matrix in the h-indexed bases."""

    matrix: np.ndarray
    src: int
    dst: int

    def __matmul__(self, other: "DynOperator") -> "DynOperator":
        if other.dst != self.src:
            raise ValueError(f"sector mismatch: {other.dst} -> {self.src}")
        return DynOperator(self.matrix @ other.matrix, other.src, self.dst)

    def __add__(self, other: "DynOperator") -> "DynOperator":
        if (self.src, self.dst) != (other.src, other.dst):
            raise ValueError("cannot add operators between different sectors")
        return DynOperator(self.matrix + other.matrix, self.src, self.dst)

    def __sub__(self, other: "DynOperator") -> "DynOperator":
        return self + DynOperator(-other.matrix, other.src, other.dst)

    def scale(self, c) -> "DynOperator":
        return DynOperator(c * self.matrix, self.src, self.dst)


# column shift of tau and resulting sector change for each monodromy entry
_ENTRY_SHIFT = {(0, 0): (-1, -1), (0, 1): (+1, 0), (1, 0): (-1, 0), (1, 1): (+1, +1)}


def _columns_from_branches(lam, sector: DynSector, entry, tau_shift):
    """Matrix whose column h is M_entry(lam | t_{r,h} + tau_shift * eta)[:, h]."""
    p = sector.params
    dim = 1 << p.N
    out = np.zeros((dim, dim), dtype=complex)
    cfgs = ops.configs(p.N)
    by_weight = {}
    for k, h in enumerate(cfgs):
        by_weight.setdefault(sum(h), []).append(k)
    a, b = entry
    for _, cols in by_weight.items():
        t = sector.label(cfgs[cols[0]]) + tau_shift * p.eta
        M = dyn_monodromy(lam, t, p)
        blk = ops.blocks(M)[2 * a + b]
        out[:, cols] = blk[:, cols]
    return out


def dyn_entry(lam, sector: DynSector, entry) -> DynOperator:
    """Entry of the operator monodromy M(lam|tau) T_tau^{sz_0} acting on a sector.

    T^+ lowers the dynamical label by eta, T^- raises it.
    """
    shift, dsec = _ENTRY_SHIFT[entry]
    mat = _columns_from_branches(lam, sector, entry, shift)
    return DynOperator(mat, sector.r, sector.r + dsec)


def dyn_monodromy_blocks(lam, sector: DynSector):
    """The four operator entries (script A, B, C, D) with source ``sector``."""
    return tuple(dyn_entry(lam, sector, e) for e in ((0, 0), (0, 1), (1, 0), (1, 1)))


def a_tau(lam, sector: DynSector) -> DynOperator:
    """A(lam|tau) restricted to a sector (no dynamical shift)."""
    return DynOperator(_columns_from_branches(lam, sector, (0, 0), 0), sector.r, sector.r)


def d_tau(lam, sector: DynSector) -> DynOperator:
    return DynOperator(_columns_from_branches(lam, sector, (1, 1), 0), sector.r, sector.r)


def antiperiodic_transfer_6vd(lam, params: ModelParams, r: int = 0):
    """B(lam) + C(lam) on the sector r, as a matrix on the spin space."""
    sec = DynSector(params, r)
    return (dyn_entry(lam, sec, (0, 1)) + dyn_entry(lam, sec, (1, 0))).matrix


def sector_leakage(lam, params: ModelParams, K: int | None = None) -> float:
    """Largest component of script B, C, A(tau), D(tau) leaving the sector r = 0.

    Computed in the windowed space, where nothing forces closure.
    """
    win = DynWindow(params, K)
    proj = win.sector_projector(0)
    worst = 0.0
    for op in (win.entry(lam, (0, 1)), win.entry(lam, (1, 0)), win.m_tau(lam, (0, 0)), win.m_tau(lam, (1, 1))):
        inside = op @ proj
        leak = inside - proj @ inside
        worst = max(worst, ops.maxabs(leak) / max(ops.maxabs(inside), 1e-300))
    return worst


# ----------------------------------------------------------------------------
# windowed dynamical-spin space


class DynWindow:
    """Spin space tensored with tau-eigenstates |t(a)>, a in [-K, K]."""

    def __init__(self, params: ModelParams, K: int | None = None, t_offset: complex = 0.0):
        self.params = params
        self.K = params.N + 4 if K is None else K
        self.na = 2 * self.K + 1
        self.dim_spin = 1 << params.N
        self.t0 = DynSector(params, 0).t0 + t_offset
        self.t_offset = t_offset
        self.a_values = np.arange(-self.K, self.K + 1)
        self.t_values = self.t0 - params.eta * self.a_values
        self._cache = {}

    @property
    def dim(self) -> int:
        return self.dim_spin * self.na

    def _ai(self, a: int) -> int:
        return a + self.K

    def shift(self, sign: int):
        """T^+ (sign=+1) maps |t(a)> to |t(a+1)>; T^- the reverse."""
        S = np.zeros((self.na, self.na), dtype=complex)
        for a in self.a_values:
            b = a + sign
            if -self.K <= b <= self.K:
                S[self._ai(b), self._ai(a)] = 1.0
        return np.kron(np.eye(self.dim_spin), S)

    def tau(self):
        return np.kron(np.eye(self.dim_spin), np.diag(self.t_values))

    def total_spin(self):
        return np.kron(np.diag(ops.total_sz(self.params.N)), np.eye(self.na))

    def _monodromies(self, lam):
        key = complex(lam)
        if key not in self._cache:
            self._cache[key] = [dyn_monodromy(lam, t, self.params) for t in self.t_values]
        return self._cache[key]

    def m_tau(self, lam, entry):
        """Entry of M(lam|tau): block diagonal over the dynamical labels."""
        a, b = entry
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for k, M in enumerate(self._monodromies(lam)):
            blk = ops.blocks(M)[2 * a + b]
            E = np.zeros((self.na, self.na))
            E[k, k] = 1.0
            out += np.kron(blk, E)
        return out

    def entry(self, lam, entry):
        """Entry of the operator monodromy M(lam|tau) T_tau^{sz_0}."""
        sign = +1 if entry[1] == 0 else -1
        return self.m_tau(lam, entry) @ self.shift(sign)

    def monodromy(self, lam):
        return ops.from_blocks(*(self.entry(lam, e) for e in ((0, 0), (0, 1), (1, 0), (1, 1))))

    def diag_function(self, func):
        """Diagonal operator func(tau, S) evaluated on each basis state."""
        s = ops.total_sz(self.params.N)
        vals = np.array([[func(t, sv) for t in self.t_values] for sv in s])
        return np.diag(vals.ravel())

    def interior_columns(self, margin: int = 3):
        cols = []
        for k in range(self.dim_spin):
            for j, a in enumerate(self.a_values):
                if abs(a) <= self.K - margin:
                    cols.append(k * self.na + j)
        return np.array(cols)

    def sector_embedding(self, r: int):
        """Inverse of the projector restricted to sector r: e_h -> e_h (x) |t_{r,h}>."""
        if self.t_offset != 0:
            raise ValueError("sectors are defined for the unshifted window only")
        sec = DynSector(self.params, r)
        E = np.zeros((self.dim, self.dim_spin), dtype=complex)
        for k, h in enumerate(ops.configs(self.params.N)):
            a = sec.window_index(h)
            if abs(a) > self.K:
                raise ValueError("window too small for the sector")
            E[k * self.na + self._ai(a), k] = 1.0
        return E

    def sector_projector(self, r: int):
        E = self.sector_embedding(r)
        return E @ E.T

    def drop_label(self):
        """Projector P: e_h (x) |t(a)> -> e_h for every a."""
        return np.kron(np.eye(self.dim_spin), np.ones((1, self.na)))


def _embed_aux(M, which: int, D: int):
    """Place an (aux (x) quantum) operator on auxiliary space 0 or 0' of 0 (x) 0' (x) quantum."""
    m = M.reshape(2, D, 2, D)
    eye = np.eye(2)
    if which == 0:
        full = np.einsum("aibj,cd->acibdj", m, eye)
    else:
        full = np.einsum("cidj,ab->acibdj", m, eye)
    return full.reshape(4 * D, 4 * D)


def rtt_op_residual(l1, l2, params: ModelParams, K: int | None = None, t_offset=0.0) -> float:
    """R_00'(l12 | tau + eta S) M_0(l1) M_0'(l2) = M_0'(l2) M_0(l1) R_00'(l12 | tau)."""
    win = DynWindow(params, K, t_offset)
    D = win.dim
    eta = params.eta
    M1 = win.monodromy(l1)
    M2 = win.monodromy(l2)
    # spaces 0 (x) 0' (x) window
    M0 = _embed_aux(M1, 0, D)
    M0p = _embed_aux(M2, 1, D)
    s = ops.total_sz(params.N)
    Rl = np.zeros((4 * D, 4 * D), dtype=complex)
    Rr = np.zeros((4 * D, 4 * D), dtype=complex)
    for k in range(win.dim_spin):
        for j, t in enumerate(win.t_values):
            idx = k * win.na + j
            E = np.zeros((D, D))
            E[idx, idx] = 1.0
            Rl += np.kron(r6vd(l1 - l2, t + eta * s[k], params), E)
            Rr += np.kron(r6vd(l1 - l2, t, params), E)
    cols = win.interior_columns()
    allcols = np.concatenate([cols + q * D for q in range(4)])
    lhs = (Rl @ M0 @ M0p)[:, allcols]
    rhs = (M0p @ M0 @ Rr)[:, allcols]
    return ops.rel_residual(lhs, rhs)


def inv_mon_residual(lam, params: ModelParams, K: int | None = None, t_offset=0.0) -> float:
    """M(lam) sy M(lam-eta)^{t0} sy = exp(-i y eta S) theta(tau)/theta(tau + eta S) det_q."""
    win = DynWindow(params, K, t_offset)
    D = win.dim
    ep = params.elliptic
    M = win.monodromy(lam)
    Mm = win.monodromy(lam - params.eta)
    sy0 = np.kron(ops.SY, np.eye(D))
    lhs = M @ sy0 @ ops.partial_transpose_first(Mm) @ sy0
    y, eta = params.y, params.eta
    diag = win.diag_function(
        lambda t, s: np.exp(-1j * y * eta * s) * theta(t, ep) / theta(t + eta * s, ep))
    rhs = np.kron(np.eye(2), diag) * quantum_det(lam, params)
    cols = win.interior_columns()
    allcols = np.concatenate([cols, cols + D])
    return ops.rel_residual(lhs[:, allcols], rhs[:, allcols])


def compressed_vs_window_residual(lam, params: ModelParams) -> float:
    """The compressed script B and C agree with the windowed operators on sector 0."""
    win = DynWindow(params)
    E = win.sector_embedding(0)
    sec = DynSector(params, 0)
    worst = 0.0
    for entry in ((0, 1), (1, 0)):
        full = win.entry(lam, entry) @ E
        comp = E @ dyn_entry(lam, sec, entry).matrix
        worst = max(worst, ops.rel_residual(full, comp))
    return worst


# ----------------------------------------------------------------------------
# vertex-IRF operators on the spin space


def s_q(t, params: ModelParams):
    """S_q(t) = S_1(xi_1|t) S_2(xi_2|t + eta sz_1) ... as a 2^N x 2^N matrix."""
    N, eta, xi = params.N, params.eta, params.xi
    cfgs = ops.configs(N)
    out = np.zeros((1 << N, 1 << N), dtype=complex)
    for k, h in enumerate(cfgs):
        cols = []
        m = 0
        for n in range(N):
            cols.append(s_gauge(xi[n], t + eta * m, params)[:, h[n]])
            m += 1 - 2 * h[n]
        out[:, k] = ops.kron_all([c.reshape(2, 1) for c in cols]).ravel()
    return out


def vertex_irf_operator(params: ModelParams, r: int = 0, check: bool = True):
    """S^(r): e_h -> S_q(t_{r,h}) e_h, with its 1-norm condition number."""
    sec = DynSector(params, r)
    N, eta, xi = params.N, params.eta, params.xi
    cfgs = ops.configs(N)
    out = np.zeros((1 << N, 1 << N), dtype=complex)
    for k, h in enumerate(cfgs):
        t = sec.label(h)
        cols = []
        m = 0
        for n in range(N):
            cols.append(s_gauge(xi[n], t + eta * m, params)[:, h[n]])
            m += 1 - 2 * h[n]
        out[:, k] = ops.kron_all([c.reshape(2, 1) for c in cols]).ravel()
    sv = np.linalg.svd(out, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if check and params.twist != (0, 0) and sv[-1] < 1e-12 * sv[0]:
        raise GenericityError(f"vertex-IRF operator numerically singular (cond {cond:.3g})")
    return out, cond


def vertex_irf_factorized(params: ModelParams, r: int = 0):
    """Same operator from the site-by-site form with the centred labels t-hat."""
    N, eta, xi = params.N, params.eta, params.xi
    x, y, om = params.x, params.y, params.omega
    out = np.zeros((1 << N, 1 << N), dtype=complex)
    for k, h in enumerate(ops.configs(N)):
        cols = []
        for j in range(N):
            that = (eta / 2 * sum(1 - 2 * h[a] for a in range(j))
                    + eta / 2 * sum(2 * h[a] - 1 for a in range(j + 1, N))
                    + x * math.pi / 2 + y * math.pi * om / 2 + r * eta)
            cols.append(s_gauge(xi[j] + eta / 2, that, params)[:, h[j]])
        out[:, k] = ops.kron_all([c.reshape(2, 1) for c in cols]).ravel()
    return out


def irf_monodromy_residual(lam, t, params: ModelParams) -> float:
    """M8V_0(lam) S_0(lam|t) S_q(t + eta sz_0) = S_q(t) S_0(lam|t + eta S) M_0(lam|t)."""
    N, eta = params.N, params.eta
    dim = 1 << N
    S0 = np.kron(s_gauge(lam, t, params), np.eye(dim))
    zero = np.zeros((dim, dim))
    Sq_shift = np.block([[s_q(t + eta, params), zero], [zero, s_q(t - eta, params)]])
    lhs = monodromy_8v(lam, params) @ S0 @ Sq_shift
    s = ops.total_sz(N)
    S0_S = np.zeros((2 * dim, 2 * dim), dtype=complex)
    for k in range(dim):
        E = np.zeros((dim, dim))
        E[k, k] = 1.0
        S0_S += np.kron(s_gauge(lam, t + eta * s[k], params), E)
    rhs = np.kron(np.eye(2), s_q(t, params)) @ S0_S @ dyn_monodromy(lam, t, params)
    return ops.rel_residual(lhs, rhs)


def twist_sign(params: ModelParams) -> complex:
    """(-1)^x i^{xy}."""
    return (-1) ** params.x * 1j ** (params.x * params.y)


def conjugation_residual(lam, params: ModelParams):
    """T8V(lam) = (-1)^x i^{xy} S T6VD(lam) S^{-1}; returns (residual, cond S)."""
    S, cond = vertex_irf_operator(params)
    Sinv, _ = ops.lu_inverse(S)
    rhs = twist_sign(params) * S @ antiperiodic_transfer_6vd(lam, params) @ Sinv
    return ops.rel_residual(transfer_8v(lam, params), rhs), cond


def right_action_residual(lam, params: ModelParams, vectors) -> float:
    """T8V(lam) S_q(tau) v against the shifted C and B actions, for v in sector 0.

    Each v is a coefficient vector in the h-basis of sector 0.
    """
    sec = DynSector(params, 0)
    eta = params.eta
    T = transfer_8v(lam, params)
    S0, _ = vertex_irf_operator(params, check=False)
    worst = 0.0
    cfgs = ops.configs(params.N)
    for v in vectors:
        lhs = T @ (S0 @ v)
        rhs = np.zeros_like(lhs)
        for k, h in enumerate(cfgs):
            if v[k] == 0:
                continue
            t = sec.label(h)
            e = np.zeros(len(v), dtype=complex)
            e[k] = v[k]
            C = ops.blocks(dyn_monodromy(lam, t - eta, params))[2]
            B = ops.blocks(dyn_monodromy(lam, t + eta, params))[1]
            rhs += s_q(t - eta, params) @ (C @ e) + s_q(t + eta, params) @ (B @ e)
        worst = max(worst, ops.rel_residual(lhs, twist_sign(params) * rhs))
    return worst


def product_at_nodes_6vd_residual(params: ModelParams) -> float:
    """prod_a (B + C)(xi_a) = prod_a a(xi_a) times the full spin flip, on sector 0."""
    prod = np.eye(1 << params.N, dtype=complex)
    pa = 1.0 + 0j
    for v in params.xi:
        prod = prod @ antiperiodic_transfer_6vd(v, params)
        pa *= scripted_a(v, params)
    return ops.rel_residual(prod, pa * ops.gamma(ops.SX, params.N))


# ----------------------------------------------------------------------------
# periodic odd N


def numerical_kernel(mat, rel_gap: float = 1e-6):
    """Orthonormal kernel basis by singular-value thresholding."""
    U, sv, Vh = np.linalg.svd(mat)
    thresh = rel_gap * sv[0]
    rank = int(np.sum(sv > thresh))
    small = sv[rank:]
    if rank < len(sv) and rank > 0 and sv[rank - 1] < 1e3 * thresh:
        raise GenericityError("no clean singular-value gap for the kernel")
    if small.size and small.max() > 1e-3 * thresh:
        raise GenericityError("kernel singular values not separated from the threshold")
    return Vh[rank:].conj().T, sv


@dataclass
class KernelAnalysis:
    S0: np.ndarray
    S_hat: np.ndarray
    ker_S0: np.ndarray
    ker_S_hat: np.ndarray
    intersection_dim: int
    singular_values: np.ndarray


def kernel_analysis_periodic_odd(params: ModelParams) -> KernelAnalysis:
    if params.twist != (0, 0) or params.N % 2 == 0:
        raise ValueError("kernel analysis applies to the periodic chain with odd N")
    S0, _ = vertex_irf_operator(params, check=False)
    Gz = ops.gamma(ops.SZ, params.N)
    S_hat = S0 @ Gz
    k1, sv = numerical_kernel(S0)
    k2, _ = numerical_kernel(S_hat)
    joint = np.hstack([k1, k2])
    rank = int(np.sum(np.linalg.svd(joint, compute_uv=False) > 1e-8))
    inter = k1.shape[1] + k2.shape[1] - rank
    return KernelAnalysis(S0, S_hat, k1, k2, inter, sv)


def swap_operator(pairs):
    """G with G psi_plus = psi_minus and G psi_minus = psi_plus; G^2 = identity.

    ``pairs`` is a list of (psi_plus, psi_minus) spanning the space.
    """
    V = np.column_stack([v for pair in pairs for v in pair])
    n = V.shape[1]
    swap = np.zeros((n, n), dtype=complex)
    for k in range(0, n, 2):
        swap[k, k + 1] = swap[k + 1, k] = 1.0
    Vinv, cond = ops.lu_inverse(V)
    return V @ swap @ Vinv, cond


def pm_operators(params: ModelParams, pairs):
    """Second phase of the periodic build: S^(+) and S^(-) from the +- eigenbasis."""
    S0, _ = vertex_irf_operator(params, check=False)
    Gz = ops.gamma(ops.SZ, params.N)
    G, _ = swap_operator(pairs)
    S_bar = G @ S0 @ Gz
    return S0 + S_bar, S0 - S_bar, G


# ----------------------------------------------------------------------------
# matrix elements of the inverse twisted monodromy


def _s_coefficients(S):
    """s[(a,b),(i,j)] with S^{-1} E^{ij} S = sum s^{ab}_{ij} E^{ab}; and the tilde partner."""
    Sinv = np.linalg.inv(S)
    s = np.zeros((4, 4), dtype=complex)
    st = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            E = np.zeros((2, 2))
            E[i, j] = 1.0
            s[:, 2 * i + j] = (Sinv @ E @ S).ravel()
            st[:, 2 * i + j] = (S @ E @ Sinv).ravel()
    return s, st


def matrix_element_relations(lam, params: ModelParams, n_vectors: int = 10, seed: int = 0):
    """Check both expansions linking the inverse twisted 8-vertex monodromy to the
    inverse of sigma^x M(lam|t), on random vectors of sector 0.

    Returns a list of claims (biorthogonality and the two relations).
    """
    from .lattice import twist_matrix

    sec = DynSector(params, 0)
    N, eta = params.N, params.eta
    dim = 1 << N
    K = np.kron(twist_matrix(params.twist), np.eye(dim))
    Minv = np.linalg.inv(K @ monodromy_8v(lam, params))
    Mi = [[Minv[:dim, :dim], Minv[:dim, dim:]], [Minv[dim:, :dim], Minv[dim:, dim:]]]
    c = twist_sign(params)
    rng = np.random.default_rng(seed)
    worst1 = worst2 = worst_bi = 0.0
    cfgs = ops.configs(N)
    vecs = rng.normal(size=(n_vectors, dim)) + 1j * rng.normal(size=(n_vectors, dim))
    lhs1 = np.zeros((n_vectors, 2, 2, dim), dtype=complex)
    rhs1 = np.zeros_like(lhs1)
    lhs2 = np.zeros_like(lhs1)
    rhs2 = np.zeros_like(lhs1)
    for k, h in enumerate(cfgs):
        t = sec.label(h)
        S = s_gauge(lam, t, params)
        s, st = _s_coefficients(S)
        worst_bi = max(worst_bi, ops.maxabs(st @ s - np.eye(4)))
        Mbar_inv = np.linalg.inv(np.kron(ops.SX, np.eye(dim)) @ dyn_monodromy(lam, t, params))
        Mb = [[Mbar_inv[:dim, :dim], Mbar_inv[:dim, dim:]], [Mbar_inv[dim:, :dim], Mbar_inv[dim:, dim:]]]
        Sq = s_q(t, params)
        Sq_b = [s_q(t + eta, params), s_q(t - eta, params)]
        for q, v in enumerate(vecs):
            e = np.zeros(dim, dtype=complex)
            e[k] = v[k]
            Sqe = Sq @ e
            for kk in range(2):
                for j in range(2):
                    lhs1[q, kk, j] += Mi[kk][j] @ Sqe
                    acc = np.zeros(dim, dtype=complex)
                    for a in range(2):
                        for b in range(2):
                            acc += s[2 * a + b, 2 * j + kk] * (Sq_b[b] @ (Mb[b][a] @ e))
                    rhs1[q, kk, j] += (-1j) ** (params.x * params.y) * (-1) ** params.x * acc
                    lhs2[q, kk, j] += Sq_b[kk] @ (Mb[kk][j] @ e)
                    acc = np.zeros(dim, dtype=complex)
                    for a in range(2):
                        for b in range(2):
                            acc += st[2 * a + b, 2 * j + kk] * (Mi[b][a] @ Sqe)
                    rhs2[q, kk, j] += c * acc
    worst1 = ops.rel_residual(lhs1, rhs1)
    worst2 = ops.rel_residual(lhs2, rhs2)
    return [
        Claim("irf.s-coefficients-biorthogonal", worst_bi, 1e-10,
              "the conjugation coefficients of S and S^{-1} are mutually inverse"),
        Claim("irf.inverse-monodromy-elements", worst1, 1e-8,
              "[M_(x,y)^{-1}]_{kj} S_q(tau) = (-i)^{xy}(-1)^x sum s^{ab}_{jk} S_q(tau + eta b)[Mbar^{-1}]_{ba}"),
        Claim("irf.inverse-monodromy-elements-reverse", worst2, 1e-8,
              "S_q(tau + eta k)[Mbar^{-1}]_{kj} = i^{xy}(-1)^x sum st^{ab}_{jk}[M_(x,y)^{-1}]_{ba} S_q(tau)"),
    ]


# ----------------------------------------------------------------------------
# projectors and the remaining transfer relations


def projector_pair(params: ModelParams, r: int = 0):
    """P restricted to sector r (window -> spin space) and its inverse."""
    win = DynWindow(params)
    E = win.sector_embedding(r)
    return win.drop_label(), E


def shift_projection_residual(params: ModelParams, n_vectors: int = 5, seed: int = 0) -> float:
    """P(T^+- v) = P(v) on random window vectors supported away from the edges."""
    win = DynWindow(params)
    P = win.drop_label()
    rng = np.random.default_rng(seed)
    cols = win.interior_columns(margin=1)
    worst = 0.0
    for _ in range(n_vectors):
        v = np.zeros(win.dim, dtype=complex)
        v[cols] = rng.normal(size=len(cols)) + 1j * rng.normal(size=len(cols))
        for sign in (+1, -1):
            worst = max(worst, ops.rel_residual(P @ win.shift(sign) @ v, P @ v))
    return worst


def periodic_hat_relation_residual(lam, params: ModelParams) -> float:
    """T_(0,0)(lam) S0 Gz = - S0 Gz Tbar(lam) on the spin space."""
    if params.twist != (0, 0):
        raise ValueError("relation holds for the periodic chain")
    S0, _ = vertex_irf_operator(params, check=False)
    S_hat = S0 @ ops.gamma(ops.SZ, params.N)
    return ops.rel_residual(transfer_8v(lam, params) @ S_hat,
                            -S_hat @ antiperiodic_transfer_6vd(lam, params))


def gamma_z_anticommutation_residual(lam, params: ModelParams) -> float:
    Tb = antiperiodic_transfer_6vd(lam, params)
    Gz = ops.gamma(ops.SZ, params.N)
    return ops.rel_residual(Gz @ Tb @ Gz, -Tb)


def commutation_residual(l1, l2, params: ModelParams) -> float:
    T1 = antiperiodic_transfer_6vd(l1, params)
    T2 = antiperiodic_transfer_6vd(l2, params)
    return ops.rel_residual(T1 @ T2, T2 @ T1)
