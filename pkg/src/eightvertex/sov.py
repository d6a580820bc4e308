"""Separation-of-variables basis of the sector-0 space, the theta determinants
normalising it, separate states and their determinant pairing."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ops
from .claims import Claim
from .dynamical import DynSector, dyn_entry, vertex_irf_operator
from .lattice import scripted_a, scripted_a_xy, scripted_d
from .model import GenericityError, ModelParams
from .theta import theta, vartheta


class BasisConstructionError(RuntimeError):
    pass


# ----------------------------------------------------------------------------
# theta determinants


def xi_bar0(params: ModelParams) -> complex:
    t00 = DynSector(params, 0).label((0,) * params.N)
    return (sum(params.xi) + t00) / params.N


def theta_matrix(h, params: ModelParams):
    """[Theta^(h)]_{ij} = vartheta_{j-1}(xi_i - h_i eta - xibar_0)."""
    N = params.N
    c = xi_bar0(params)
    out = np.empty((N, N), dtype=complex)
    for i in range(N):
        z = params.xi[i] - h[i] * params.eta - c
        for j in range(N):
            out[i, j] = vartheta(j, z, N, params.elliptic)
    return out


def theta_det(h, params: ModelParams) -> complex:
    return complex(np.linalg.det(theta_matrix(h, params)))


def interpolation_weight(lam, a: int, nodes, t, params: ModelParams) -> complex:
    """exp(iy(z_a - lam)) theta(t - lam + z_a)/theta(t) prod_{b != a} theta(lam - z_b)/theta(z_a - z_b)."""
    ep = params.elliptic
    za = nodes[a]
    w = np.exp(1j * params.y * (za - lam)) * theta(t - lam + za, ep) / theta(t, ep)
    for b, zb in enumerate(nodes):
        if b != a:
            w *= theta(lam - zb, ep) / theta(za - zb, ep)
    return complex(w)


# ----------------------------------------------------------------------------
# basis


@dataclass
class SovBasis:
    """Left states as rows, right states as columns, both indexed by h."""

    params: ModelParams
    left: np.ndarray
    right: np.ndarray
    norm: complex
    theta_dets: np.ndarray
    cond: float
    gram_residual: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def configs(self):
        return ops.configs(self.params.N)

    def phases(self):
        """exp(i y eta sum h) for every h."""
        y, eta = self.params.y, self.params.eta
        return np.array([np.exp(1j * y * eta * sum(h)) for h in self.configs])

    def gram(self):
        return self.left @ self.right

    def gram_expected(self):
        return np.diag(1.0 / (self.phases() * self.theta_dets))

    def identity_unphased(self):
        """sum_h det Theta^(h) |h><h| (no phase)."""
        return (self.right * self.theta_dets) @ self.left

    def identity_phased(self):
        """sum_h exp(i y eta sum h) det Theta^(h) |h><h|."""
        return (self.right * (self.theta_dets * self.phases())) @ self.left


def build_sov_basis(params: ModelParams, tol: float = 1e-8) -> SovBasis:
    """Build both bases by repeated action of script C on the reference states.

    The left reference state is kept as the unit covector e_0 (real, positive).
    The right one absorbs the normalisation fixing <0|0> = 1/det Theta^(0).
    """
    N = params.N
    if params.twist == (0, 0) and N % 2 == 0:
        raise GenericityError("sector 0 meets a zero of theta for the periodic even chain")
    params.check_generic()
    sec = DynSector(params, 0)
    eta = params.eta
    dim = 1 << N
    cfgs = ops.configs(N)
    C_at = [dyn_entry(v, sec, (1, 0)).matrix / scripted_d(v - eta, params) for v in params.xi]
    C_shift = [dyn_entry(v - eta, sec, (1, 0)).matrix / scripted_d(v - eta, params) for v in params.xi]

    left = np.zeros((dim, dim), dtype=complex)
    right = np.zeros((dim, dim), dtype=complex)
    e0 = np.zeros(dim, dtype=complex)
    e0[0] = 1.0
    e1 = np.zeros(dim, dtype=complex)
    e1[-1] = 1.0
    for k, h in enumerate(cfgs):
        row = e0.copy()
        for n in range(N):
            if h[n]:
                row = row @ C_at[n]
        left[k] = row
        col = e1.copy()
        for n in range(N):
            if not h[n]:
                col = C_shift[n] @ col
        right[:, k] = col
    dets = np.array([theta_det(h, params) for h in cfgs])
    if np.min(np.abs(dets)) < 1e-12 * np.max(np.abs(dets)):
        raise GenericityError("a theta determinant vanishes")
    g00 = left[0] @ right[:, 0]
    scale = 1.0 / (g00 * dets[0])
    right *= scale
    sv = np.linalg.svd(right, compute_uv=False)
    cond = float(sv[0] / sv[-1])
    basis = SovBasis(params, left, right, 1.0 / scale, dets, cond)
    G = basis.gram()
    expected = basis.gram_expected()
    err = np.abs(G - expected) / np.max(np.abs(expected))
    basis.gram_residual = float(err.max())
    if basis.gram_residual > tol:
        worst = np.unravel_index(np.argmax(err), err.shape)
        raise BasisConstructionError(
            f"Gram relation off by {basis.gram_residual:.3g} at h={cfgs[worst[0]]}, k={cfgs[worst[1]]}")
    return basis


def gram_residuals(basis: SovBasis) -> dict:
    G = basis.gram()
    exp = basis.gram_expected()
    scale = np.max(np.abs(exp))
    off = G - np.diag(np.diag(G))
    diag = np.diag(G) * basis.theta_dets * basis.phases()
    return {
        "off-diagonal": ops.maxabs(off) / scale,
        "diagonal": float(np.max(np.abs(diag - 1.0))),
    }


def decomposition_residuals(basis: SovBasis) -> dict:
    I = np.eye(basis.left.shape[0])
    return {
        "phased": ops.rel_residual(basis.identity_phased(), I),
        "unphased": ops.rel_residual(basis.identity_unphased(), I),
    }


# ----------------------------------------------------------------------------
# B and C actions on the basis


def _sum_weights(lam, h, params, right: bool, which: str):
    """Coefficients and target configurations of the quasi-local actions."""
    N, eta = params.N, params.eta
    nodes = [params.xi[a] - eta * h[a] for a in range(N)]
    t = DynSector(params, 0).label(h)
    out = []
    for a in range(N):
        w = interpolation_weight(lam, a, nodes, t, params)
        if right:
            arg = params.xi[a] - eta * h[a]
            target = list(h)
            if which == "C":
                coef = scripted_d(arg, params)
                target[a] -= 1
            else:
                coef = scripted_a_xy(arg, params)
                target[a] += 1
        else:
            arg = params.xi[a] - eta * (1 - h[a])
            target = list(h)
            if which == "C":
                coef = scripted_d(arg, params)
                target[a] += 1
            else:
                coef = scripted_a_xy(arg, params)
                target[a] -= 1
        out.append((w * coef, tuple(target)))
    return out


def verify_bc_actions(lam, basis: SovBasis) -> list:
    """Compare script B and C on every basis state with the interpolation sums."""
    params = basis.params
    sec = DynSector(params, 0)
    C = dyn_entry(lam, sec, (1, 0)).matrix
    B = dyn_entry(lam, sec, (0, 1)).matrix
    cfgs = basis.configs
    index = {h: k for k, h in enumerate(cfgs)}
    res = {}
    for name, op in (("C", C), ("B", B)):
        worst_r = worst_l = 0.0
        for k, h in enumerate(cfgs):
            exp_r = np.zeros(len(cfgs), dtype=complex)
            exp_l = np.zeros(len(cfgs), dtype=complex)
            for coef, tgt in _sum_weights(lam, h, params, True, name):
                if tgt in index:
                    exp_r += coef * basis.right[:, index[tgt]]
                elif abs(coef) > 1e-12 * max(1.0, abs(coef)):
                    worst_r = max(worst_r, abs(coef))
            for coef, tgt in _sum_weights(lam, h, params, False, name):
                if tgt in index:
                    exp_l += coef * basis.left[index[tgt]]
                elif abs(coef) > 1e-12:
                    worst_l = max(worst_l, abs(coef))
            worst_r = max(worst_r, ops.rel_residual(op @ basis.right[:, k], exp_r))
            worst_l = max(worst_l, ops.rel_residual(basis.left[k] @ op, exp_l))
        res[name] = (worst_r, worst_l)
    return [
        Claim("sov.C-right-action", res["C"][0], 1e-9, "C(lam)|h> as an interpolation sum over T_a^- h"),
        Claim("sov.B-right-action", res["B"][0], 1e-9, "B(lam)|h> as an interpolation sum over T_a^+ h"),
        Claim("sov.C-left-action", res["C"][1], 1e-9, "<h|C(lam) as an interpolation sum over T_a^+ h"),
        Claim("sov.B-left-action", res["B"][1], 1e-9, "<h|B(lam) as an interpolation sum over T_a^- h"),
    ]


# ----------------------------------------------------------------------------
# separate states


@dataclass
class SeparateState:
    """Function on the grid (xi_1, ..., xi_N, xi_1 - eta, ..., xi_N - eta)."""

    values: np.ndarray
    side: str = "right"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 1 or self.values.size % 2:
            raise ValueError("grid values must be a flat array of even length")
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")

    @property
    def N(self) -> int:
        return self.values.size // 2

    def at(self, a: int, h: int) -> complex:
        return self.values[a + h * self.N]

    def to_pairs(self):
        return [[v.real, v.imag] for v in self.values]

    @classmethod
    def from_pairs(cls, pairs, side="right"):
        return cls(np.array([complex(a, b) for a, b in pairs]), side)


def sov_ratio(a: int, params: ModelParams) -> complex:
    """exp(i y eta) a_xy(xi_a)/d(xi_a - eta)."""
    v = params.xi[a]
    return complex(np.exp(1j * params.y * params.eta) * scripted_a_xy(v, params)
                   / scripted_d(v - params.eta, params))


def separate_coefficients(state: SeparateState, basis: SovBasis):
    """Coefficients of the state on the SOV basis, including det Theta^(h)."""
    params = basis.params
    y, eta = params.y, params.eta
    coeffs = np.empty(len(basis.configs), dtype=complex)
    for k, h in enumerate(basis.configs):
        c = basis.theta_dets[k]
        for a, ha in enumerate(h):
            f = np.exp(1j * y * eta * ha) * state.at(a, ha)
            if state.side == "right" and ha:
                f *= sov_ratio(a, params) / np.exp(1j * y * eta)
            c *= f
        coeffs[k] = c
    return coeffs


def separate_vector(state: SeparateState, basis: SovBasis, with_irf: bool = True):
    """Right states as columns S |h>, left states as rows <h| S^{-1}."""
    coeffs = separate_coefficients(state, basis)
    if state.side == "right":
        v = basis.right @ coeffs
        if with_irf:
            S, _ = vertex_irf_operator(basis.params)
            v = S @ v
        return v
    v = coeffs @ basis.left
    if with_irf:
        S, _ = vertex_irf_operator(basis.params)
        v = v @ np.linalg.inv(S)
    return v


def scalar_product_det(alpha: SeparateState, beta: SeparateState, params: ModelParams) -> complex:
    """<beta|alpha> as an N x N determinant."""
    N = params.N
    if alpha.N != N or beta.N != N:
        raise ValueError("states live on a grid of a different size")
    c = xi_bar0(params)
    M = np.zeros((N, N), dtype=complex)
    for j in range(N):
        r = sov_ratio(j, params)
        for h in (0, 1):
            z = params.xi[j] - h * params.eta
            w = r ** h * alpha.at(j, h) * beta.at(j, h)
            for k in range(N):
                M[j, k] += w * vartheta(k, z - c, N, params.elliptic)
    return complex(np.linalg.det(M))


def scalar_product_direct(alpha: SeparateState, beta: SeparateState, basis: SovBasis) -> complex:
    return complex(separate_vector(beta, basis, False) @ separate_vector(alpha, basis, False))


def random_separate_pair(params: ModelParams, rng):
    N = params.N
    a = rng.normal(size=2 * N) + 1j * rng.normal(size=2 * N)
    b = rng.normal(size=2 * N) + 1j * rng.normal(size=2 * N)
    return SeparateState(a, "right"), SeparateState(b, "left")


def reference_ratio_checks(params: ModelParams) -> dict:
    """Values used by the tests: products of a and d on the grid."""
    return {
        "a": [scripted_a(v, params) for v in params.xi],
        "d": [scripted_d(v - params.eta, params) for v in params.xi],
    }
