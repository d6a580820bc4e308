"""Transfer-matrix spectrum from the discrete system at the inhomogeneities, and
the eigenstates built on the separated basis."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import ops
from .dynamical import (
    DynSector,
    kernel_analysis_periodic_odd,
    pm_operators,
    twist_sign,
    vertex_irf_operator,
)
from .lattice import scripted_a, scripted_d
from .model import GenericityError, ModelParams
from .oracle import OracleSpectrum, dense_spectrum, vector_overlap
from .sov import SovBasis, build_sov_basis, interpolation_weight


class IncompletenessWarning(UserWarning):
    pass


class AmbiguityError(RuntimeError):
    pass


# ----------------------------------------------------------------------------
# eigenvalue functions


@dataclass
class EigenvalueFn:
    """Eigenvalue function fixed by its values at the inhomogeneities."""

    params: ModelParams
    values: np.ndarray
    source: str = "nodes"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.params.N,):
            raise ValueError("need one value per site")

    @classmethod
    def from_oracle(cls, ev) -> "EigenvalueFn":
        return cls(ev.params, ev.nodes(), "oracle")

    def __call__(self, lam) -> complex:
        return interpolate_t(lam, self)

    def scaled(self, c) -> "EigenvalueFn":
        return EigenvalueFn(self.params, c * self.values, self.source)

    def key(self):
        return tuple(np.round(self.values, 8))


def _kernel_row(lam, params: ModelParams):
    sec = DynSector(params, 0)
    t00 = sec.label((0,) * params.N)
    return np.array([interpolation_weight(lam, a, list(params.xi), t00, params) for a in range(params.N)])


def interpolate_t(lam, ev: EigenvalueFn) -> complex:
    """sum_a exp(iy(xi_a - lam)) theta(t00 - lam + xi_a)/theta(t00) prod theta(lam - xi_b)/theta(xi_a - xi_b) t(xi_a)."""
    p = ev.params
    for a, v in enumerate(p.xi):
        if lam == v:
            return complex(ev.values[a])
    return complex(_kernel_row(lam, p) @ ev.values)


def discrete_rhs(params: ModelParams):
    """(-1)^{x+y} a(xi_a) d(xi_a - eta)."""
    s = (-1) ** (params.x + params.y)
    return np.array([s * scripted_a(v, params) * scripted_d(v - params.eta, params) for v in params.xi])


def discrete_system_residual(ev: EigenvalueFn, params: ModelParams | None = None) -> float:
    p = params or ev.params
    lhs = np.array([ev.values[a] * ev(p.xi[a] - p.eta) for a in range(p.N)])
    rhs = discrete_rhs(p)
    return float(np.max(np.abs(lhs - rhs) / np.abs(rhs)))


def quasi_periodicity_residuals(ev: EigenvalueFn, samples) -> tuple:
    """Shifts by pi and by pi*omega against their prefactors."""
    p = ev.params
    N, om, x, y = p.N, p.omega, p.x, p.y
    r1 = r2 = 0.0
    for lam in samples:
        t = ev(lam)
        r1 = max(r1, ops.rel_residual(ev(lam + math.pi), (-1) ** (N + y) * t))
        fac = (-np.exp(-2j * lam - 1j * math.pi * om)) ** N * np.exp(
            2j * (sum(p.xi) - N * p.eta / 2 + x * math.pi / 2))
        r2 = max(r2, ops.rel_residual(ev(lam + math.pi * om), fac * t))
    return r1, r2


def product_sign(ev: EigenvalueFn) -> complex:
    """prod t(xi_n) / prod a(xi_n)."""
    p = ev.params
    return complex(np.prod(ev.values) / np.prod([scripted_a(v, p) for v in p.xi]))


def product_residual(ev: EigenvalueFn) -> float:
    """Distance of the product ratio from the eigenvalues of K^{(x) N}.

    Those are +1 for the periodic chain, +-1 for the sigma^z and sigma^x twists
    and +-(-i)^N for the sigma^y twist.
    """
    p = ev.params
    s = product_sign(ev)
    if p.twist == (0, 0):
        return abs(s - 1)
    phase = (-1j) ** (p.N * p.x * p.y)
    return min(abs(s - phase), abs(s + phase))


def q_ratios(ev: EigenvalueFn):
    """Both forms of q^(1)/q^(0) per site."""
    p = ev.params
    c = (-1) ** p.x * 1j ** (p.x * p.y)
    c2 = (-1) ** p.y * 1j ** (p.x * p.y)
    first = np.array([c * scripted_d(v - p.eta, p) / ev(v - p.eta) for v in p.xi])
    second = np.array([c2 * ev.values[a] / scripted_a(v, p) for a, v in enumerate(p.xi)])
    return first, second


# ----------------------------------------------------------------------------
# discrete system solver


def _node_kernel(params: ModelParams):
    """K with t(xi_a - eta) = sum_b K_ab t(xi_b)."""
    return np.array([_kernel_row(v - params.eta, params) for v in params.xi])


def _newton_deflated(x, K, rhs, found, scale=1.0, max_iter=100, tol=1e-13, power=2, shift=1.0):
    for _ in range(max_iter):
        Kx = K @ x
        F = x * Kx - rhs
        if np.max(np.abs(F) / np.abs(rhs)) < tol:
            return x, True
        J = np.diag(Kx) + x[:, None] * K
        try:
            dx = -np.linalg.solve(J, F)
        except np.linalg.LinAlgError:
            return x, False
        # deflation of previously found roots (real directional derivative)
        D = 0.0
        for r in found:
            d = (x - r) / scale
            nd2 = float(np.real(np.vdot(d, d)))
            m = nd2 ** (-power / 2) + shift
            dm = -power * nd2 ** (-power / 2 - 1) * float(np.real(np.vdot(d, dx / scale)))
            D += dm / m
        if abs(1 - D) > 1e-12:
            dx = dx / (1 - D)
        x = x + dx
        if not np.all(np.isfinite(x)):
            return x, False
    return x, False


def solve_discrete_system(params: ModelParams, mode: str = "oracle-seeded", seed: int = 0,
                          oracle: OracleSpectrum | None = None, n_starts: int | None = None):
    """Eigenvalue functions solving the discrete system.

    ``oracle-seeded`` takes the dense spectrum and returns its functions with
    their residuals checked.  ``standalone`` runs a deflated multi-start Newton
    on t_a (K t)_a = rhs_a; completeness of this mode is probabilistic.
    """
    if params.twist == (0, 0) and params.N % 2 == 0:
        raise ValueError("periodic chain with even N is outside this characterisation")
    want = (1 << params.N) if params.twist != (0, 0) else (1 << (params.N - 1))
    if mode == "oracle-seeded":
        spec = oracle or dense_spectrum(params)
        out = [EigenvalueFn.from_oracle(e) for e in spec.eigenvalues]
        return out
    if mode != "standalone":
        raise ValueError(f"unknown mode {mode!r}")
    K = _node_kernel(params)
    rhs = discrete_rhs(params)
    if params.N == 1:
        r = np.sqrt(rhs[0] / K[0, 0])
        roots = [np.array([r]), np.array([-r])]
    else:
        rng = np.random.default_rng(seed)
        scale = np.sqrt(np.abs(rhs / np.diag(K)))
        n_starts = n_starts or 50 * (1 << params.N)
        roots = []
        for k in range(n_starts):
            x0 = scale * (rng.normal(size=params.N) + 1j * rng.normal(size=params.N))
            # alternate plain and deflated starts: deflation alone can stall
            x, ok = _newton_deflated(x0, K, rhs, roots if k % 2 else [], scale)
            if not ok:
                continue
            if all(np.max(np.abs(x - r)) > 1e-6 * np.max(np.abs(r)) for r in roots):
                roots.append(x)
            if len(roots) == 1 << params.N:
                break
    evs = [EigenvalueFn(params, r, "standalone") for r in roots]
    if params.twist == (0, 0):
        evs = [e for e in evs if abs(product_sign(e) - 1) < 1e-6]
    if len(evs) != want:
        warnings.warn(f"standalone solver found {len(evs)} of {want} solutions", IncompletenessWarning)
    evs.sort(key=lambda e: tuple(np.round(e.values.real, 9)))
    return evs


# ----------------------------------------------------------------------------
# eigenstates


def _canonical(v):
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v) > 1e-12 * np.max(np.abs(v))))
    return v * (abs(v[k]) / v[k])


def _sov_coefficients(ratios, basis: SovBasis, side: str):
    """det Theta^(h) prod_a [e^{iy eta h_a} (a_xy/d)^{h_a} q_a^(h_a)] for q^(0) = 1."""
    from .sov import SeparateState, separate_coefficients

    N = basis.params.N
    vals = np.concatenate([np.ones(N, dtype=complex), ratios])
    return separate_coefficients(SeparateState(vals, side), basis)


def build_eigenstate_twisted(ev: EigenvalueFn, basis: SovBasis | None = None):
    """Right and left eigenvectors on the spin space, unit norm."""
    p = ev.params
    if p.twist == (0, 0):
        raise ValueError("use the periodic pipeline for the untwisted chain")
    basis = basis or build_sov_basis(p)
    _, ratios = q_ratios(ev)
    S, _ = vertex_irf_operator(p)
    Sinv, _ = ops.lu_inverse(S)
    cr = _sov_coefficients(ratios, basis, "right")
    cl = _sov_coefficients(ratios, basis, "left")
    right = S @ (basis.right @ cr)
    left = (cl @ basis.left) @ Sinv
    if np.linalg.norm(right) == 0 or np.linalg.norm(left) == 0:
        raise GenericityError("eigenvalue inconsistent: all separated coefficients vanish")
    return _canonical(right), _canonical(left)


def eigenstate_residual(T_of, ev, right, left, samples) -> float:
    worst = 0.0
    for lam in samples:
        T = T_of(lam)
        t = ev(lam)
        scale = max(ops.maxabs(T), 1e-300)
        worst = max(worst, ops.maxabs(T @ right - t * right) / scale / np.linalg.norm(right))
        if left is not None:
            worst = max(worst, ops.maxabs(left @ T - t * left) / scale / np.linalg.norm(left))
    return worst


def six_vertex_eigenvalue(ev: EigenvalueFn) -> EigenvalueFn:
    """tbar = t / ((-1)^x i^{xy})."""
    return ev.scaled(1.0 / twist_sign(ev.params))


def build_eigenstate_6vd(ev6: EigenvalueFn, basis: SovBasis | None = None):
    """Eigenvectors of Tbar on sector 0, given the 6-vertex eigenvalue tbar."""
    p = ev6.params
    basis = basis or build_sov_basis(p)
    s = (-1) ** (p.x + p.y + p.x * p.y)
    ratios = np.array([s * ev6.values[a] / scripted_a(v, p) for a, v in enumerate(p.xi)])
    right = basis.right @ _sov_coefficients(ratios, basis, "right")
    left = _sov_coefficients(ratios, basis, "left") @ basis.left
    return right, left


# ----------------------------------------------------------------------------
# periodic chain, odd N


@dataclass
class PeriodicEigenspace:
    ev: EigenvalueFn
    psi_plus: np.ndarray
    psi_minus: np.ndarray
    minus_via: str
    gamma_z_overlap: float
    states: tuple = ()
    left_states: tuple = ()


@dataclass
class PeriodicResult:
    params: ModelParams
    spaces: list
    S_plus: np.ndarray
    S_minus: np.ndarray
    G: np.ndarray
    kernel: object
    details: dict = field(default_factory=dict)


def gamma_z_proportionality(v) -> float:
    """|<v, Gz v>| / |v|^2: 1 for a Gamma_z eigenvector."""
    Gz = ops.gamma(ops.SZ, int(round(math.log2(len(v)))))
    return vector_overlap(v, Gz @ v)


def periodic_odd_pipeline(params: ModelParams, evs=None, basis: SovBasis | None = None,
                          band=(1e-10, 1e-6)) -> PeriodicResult:
    """Eigenspaces of the periodic odd-N transfer matrix in five stages.

    (i) Tbar eigenvectors for the + eigenvalues, (ii) psi+ through S0,
    (iii) psi- through Gamma_x when psi+ is a Gamma_z eigenvector and through
    Gamma_z otherwise, (iv) the swap G and S^(+-), (v) both eigenstates again
    from S^(+) on the separated basis.

    ``band`` bounds 1 - |cos| between psi+ and Gamma_z psi+ where the
    proportionality test is inconclusive.
    """
    if params.twist != (0, 0) or params.N % 2 == 0:
        raise ValueError("periodic pipeline needs twist (0,0) and odd N")
    N = params.N
    basis = basis or build_sov_basis(params)
    if evs is None:
        evs = solve_discrete_system(params, "oracle-seeded")
    evs = [e for e in evs if abs(product_sign(e) - 1) < 1e-6]
    S0, _ = vertex_irf_operator(params, check=False)
    Gz = ops.gamma(ops.SZ, N)
    Gx = ops.gamma(ops.SX, N)
    spaces = []
    for ev in evs:
        psi6, _ = build_eigenstate_6vd(ev, basis)
        plus = S0 @ psi6
        if np.linalg.norm(plus) < 1e-10 * np.linalg.norm(psi6) * np.linalg.norm(S0):
            raise GenericityError("psi+ vanishes: eigenvalue not in the + part")
        ov = gamma_z_proportionality(plus)
        gap = 1.0 - ov
        if band[0] < gap < band[1]:
            raise AmbiguityError(f"Gamma_z proportionality inconclusive: 1 - |cos| = {gap:.3g}")
        if gap <= band[0]:
            minus, via = Gx @ plus, "gamma_x"
        else:
            minus, via = Gz @ plus, "gamma_z"
        spaces.append(PeriodicEigenspace(ev, plus, minus, via, ov))
    ka = kernel_analysis_periodic_odd(params)
    S_plus, S_minus, G = pm_operators(params, [(s.psi_plus, s.psi_minus) for s in spaces])
    Spl_inv, _ = ops.lu_inverse(S_plus)
    for sp in spaces:
        _, ratios = q_ratios(sp.ev)
        states, lefts = [], []
        for eps in (+1, -1):
            cr = _sov_coefficients(eps * ratios, basis, "right")
            cl = _sov_coefficients(eps * ratios, basis, "left")
            states.append(S_plus @ (basis.right @ cr))
            lefts.append((cl @ basis.left) @ Spl_inv)
        sp.states = tuple(states)
        sp.left_states = tuple(lefts)
    return PeriodicResult(params, spaces, S_plus, S_minus, G, ka)
