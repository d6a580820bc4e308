"""Functional T-Q equations: Q-functions, Bethe-root Newton solvers, the
diagonal D operators on the separated basis and the eigenstates they build."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import ops
from .dynamical import DynSector, vertex_irf_operator
from .lattice import scripted_a, scripted_d
from .model import GenericityError, ModelParams, lattice_distance
from .oracle import dense_spectrum, span_overlap, vector_overlap
from .sov import SeparateState, SovBasis, build_sov_basis, separate_coefficients
from .spectrum import (
    EigenvalueFn,
    IncompletenessWarning,
    _canonical,
    build_eigenstate_twisted,
    discrete_system_residual,
    periodic_odd_pipeline,
    quasi_periodicity_residuals,
)
from .theta import jtheta, theta, theta_prime, theta_X, theta_X_prime, theta_X_real_period


class IncompletenessError(RuntimeError):
    """Fewer solutions than the completeness statement guarantees."""


class NoAdmissibleBeta(GenericityError):
    pass


DEDUP_TOL = 1e-6
GAUGE_BETA = 1 + 0.5j
GAUGE_MU = 0.93 + 0.4j


# ----------------------------------------------------------------------------
# Q-functions


@dataclass(frozen=True)
class QFunction:
    """prod_j g(lam - lam_j) with g = theta_X (kind "twist") or theta (kind "plain")."""

    roots: tuple
    params: ModelParams
    kind: str = "twist"

    def __post_init__(self):
        object.__setattr__(self, "roots", tuple(complex(r) for r in self.roots))
        if self.kind not in ("twist", "plain"):
            raise ValueError("kind must be 'twist' or 'plain'")
        if self.kind == "twist" and self.params.twist == (0, 0):
            raise ValueError("theta_X needs a non-trivial twist")

    @property
    def alpha(self) -> complex:
        """Norm of the theta function: the sum of the roots."""
        return complex(sum(self.roots))

    @property
    def real_period(self) -> float:
        return theta_X_real_period(self.params.twist) if self.kind == "twist" else math.pi

    def _g(self, u):
        ep = self.params.elliptic
        return theta_X(u, self.params.twist, ep) if self.kind == "twist" else theta(u, ep)

    def _gp(self, u):
        ep = self.params.elliptic
        return theta_X_prime(u, self.params.twist, ep) if self.kind == "twist" else theta_prime(u, ep)

    def __call__(self, lam) -> complex:
        out = 1.0 + 0j
        for r in self.roots:
            out *= self._g(lam - r)
        return complex(out)

    def root_gradient(self, lam):
        """d Q(lam) / d lam_j for every root, from the differentiated series."""
        vals = np.array([self._g(lam - r) for r in self.roots])
        grads = np.empty(len(self.roots), dtype=complex)
        for j, r in enumerate(self.roots):
            grads[j] = -self._gp(lam - r) * np.prod(np.delete(vals, j))
        return grads

    def with_roots(self, roots) -> "QFunction":
        return QFunction(tuple(roots), self.params, self.kind)

    def canonical_roots(self):
        """Roots with real parts reduced to [0, P), sorted; Q only changes sign."""
        P = self.real_period
        red = [complex(r.real % P, r.imag) for r in self.roots]
        # a real part sitting on the cut is put at 0 so that P - tiny and 0 agree
        red = [complex(0.0, r.imag) if P - r.real < 1e-9 else r for r in red]
        return tuple(sorted(red, key=lambda z: (round(z.real, 6), round(z.imag, 6))))


def _lattice_vectors(q: QFunction):
    """Real period and the quasi-period along omega of the building block of q."""
    P = q.real_period
    if q.kind == "plain" or q.params.twist == (0, 1):
        k = 1
    else:
        k = 2
    return P, k * math.pi * q.params.omega


def _reduce(d: complex, P: float, W: complex, full: bool):
    """d modulo P (and W when ``full``), with the integer W-coefficient removed."""
    n = 0
    if full:
        n = round(d.imag / W.imag)
        d = d - n * W
    d = complex((d.real + P / 2) % P - P / 2, d.imag)
    return d, n


def same_root_multiset(q1: QFunction, q2: QFunction, tol: float = DEDUP_TOL, full_lattice: bool = False) -> bool:
    """Equal as multisets modulo the real quasi-period.

    With ``full_lattice`` roots may also differ by multiples of the omega
    quasi-period, provided the shifts add up to zero: then the two products
    agree up to a constant factor.
    """
    P, W = _lattice_vectors(q1)
    left = list(q2.roots)
    total = 0
    for r in q1.roots:
        hit = None
        for k, s in enumerate(left):
            d, n = _reduce(r - s, P, W, full_lattice)
            if abs(d) < tol:
                hit = k
                total += n
                break
        if hit is None:
            return False
        left.pop(hit)
    return total == 0


def _tq_signs(params: ModelParams):
    x, y = params.twist
    return (-1) ** y * (-1j) ** (x * y), (-1) ** x * 1j ** (x * y)


# ----------------------------------------------------------------------------
# homogeneous T-Q equation


def _branch_signs(params: ModelParams, h: int):
    """Coefficients of the two T-Q terms on branch h (the phase only matters for y = 0)."""
    c1, c2 = _tq_signs(params)
    ph = np.exp(1j * h * (1 - params.y) * params.eta)
    return c1 * ph, c2 / ph


def branches(params: ModelParams):
    return (0, 1) if params.y == 0 else (0,)


def tq_residual_homogeneous(t, Q: QFunction, lam, params: ModelParams, h: int = 0) -> complex:
    """t(lam) Q(lam) - c1 a(lam) Q(lam - eta) - c2 d(lam) Q(lam + eta)."""
    if params.twist == (0, 0):
        raise ValueError("homogeneous T-Q equation needs a non-trivial twist")
    c1, c2 = _branch_signs(params, h)
    eta = params.eta
    return complex(t(lam) * Q(lam) - c1 * scripted_a(lam, params) * Q(lam - eta)
                   - c2 * scripted_d(lam, params) * Q(lam + eta))


def tq_scale_homogeneous(t, Q: QFunction, lam, params: ModelParams) -> float:
    """Sum of the moduli of the three terms, the natural size of the residual."""
    eta = params.eta
    return float(abs(t(lam) * Q(lam)) + abs(scripted_a(lam, params) * Q(lam - eta))
                 + abs(scripted_d(lam, params) * Q(lam + eta)))


def bethe_eigenvalue(Q: QFunction, lam, params: ModelParams, h: int = 0) -> complex:
    """Eigenvalue as the ratio of the two T-Q terms over Q."""
    c1, c2 = _branch_signs(params, h)
    eta = params.eta
    return complex((c1 * scripted_a(lam, params) * Q(lam - eta)
                    + c2 * scripted_d(lam, params) * Q(lam + eta)) / Q(lam))


def bethe_equations(Q: QFunction, params: ModelParams, h: int = 0):
    """Residues of the eigenvalue at the roots, each divided by its term sizes."""
    c1, c2 = _branch_signs(params, h)
    eta = params.eta
    out = np.empty(len(Q.roots), dtype=complex)
    for j, r in enumerate(Q.roots):
        u = c1 * scripted_a(r, params) * Q(r - eta)
        v = c2 * scripted_d(r, params) * Q(r + eta)
        out[j] = (u + v) / (abs(u) + abs(v) + 1e-300)
    return out


def _bethe_jacobian(Q: QFunction, params: ModelParams, h: int):
    """Jacobian of the unnormalised residues u_j + v_j in the roots."""
    c1, c2 = _branch_signs(params, h)
    eta, ep = params.eta, params.elliptic
    N = len(Q.roots)
    F = np.empty(N, dtype=complex)
    J = np.empty((N, N), dtype=complex)
    w = np.empty(N)
    for j, r in enumerate(Q.roots):
        a, d = scripted_a(r, params), scripted_d(r, params)
        # d/dlam of a and d through their log-derivatives
        la = sum(theta_prime(r - v + eta, ep) / theta(r - v + eta, ep) for v in params.xi)
        ld = sum(theta_prime(r - v, ep) / theta(r - v, ep) for v in params.xi)
        qm, qp = Q(r - eta), Q(r + eta)
        gm, gp = Q.root_gradient(r - eta), Q.root_gradient(r + eta)
        u, v = c1 * a * qm, c2 * d * qp
        F[j] = u + v
        w[j] = abs(u) + abs(v) + 1e-300
        J[j] = c1 * a * gm + c2 * d * gp
        # the evaluation point is the j-th root itself; d/dlam Q = -sum_k of the root gradients
        J[j, j] = (c1 * a * (la * qm - (gm.sum() - gm[j]))
                   + c2 * d * (ld * qp - (gp.sum() - gp[j])))
    return F / w, J / w[:, None]


def _sample_points(params: ModelParams, n: int, seed: int):
    rng = np.random.default_rng(seed)
    om = params.omega
    return [complex(rng.uniform(0, math.pi) + rng.uniform(0.1, 0.9) * math.pi * om) for _ in range(n)]


def _lm(residual_jac, z0, max_iter=80, tol=1e-14, history=None):
    """Levenberg-Marquardt on a holomorphic residual; returns (z, |r|, converged)."""
    z = np.array(z0, dtype=complex)
    r, J = residual_jac(z)
    norm = np.linalg.norm(r)
    mu = 1e-3
    for _ in range(max_iter):
        if history is not None:
            history.append(norm)
        if not np.isfinite(norm):
            return z, np.inf, False
        if norm < tol:
            return z, norm, True
        A = J.conj().T @ J
        g = J.conj().T @ r
        improved = False
        for _ in range(12):
            try:
                step = np.linalg.solve(A + mu * np.diag(np.diag(A).real + 1e-300), -g)
            except np.linalg.LinAlgError:
                mu *= 10
                continue
            z_new = z + step
            r_new, J_new = residual_jac(z_new)
            n_new = np.linalg.norm(r_new)
            if np.isfinite(n_new) and n_new < norm:
                z, r, J, norm = z_new, r_new, J_new, n_new
                mu = max(mu / 100, 1e-16)
                improved = True
                break
            mu *= 10
        if not improved:
            break
    if history is not None:
        history.append(norm)
    return z, norm, norm < tol


@dataclass
class BetheSolution:
    """Root set with its eigenvalue and diagnostics."""

    Q: QFunction
    ev: EigenvalueFn
    residual: float
    h: int = 0
    oracle_index: int | None = None
    details: dict = field(default_factory=dict)


def imaginary_period(params: ModelParams) -> float:
    """Imaginary part of the quasi-period of theta_X along omega."""
    k = 1 if params.twist == (0, 1) else 2
    return k * math.pi * params.omega.imag


def _seed_roots(params: ModelParams, P: float, rng):
    N = params.N
    im = imaginary_period(params)
    return rng.uniform(0, P, N) + 1j * rng.uniform(-1.2 * im, 1.2 * im, N)


def tq_fit_homogeneous(t, params: ModelParams, seed: int = 0, n_starts: int = 100,
                       tol: float = 1e-10, n_samples: int | None = None, h: int | None = None):
    """Roots of Q for a known eigenvalue t; returns (Q, h, residual).

    Least squares on the T-Q residual at 2N+2 sample points, each divided by
    its term sizes, from random starts in the fundamental strip.  Without an
    explicit ``h`` the branches are tried in turn from every start.
    """
    N = params.N
    rng = np.random.default_rng(seed)
    pts = _sample_points(params, n_samples or 2 * N + 2, seed + 1)
    eta = params.eta
    tv = np.array([t(s) for s in pts])
    av = np.array([scripted_a(s, params) for s in pts])
    dv = np.array([scripted_d(s, params) for s in pts])
    P = theta_X_real_period(params.twist)

    def make(hb):
        c1, c2 = _branch_signs(params, hb)

        def rj(z):
            Q = QFunction(tuple(z), params, "twist")
            r = np.empty(len(pts), dtype=complex)
            J = np.empty((len(pts), N), dtype=complex)
            for k, s in enumerate(pts):
                q0, qm, qp = Q(s), Q(s - eta), Q(s + eta)
                w = abs(tv[k] * q0) + abs(av[k] * qm) + abs(dv[k] * qp) + 1e-300
                r[k] = (tv[k] * q0 - c1 * av[k] * qm - c2 * dv[k] * qp) / w
                J[k] = (tv[k] * Q.root_gradient(s) - c1 * av[k] * Q.root_gradient(s - eta)
                        - c2 * dv[k] * Q.root_gradient(s + eta)) / w
            return r, J
        return rj

    hs = branches(params) if h is None else (h,)
    objectives = {hb: make(hb) for hb in hs}
    for _ in range(n_starts):
        z0 = _seed_roots(params, P, rng)
        for hb in hs:
            z, norm, ok = _lm(objectives[hb], z0)
            if ok or norm < tol:
                return QFunction(tuple(z), params, "twist"), hb, float(norm)
    return None, h, float("inf")


def homogeneous_residual_curve(t, Q: QFunction, params: ModelParams, samples, h: int = 0):
    """Relative residuals of the homogeneous equation at the given points."""
    return np.array([abs(tq_residual_homogeneous(t, Q, s, params, h)) / tq_scale_homogeneous(t, Q, s, params)
                     for s in samples])


def condition_b_shift(Q: QFunction, params: ModelParams):
    """Smallest (alpha_n, beta_n) per site with (Q(xi+.), Q(xi+.-eta)) != (0, 0)."""
    eta, om = params.eta, params.omega
    scale = max(abs(Q(v)) + abs(Q(v - eta)) for v in params.xi) or 1.0
    out = []
    for v in params.xi:
        for al in (0, 1):
            for be in (0, 1):
                z = v + al * math.pi + be * math.pi * om
                if abs(Q(z)) + abs(Q(z - eta)) > 1e-10 * scale:
                    out.append((al, be))
                    break
            else:
                continue
            break
        else:
            out.append(None)
    return out


def solve_bethe_homogeneous(params: ModelParams, seeds=None, n_starts: int = 400, seed: int = 0,
                            spectrum=None, tol: float = 1e-11, mode: str = "oracle-seeded",
                            fit_starts: int = 40):
    """Bethe roots from the residue conditions, by multi-start Newton.

    Each converged root set gives an eigenvalue through the T-Q ratio.  It is
    kept when that function is entire with the right quasi-periodicity (checked
    against its own interpolation from the nodes) and satisfies the discrete
    system.  Both branches h are tried when y = 0, where the phase matters.

    In "oracle-seeded" mode the roots fitted to each known eigenvalue seed the
    Newton solve first; random starts follow in both modes.  Even N must give
    all 2^N eigenvalues; odd N only warns when short.
    """
    if params.twist == (0, 0):
        raise ValueError("homogeneous Bethe equations need a non-trivial twist")
    if mode not in ("oracle-seeded", "blind"):
        raise ValueError(f"unknown mode {mode!r}")
    N = params.N
    want = 1 << N
    rng = np.random.default_rng(seed)
    P = theta_X_real_period(params.twist)
    spectrum = spectrum or dense_spectrum(params)
    samples = _sample_points(params, 6, seed + 7)
    found: list[BetheSolution] = []

    def attempt(z0, hs):
        for h in hs:
            z, norm, ok = _lm(lambda z: _bethe_jacobian(QFunction(tuple(z), params), params, h), z0)
            if not ok and norm > tol:
                continue
            sol = _validate_homogeneous(QFunction(tuple(z), params), params, h, samples, spectrum)
            if sol is None or any(f.oracle_index == sol.oracle_index for f in found):
                continue
            found.append(sol)
            return

    if mode == "oracle-seeded":
        for k, e in enumerate(spectrum.eigenvalues):
            Q, h, _ = tq_fit_homogeneous(EigenvalueFn.from_oracle(e), params, seed=seed + k, n_starts=fit_starts)
            if Q is not None:
                attempt(np.array(Q.roots), (h,))
    starts = list(seeds or [])
    attempts = 0
    while len(found) < want and attempts < n_starts:
        z0 = starts.pop(0) if starts else _seed_roots(params, P, rng)
        attempts += 1
        attempt(z0, branches(params))
    found.sort(key=lambda s: s.oracle_index)
    if len(found) < want:
        msg = f"homogeneous Bethe equations: found {len(found)} of {want} eigenvalues"
        if N % 2 == 0:
            raise IncompletenessError(msg)
        warnings.warn(msg, IncompletenessWarning, stacklevel=2)
    return found


def _validate_homogeneous(Q: QFunction, params: ModelParams, h: int, samples, spectrum, tol=1e-8):
    try:
        vals = np.array([bethe_eigenvalue(Q, v, params, h) for v in params.xi])
    except (ZeroDivisionError, FloatingPointError):
        return None
    if not np.all(np.isfinite(vals)):
        return None
    ev = EigenvalueFn(params, vals, "bethe")
    scale = max(np.max(np.abs(vals)), 1e-300)
    direct = np.array([bethe_eigenvalue(Q, s, params, h) for s in samples])
    interp = np.array([ev(s) for s in samples])
    entire = float(np.max(np.abs(direct - interp)) / scale)
    if not np.isfinite(entire) or entire > tol:
        return None
    disc = discrete_system_residual(ev)
    if disc > tol:
        return None
    idx, err = spectrum.match(vals, tol)
    if idx is None:
        return None
    qp = quasi_periodicity_residuals(ev, samples[:2])
    return BetheSolution(Q, ev, entire, h, idx,
                         {"discrete": disc, "oracle": err, "quasi_periodicity": max(qp),
                          "condition_b": condition_b_shift(Q, params)})


# ----------------------------------------------------------------------------
# diagonal operators on the separated basis


def _c_X(params: ModelParams) -> complex:
    x, y = params.twist
    om, tol = params.omega, params.elliptic.tail_tol
    if x == 0:
        inv = jtheta(4, 0, om, tol)
    elif y == 0:
        inv = 0.5j * np.exp(-0.5j * math.pi * om) * jtheta(2, 0, om, tol)
    else:
        inv = 0.5 * np.exp(-0.5j * math.pi * om) * jtheta(2, 0, om, tol) * jtheta(3, 0, om, tol) * jtheta(4, 0, om, tol)
    return 1.0 / inv


def _pi_X(params: ModelParams) -> complex:
    return math.pi * params.omega if params.y == 0 else math.pi + 0j


def node_grid(h, params: ModelParams):
    """xi_n^(h_n) = xi_n - h_n eta."""
    return [v - b * params.eta for v, b in zip(params.xi, h)]


def d_beta_diagonal(lam, beta, params: ModelParams):
    """Diagonal of D_beta(lam) on the separated basis, indexed like ops.configs."""
    x, y = params.twist
    N = params.N
    c = _c_X(params)
    piX = _pi_X(params)
    g = (x + y - x * y)
    out = np.empty(1 << N, dtype=complex)
    for k, h in enumerate(ops.configs(N)):
        val = 1.0 + 0j
        for n, z in enumerate(node_grid(h, params)):
            if beta[n]:
                val *= c * np.exp(1j * math.pi * g * h[n] / N + 1j * (y == 0) * (lam - z))
            val *= theta_X(lam - z + beta[n] * piX, params.twist, params.elliptic)
        out[k] = val
    return out


def d_bar_diagonal(lam, params: ModelParams):
    """prod_n theta(lam - xi_n^(h_n)) on the separated basis."""
    ep = params.elliptic
    return np.array([np.prod([theta(lam - z, ep) for z in node_grid(h, params)])
                     for h in ops.configs(params.N)])


def d_bar_from_beta(lam, beta, params: ModelParams):
    """exp(i pi (x+y-xy)(S-N)/(2N)) D_beta D_{1-beta}, with S = sum (1 - 2 h_n)."""
    x, y = params.twist
    N = params.N
    g = x + y - x * y
    s = np.array([sum(1 - 2 * b for b in h) for h in ops.configs(N)])
    pref = np.exp(1j * math.pi * g * (s - N) / (2 * N))
    other = tuple(1 - b for b in beta)
    return pref * d_beta_diagonal(lam, beta, params) * d_beta_diagonal(lam, other, params)


def d_bar_beta_independence(lam, params: ModelParams) -> float:
    """Worst relative deviation of the beta-product form from the diagonal theta product."""
    ref = d_bar_diagonal(lam, params)
    worst = 0.0
    for beta in ops.configs(params.N):
        worst = max(worst, ops.rel_residual(d_bar_from_beta(lam, beta, params), ref))
    return worst


# ----------------------------------------------------------------------------
# states


def _frame(params: ModelParams, basis: SovBasis, S=None):
    S = vertex_irf_operator(params)[0] if S is None else S
    Sinv, _ = ops.lu_inverse(S)
    return S @ basis.right, basis.left @ Sinv


def pseudo_vacuum_coefficients(params: ModelParams, basis: SovBasis, f_values=None, eps: int | None = None):
    """Right and left coefficients of the pseudo-vacua on the separated basis.

    ``f_values`` dresses the shifted nodes; ``eps`` is the periodic sign.
    """
    N = params.N
    shifted = np.ones(N, dtype=complex) if f_values is None else np.asarray(f_values, dtype=complex)
    if eps is not None:
        shifted = eps * shifted
    vals = np.concatenate([np.ones(N, dtype=complex), shifted])
    cr = separate_coefficients(SeparateState(vals, "right"), basis)
    cl = separate_coefficients(SeparateState(vals, "left"), basis)
    return cr, cl


def admissible_betas(Q: QFunction, params: ModelParams):
    """beta with Q(xi_n + beta_n pi_X) != 0 for all n, lexicographic order."""
    piX = _pi_X(params)
    scale = max(abs(Q(v)) + abs(Q(v + piX)) for v in params.xi) or 1.0
    return [b for b in ops.configs(params.N)
            if all(abs(Q(v + bn * piX)) > 1e-10 * scale for v, bn in zip(params.xi, b))]


def eigenstate_from_Q(Q: QFunction, params: ModelParams, beta=None, basis: SovBasis | None = None, h: int = 0):
    """prod_j D_beta(lam_j) on the pseudo-vacuum; right and left, unit norm.

    On the branch h = 1 (y = 0) the grid values are those of exp(-i lam) Q,
    which adds exp(i eta sum h_n) on the separated basis.
    """
    basis = basis or build_sov_basis(params)
    ok = admissible_betas(Q, params)
    if beta is None:
        if not ok:
            raise NoAdmissibleBeta("Q vanishes at a shifted node for every beta")
        beta = ok[0]
    elif tuple(beta) not in ok:
        raise NoAdmissibleBeta(f"beta={tuple(beta)} hits a zero of Q")
    diag = np.ones(1 << params.N, dtype=complex)
    for r in Q.roots:
        diag *= d_beta_diagonal(r, beta, params)
    if h and params.y == 0:
        diag *= np.exp(1j * h * params.eta * np.array([sum(c) for c in ops.configs(params.N)]))
    cr, cl = pseudo_vacuum_coefficients(params, basis)
    R, L = _frame(params, basis)
    return _canonical(R @ (diag * cr)), _canonical((cl * diag) @ L)


# ----------------------------------------------------------------------------
# inhomogeneous T-Q equation


@dataclass(frozen=True)
class InhomTQData:
    """Gauge pair (beta, mu) of the inhomogeneous equation and its f and F."""

    params: ModelParams
    beta: complex = GAUGE_BETA
    mu: complex = GAUGE_MU
    margin: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "beta", complex(self.beta))
        object.__setattr__(self, "mu", complex(self.mu))
        if abs(self.beta.imag) < self.margin:
            raise GenericityError(f"beta must be off the real axis, got {self.beta}")
        p, t0, mu = self.params, self.t0, self.mu
        for v in p.xi:
            for z in (mu - v, mu - v - p.eta, mu - t0 - v, mu - t0 - v + p.eta):
                if lattice_distance(z, p.omega) < self.margin:
                    raise GenericityError(f"mu={mu} sits on the excluded lattice")
        if abs(p.eta.imag) < self.margin:
            raise GenericityError("inhomogeneous T-Q solution needs a non-real eta")

    @property
    def t0(self) -> complex:
        return DynSector(self.params, 0).t0

    def f(self, lam) -> complex:
        ep = self.params.elliptic
        return complex(np.exp(-1j * self.params.y * lam) * theta(lam - self.mu, ep)
                       / (self.beta * theta(lam - self.mu + self.t0, ep)))

    def _F_parts(self, lam, Q: QFunction):
        """The two summands of F and their root-gradients."""
        p, ep = self.params, self.params.elliptic
        y, N, eta, om = p.y, p.N, p.eta, p.omega
        mu, t0, b = self.mu, self.t0, self.beta
        c1, c2 = _tq_signs(p)
        s = sum(p.xi) - N * eta
        al = Q.alpha
        th, thp = (lambda u: theta(u, ep)), (lambda u: theta_prime(u, ep))

        w1 = mu - eta - t0
        u1, v1 = lam - mu - al + s, t0 + al - s
        k1 = c1 * np.exp(-1j * y * lam) * th(t0) / (b * scripted_d(mu - t0, p) * th(lam - mu + t0))
        T1 = k1 * Q(w1) * th(u1) / th(v1)
        dT1 = k1 * (Q.root_gradient(w1) * th(u1) / th(v1)
                    + Q(w1) * (-thp(u1) * th(v1) - th(u1) * thp(v1)) / th(v1) ** 2)

        u2, v2 = lam - mu + eta + y * math.pi * om - t0 - al + s, y * math.pi * om - t0 - al + s
        k2 = c2 * b * np.exp(1j * y * (lam + eta)) * th(t0) / (scripted_a(mu - eta, p) * th(lam - mu + eta))
        T2 = k2 * Q(mu) * th(u2) / th(v2)
        dT2 = k2 * (Q.root_gradient(mu) * th(u2) / th(v2)
                    + Q(mu) * (-thp(u2) * th(v2) + th(u2) * thp(v2)) / th(v2) ** 2)
        return T1 + T2, dT1 + dT2

    def F(self, lam, Q: QFunction) -> complex:
        return complex(self._F_parts(lam, Q)[0])

    def terms(self, t_val, lam, Q: QFunction):
        """(tQ, f a Q(-eta) term, d/f Q(+eta) term, a d F) with signs applied."""
        p = self.params
        c1, c2 = _tq_signs(p)
        a, d = scripted_a(lam, p), scripted_d(lam, p)
        return (t_val * Q(lam), c1 * self.f(lam) * a * Q(lam - p.eta),
                c2 * d / self.f(lam + p.eta) * Q(lam + p.eta), a * d * self.F(lam, Q))


def tq_residual_inhomogeneous(t, Q: QFunction, data: InhomTQData, lam, params: ModelParams | None = None) -> complex:
    """tQ - c1 f a Q(lam-eta) - c2 (d/f(lam+eta)) Q(lam+eta) + a d F."""
    p = params or data.params
    if p != data.params:
        raise ValueError("gauge data built for different model parameters")
    t0_, t1, t2, t3 = data.terms(t(lam), lam, Q)
    return complex(t0_ - t1 - t2 + t3)


def inhomogeneous_residual_curve(t, Q: QFunction, data: InhomTQData, samples):
    out = []
    for s in samples:
        terms = data.terms(t(s), s, Q)
        out.append(abs(terms[0] - terms[1] - terms[2] + terms[3]) / sum(abs(v) for v in terms))
    return np.array(out)


def tq_fit_inhomogeneous(t, data: InhomTQData, seed: int = 0, n_starts: int = 200, tol: float = 1e-10):
    """Plain-theta roots for a known eigenvalue, by least squares at sample points."""
    p = data.params
    N, eta = p.N, p.eta
    rng = np.random.default_rng(seed)
    pts = _sample_points(p, 2 * N + 3, seed + 3)
    c1, c2 = _tq_signs(p)
    tv = np.array([t(s) for s in pts])
    av = np.array([scripted_a(s, p) for s in pts])
    dv = np.array([scripted_d(s, p) for s in pts])
    fv = np.array([data.f(s) for s in pts])
    fpv = np.array([data.f(s + eta) for s in pts])

    def rj(z):
        Q = QFunction(tuple(z), p, "plain")
        r = np.empty(len(pts), dtype=complex)
        J = np.empty((len(pts), N), dtype=complex)
        for k, s in enumerate(pts):
            Fv, dF = data._F_parts(s, Q)
            q0, qm, qp = Q(s), Q(s - eta), Q(s + eta)
            terms = (tv[k] * q0, c1 * fv[k] * av[k] * qm, c2 * dv[k] / fpv[k] * qp, av[k] * dv[k] * Fv)
            w = sum(abs(v) for v in terms) + 1e-300
            r[k] = (terms[0] - terms[1] - terms[2] + terms[3]) / w
            J[k] = (tv[k] * Q.root_gradient(s) - c1 * fv[k] * av[k] * Q.root_gradient(s - eta)
                    - c2 * dv[k] / fpv[k] * Q.root_gradient(s + eta) + av[k] * dv[k] * dF) / w
        return r, J

    im = math.pi * p.omega.imag
    for _ in range(n_starts):
        z0 = rng.uniform(0, math.pi, N) + 1j * rng.uniform(-1.2 * im, 1.2 * im, N)
        z, norm, ok = _lm(rj, z0)
        if ok or norm < tol:
            Q = QFunction(tuple(z), p, "plain")
            if all(abs(Q(v)) + abs(Q(v - eta)) > 0 for v in p.xi):
                return Q, float(norm)
    return None, float("inf")


@dataclass
class InhomSolution:
    Q: QFunction
    ev: EigenvalueFn
    residual: float
    states: tuple
    left_states: tuple
    oracle_overlap: float
    details: dict = field(default_factory=dict)


def inhomogeneous_states(Q: QFunction, data: InhomTQData, basis: SovBasis, S_frame=None, eps=None):
    """prod_a Dbar(lam_a) on the f-dressed pseudo-vacuum (right, left)."""
    p = data.params
    diag = np.ones(1 << p.N, dtype=complex)
    for r in Q.roots:
        diag *= d_bar_diagonal(r, p)
    fv = [data.f(v) for v in p.xi]
    cr, cl = pseudo_vacuum_coefficients(p, basis, fv, eps)
    R, L = _frame(p, basis, S_frame)
    return R @ (diag * cr), (cl * diag) @ L


def solve_bethe_inhomogeneous(params: ModelParams, data: InhomTQData | None = None, seed: int = 0,
                              spectrum=None, n_samples: int = 20):
    """Root sets for every eigenvalue, with their D-bar eigenstates.

    Twisted chains get one state per eigenvalue on S^(0); the periodic odd
    chain gets the pair eps = +- on S^(+).
    """
    data = data or InhomTQData(params)
    periodic = params.twist == (0, 0)
    if periodic and params.N % 2 == 0:
        raise ValueError("periodic chain needs odd N")
    spectrum = spectrum or dense_spectrum(params)
    basis = build_sov_basis(params)
    samples = _sample_points(params, n_samples, seed + 11)
    if periodic:
        pr = periodic_odd_pipeline(params, basis=basis)
        evs = [sp.ev for sp in pr.spaces]
        frame, eps_list = pr.S_plus, (+1, -1)
        want = 1 << (params.N - 1)
    else:
        evs = [EigenvalueFn.from_oracle(e) for e in spectrum.eigenvalues]
        frame, eps_list = None, (None,)
        want = 1 << params.N
    out = []
    for k, ev in enumerate(evs):
        Q, _ = tq_fit_inhomogeneous(ev, data, seed=seed + k)
        if Q is None:
            continue
        curve = inhomogeneous_residual_curve(ev, Q, data, samples)
        rights, lefts = [], []
        for eps in eps_list:
            r, l = inhomogeneous_states(Q, data, basis, frame, eps)
            rights.append(r)
            lefts.append(l)
        idx, _ = spectrum.match(ev.values, 1e-8)
        overlap = 0.0
        if idx is not None:
            overlap = span_overlap(np.array(rights).T, spectrum.eigenvalues[idx].right)
        out.append(InhomSolution(Q, ev, float(curve.max()), tuple(rights), tuple(lefts), overlap,
                                 {"oracle_index": idx}))
    if len(out) < want:
        raise IncompletenessError(f"inhomogeneous T-Q: found {len(out)} of {want} root sets")
    return out


def sov_vs_aba_overlap(sol: BetheSolution, basis: SovBasis | None = None) -> float:
    """|cos| between the D_beta-built state and the separated-basis eigenstate."""
    p = sol.ev.params
    basis = basis or build_sov_basis(p)
    r_aba, _ = eigenstate_from_Q(sol.Q, p, basis=basis, h=sol.h)
    r_sov, _ = build_eigenstate_twisted(sol.ev, basis)
    return vector_overlap(r_aba, r_sov)
