"""Model parameters and the local objects: 8-vertex and dynamical 6-vertex
R-matrices and the vertex-IRF gauge matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import ops
from .theta import EllipticParams, jtheta, theta


class GenericityError(ValueError):
    """Parameters too close to a degenerate configuration."""


def lattice_distance(z: complex, omega: complex) -> float:
    """Distance from z to the period lattice pi Z + pi omega Z."""
    z = complex(z)
    b = z.imag / (math.pi * omega.imag)
    a = (z - math.pi * b * omega).real / math.pi
    best = math.inf
    for da in (-1, 0, 1):
        for db in (-1, 0, 1):
            m = round(a) + da
            n = round(b) + db
            best = min(best, abs(z - math.pi * m - math.pi * n * omega))
    return best


@dataclass(frozen=True)
class ModelParams:
    """Crossing parameter, inhomogeneities, twist and modular parameter."""

    eta: complex
    xi: tuple
    twist: tuple = (0, 0)
    elliptic: EllipticParams = field(default_factory=lambda: EllipticParams(1j))

    def __post_init__(self):
        object.__setattr__(self, "eta", complex(self.eta))
        object.__setattr__(self, "xi", tuple(complex(v) for v in self.xi))
        x, y = (int(v) for v in self.twist)
        if x not in (0, 1) or y not in (0, 1):
            raise ValueError(f"twist entries must be 0 or 1, got {self.twist}")
        object.__setattr__(self, "twist", (x, y))
        if len(self.xi) < 1:
            raise ValueError("need at least one site")
        for v in (self.eta, *self.xi):
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValueError("parameters must be finite")

    @property
    def N(self) -> int:
        return len(self.xi)

    @property
    def omega(self) -> complex:
        return self.elliptic.omega

    @property
    def x(self) -> int:
        return self.twist[0]

    @property
    def y(self) -> int:
        return self.twist[1]

    def with_twist(self, twist) -> "ModelParams":
        return replace(self, twist=tuple(twist))

    def with_xi(self, xi) -> "ModelParams":
        return replace(self, xi=tuple(xi))

    def genericity_margins(self, max_order: int = 12) -> dict:
        """Smallest lattice distances entering the genericity conditions."""
        om, eta = self.omega, self.eta
        m0 = min(lattice_distance(v + eta / 2, om) for v in self.xi)
        m1 = math.inf
        for a in range(self.N):
            for b in range(self.N):
                if a != b:
                    for eps in (-1, 0, 1):
                        m1 = min(m1, lattice_distance(self.xi[a] - self.xi[b] + eps * eta, om))
        # eta must not be a rational point of the lattice of small order
        m2 = min(lattice_distance(k * eta, om) / k for k in range(1, max_order + 1))
        return {"cond-inh0": m0, "cond-inh": m1, "eta-generic": m2}

    def check_generic(self, margin: float = 1e-3) -> None:
        for name, val in self.genericity_margins().items():
            if val < margin:
                raise GenericityError(f"{name} violated: lattice distance {val:.3g} < {margin:g}")


FIXTURE_ETA = 0.4377 + 0.1155j


def canonical_fixture(N: int, twist=(0, 0), seed: int = 0, margin: float = 1e-3) -> ModelParams:
    """Generic test parameters: omega = i, fixed eta, random inhomogeneities."""
    rng = np.random.default_rng(seed)
    for _ in range(1000):
        xi = rng.uniform(0.1, math.pi - 0.1, N) + 1j * rng.uniform(-0.05, 0.05, N)
        params = ModelParams(FIXTURE_ETA, tuple(xi), twist)
        try:
            params.check_generic(margin)
        except GenericityError:
            continue
        return params
    raise GenericityError("could not draw generic inhomogeneities")


# ----------------------------------------------------------------------------
# 8-vertex R-matrix


@dataclass(frozen=True)
class LocalWeights8V:
    a: complex
    b: complex
    c: complex
    d: complex


def weights_8v(lam, params: ModelParams) -> LocalWeights8V:
    om2 = 2 * params.omega
    tol = params.elliptic.tail_tol
    eta = params.eta

    def t(j, z, tau=om2):
        return jtheta(j, z, tau, tol)

    den = t(2, 0.0, params.omega) * t(4, 0.0)
    th4e, th1e = t(4, eta), t(1, eta)
    t1l, t4l = t(1, lam), t(4, lam)
    t1le, t4le = t(1, lam + eta), t(4, lam + eta)
    return LocalWeights8V(
        a=2 * th4e * t1le * t4l / den,
        b=2 * th4e * t1l * t4le / den,
        c=2 * th1e * t4l * t4le / den,
        d=2 * th1e * t1le * t1l / den,
    )


def r8v(lam, params: ModelParams):
    """8-vertex R-matrix in the basis (uu, ud, du, dd)."""
    w = weights_8v(lam, params)
    return np.array(
        [[w.a, 0, 0, w.d], [0, w.b, w.c, 0], [0, w.c, w.b, 0], [w.d, 0, 0, w.a]], dtype=complex
    )


# ----------------------------------------------------------------------------
# dynamical 6-vertex R-matrix


@dataclass(frozen=True)
class DynWeights6VD:
    a: complex
    b_plus: complex
    b_minus: complex
    c_plus: complex
    c_minus: complex


def _check_dynamical(t, params):
    if abs(theta(t, params.elliptic)) < 1e-14:
        raise GenericityError(f"dynamical parameter {t} sits on a zero of theta")


def weights_6vd(lam, t, params: ModelParams) -> DynWeights6VD:
    """Weights a(lam), b(lam|+-t), c(lam|+-t), without the twist phases."""
    ep = params.elliptic
    eta = params.eta
    _check_dynamical(t, params)

    def b(s):
        return theta(lam, ep) * theta(s + eta, ep) / theta(s, ep)

    def c(s):
        return theta(eta, ep) * theta(s + lam, ep) / theta(s, ep)

    return DynWeights6VD(theta(lam + eta, ep), b(t), b(-t), c(t), c(-t))


def r6vd(lam, t, params: ModelParams):
    """Dynamical 6-vertex R-matrix with the twist-y phase factors."""
    w = weights_6vd(lam, t, params)
    y, eta = params.y, params.eta
    return np.array(
        [
            [w.a, 0, 0, 0],
            [0, np.exp(1j * y * eta) * w.b_plus, np.exp(1j * y * lam) * w.c_plus, 0],
            [0, np.exp(-1j * y * lam) * w.c_minus, np.exp(-1j * y * eta) * w.b_minus, 0],
            [0, 0, 0, w.a],
        ],
        dtype=complex,
    )


# ----------------------------------------------------------------------------
# vertex-IRF gauge matrix


def s_gauge(lam, t, params: ModelParams):
    """2x2 gauge matrix S(lam|t) intertwining the two R-matrices."""
    y = params.y
    om2 = 2 * params.omega
    tol = params.elliptic.tail_tol
    em, ep = np.exp(-0.5j * y * lam), np.exp(0.5j * y * lam)
    pre = np.exp(0.5j * y * t)
    return pre * np.array(
        [
            [em * jtheta(2, -lam + t, om2, tol), ep * jtheta(2, lam + t, om2, tol)],
            [em * jtheta(3, -lam + t, om2, tol), ep * jtheta(3, lam + t, om2, tol)],
        ],
        dtype=complex,
    )


def s_gauge_det_closed(lam, t, params: ModelParams) -> complex:
    """Closed form of det S(lam|t): exp(i y t) theta(lam) theta(t)."""
    ep = params.elliptic
    return complex(np.exp(1j * params.y * t) * theta(lam, ep) * theta(t, ep))


# ----------------------------------------------------------------------------
# local identity checks (each returns a relative residual)


def _two(mat, i, j, n=3):
    return ops.local_operator(mat, [i, j], n)


def ybe_residual(l1, l2, l3, params: ModelParams) -> float:
    r12 = _two(r8v(l1 - l2, params), 0, 1)
    r13 = _two(r8v(l1 - l3, params), 0, 2)
    r23 = _two(r8v(l2 - l3, params), 1, 2)
    return ops.rel_residual(r12 @ r13 @ r23, r23 @ r13 @ r12)


def unitarity_residual(lam, params: ModelParams) -> float:
    r21 = ops.PERM @ r8v(-lam, params) @ ops.PERM
    ep = params.elliptic
    rhs = theta(-lam + params.eta, ep) * theta(lam + params.eta, ep) * np.eye(4)
    return ops.rel_residual(r21 @ r8v(lam, params), rhs)


def crossing_residual(lam, params: ModelParams) -> float:
    sy1 = np.kron(ops.SY, ops.I2)
    lhs = r8v(lam, params) @ sy1 @ ops.partial_transpose_first(r8v(lam - params.eta, params)) @ sy1
    ep = params.elliptic
    rhs = theta(lam + params.eta, ep) * theta(lam - params.eta, ep) * np.eye(4)
    return ops.rel_residual(lhs, rhs)


def periodicity_residuals(lam, params: ModelParams) -> tuple:
    """Residuals of the shifts lam -> lam + pi and lam -> lam + pi omega."""
    z1 = np.kron(ops.SZ, ops.I2)
    x1 = np.kron(ops.SX, ops.I2)
    r = r8v(lam, params)
    res1 = ops.rel_residual(r8v(lam + math.pi, params), -z1 @ r @ z1)
    om = params.omega
    fac = -np.exp(-1j * (2 * lam + math.pi * om + params.eta))
    res2 = ops.rel_residual(r8v(lam + math.pi * om, params), fac * x1 @ r @ x1)
    return res1, res2


def dybe_residual(l1, l2, l3, t, params: ModelParams) -> float:
    eta = params.eta

    def R(lam, tt):
        return r6vd(lam, tt, params)

    lhs = (
        ops.branch_operator(lambda s: R(l1 - l2, t + eta * s[0]), [2], [0, 1], 3)
        @ _two(R(l1 - l3, t), 0, 2)
        @ ops.branch_operator(lambda s: R(l2 - l3, t + eta * s[0]), [0], [1, 2], 3)
    )
    rhs = (
        _two(R(l2 - l3, t), 1, 2)
        @ ops.branch_operator(lambda s: R(l1 - l3, t + eta * s[0]), [1], [0, 2], 3)
        @ _two(R(l1 - l2, t), 0, 1)
    )
    return ops.rel_residual(lhs, rhs)


def vertex_irf_residual(l1, l2, t, params: ModelParams) -> float:
    eta = params.eta
    s1 = ops.local_operator(s_gauge(l1, t, params), [0], 2)
    s2_shift = ops.branch_operator(lambda s: s_gauge(l2, t + eta * s[0], params), [0], [1], 2)
    s2 = ops.local_operator(s_gauge(l2, t, params), [1], 2)
    s1_shift = ops.branch_operator(lambda s: s_gauge(l1, t + eta * s[0], params), [1], [0], 2)
    lhs = r8v(l1 - l2, params) @ s1 @ s2_shift
    rhs = s2 @ s1_shift @ r6vd(l1 - l2, t, params)
    return ops.rel_residual(lhs, rhs)


def s_reflection_residual(lam, t, params: ModelParams) -> float:
    """S(lam | -t + x pi + y pi omega) against (-1)^x i^{xy} (sz)^x (sx)^y S(lam|t) sx."""
    x, y = params.twist
    shifted = s_gauge(lam, -t + x * math.pi + y * math.pi * params.omega, params)
    k = np.linalg.matrix_power(ops.SZ, x) @ np.linalg.matrix_power(ops.SX, y)
    rhs = (-1) ** x * 1j ** (x * y) * k @ s_gauge(lam, t, params) @ ops.SX
    return ops.rel_residual(shifted, rhs)
