"""Jacobi theta functions and the derived elliptic functions used by the model.

All functions accept scalars or numpy arrays for the spectral argument.  The
series are summed over a window centred on the dominant term, wide enough that
the neglected tail is below ``tail_tol`` relative to that term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend


@dataclass(frozen=True)
class EllipticParams:
    """Modular parameter ``omega`` (Im > 0) and series truncation tolerance."""

    omega: complex
    tail_tol: float = 1e-18

    def __post_init__(self):
        om = complex(self.omega)
        if not (math.isfinite(om.real) and math.isfinite(om.imag)) or om.imag <= 0:
            raise ValueError(f"modular parameter needs Im(omega) > 0, got {om}")
        if not 0 < self.tail_tol < 1:
            raise ValueError("tail_tol must lie in (0, 1)")
        object.__setattr__(self, "omega", om)

    @property
    def nome(self) -> complex:
        return complex(np.exp(1j * math.pi * self.omega))

    @property
    def series_cutoff(self) -> int:
        """Smallest M with |q|^(M^2) < tail_tol (symmetric window at real argument)."""
        logq = -math.pi * self.omega.imag
        return int(math.ceil(math.sqrt(math.log(self.tail_tol) / logq)))


def _as_complex(lam):
    arr = np.asarray(lam, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError("theta argument must be finite")
    return arr


def _out(arr, res):
    return complex(res) if np.ndim(arr) == 0 else res


# (offset c, sign, prefactor) of each theta series in terms of the generic kernel
_CHAR = {1: (0.5, -1, -1j), 2: (0.5, 1, 1.0), 3: (0.0, 1, 1.0), 4: (0.0, -1, 1.0)}


def jtheta(j: int, z, tau: complex, tol: float = 1e-18, deriv: int = 0):
    """theta_j(z | tau) with nome exp(i pi tau); ``deriv=1`` gives d/dz."""
    if j not in _CHAR:
        raise ValueError(f"theta index must be 1..4, got {j}")
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError("theta needs Im(tau) > 0")
    z = _as_complex(z)
    c, sign, pref = _CHAR[j]
    res = pref * _backend.gauss_series(tau, z, c, sign, deriv, tol)
    return _out(z, res)


def theta_j(j: int, lam, k: float, params: EllipticParams):
    """theta_j(lam | k omega)."""
    return jtheta(j, lam, k * params.omega, params.tail_tol)


def theta_j_prime(j: int, lam, k: float, params: EllipticParams):
    """Derivative of theta_j(lam | k omega) in lam, by the differentiated series."""
    return jtheta(j, lam, k * params.omega, params.tail_tol, deriv=1)


def theta(lam, params: EllipticParams):
    """The default theta function theta_1(lam | omega)."""
    return jtheta(1, lam, params.omega, params.tail_tol)


def theta_prime(lam, params: EllipticParams):
    return jtheta(1, lam, params.omega, params.tail_tol, deriv=1)


def vartheta(j: int, lam, N: int, params: EllipticParams, deriv: int = 0):
    """Level-N theta function used in the SOV determinant.

    sum_n exp(i pi N omega (n+1/2-j/N)^2 + 2i N (n+1/2-j/N)(lam - pi/2)).
    """
    if not 0 <= j < N:
        raise ValueError(f"vartheta index must lie in [0, {N - 1}], got {j}")
    lam = _as_complex(lam)
    b = N * (lam - math.pi / 2)
    res = _backend.gauss_series(N * params.omega, b, 0.5 - j / N, 1, deriv, params.tail_tol)
    if deriv:
        res = N * res
    return _out(lam, res)


def _check_twist(twist):
    x, y = twist
    if (x, y) == (0, 0):
        raise ValueError("theta_X is only defined for a non-trivial twist")
    if x not in (0, 1) or y not in (0, 1):
        raise ValueError(f"twist entries must be 0 or 1, got {twist}")
    return x, y


def theta_X(lam, twist, params: EllipticParams):
    """Twist-adapted theta function whose zeros carry the Bethe roots."""
    x, y = _check_twist(twist)
    om, tol = params.omega, params.tail_tol
    lam = _as_complex(lam)
    if (x, y) == (0, 1):
        res = jtheta(1, lam / 2, om / 2, tol)
    elif (x, y) == (1, 0):
        res = jtheta(1, lam, 2 * om, tol)
    else:
        res = (np.exp(0.5j * lam) * jtheta(1, lam / 2, om, tol)
               * jtheta(1, (lam + math.pi + math.pi * om) / 2, om, tol))
    return _out(lam, np.asarray(res))


def theta_X_prime(lam, twist, params: EllipticParams):
    x, y = _check_twist(twist)
    om, tol = params.omega, params.tail_tol
    lam = _as_complex(lam)
    if (x, y) == (0, 1):
        res = 0.5 * jtheta(1, lam / 2, om / 2, tol, deriv=1)
    elif (x, y) == (1, 0):
        res = jtheta(1, lam, 2 * om, tol, deriv=1)
    else:
        u = lam / 2
        v = (lam + math.pi + math.pi * om) / 2
        f, fp = jtheta(1, u, om, tol), jtheta(1, u, om, tol, deriv=1)
        g, gp = jtheta(1, v, om, tol), jtheta(1, v, om, tol, deriv=1)
        e = np.exp(0.5j * lam)
        res = e * (0.5j * f * g + 0.5 * fp * g + 0.5 * f * gp)
    return _out(lam, np.asarray(res))


def theta_X_real_period(twist) -> float:
    """Real quasi-period of theta_X (shifting a root by it only flips the sign of Q)."""
    x, y = _check_twist(twist)
    return math.pi if (x, y) == (1, 0) else 2 * math.pi
