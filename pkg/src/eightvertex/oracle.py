"""Brute-force ground truth: dense diagonalisation of the transfer matrix and
eigenvalue functions extended off the reference point by projection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import ops
from .claims import Claim
from .lattice import transfer_8v
from .model import GenericityError, ModelParams

DEFAULT_LAMBDA0 = 0.2313 + 0.1j


@dataclass
class OracleEigenvalue:
    """One eigenvalue function with its eigenspace at the reference point."""

    params: ModelParams
    value0: complex
    right: np.ndarray
    left: np.ndarray
    gamma_z: tuple = ()

    @property
    def multiplicity(self) -> int:
        return self.right.shape[1]

    def projector(self):
        return self.right @ self.left

    def __call__(self, lam) -> complex:
        T = transfer_8v(lam, self.params)
        return complex(np.trace(self.left @ T @ self.right) / self.multiplicity)

    def nodes(self, shift: int = 0):
        """Values at xi_a - shift*eta."""
        eta = self.params.eta
        return np.array([self(v - shift * eta) for v in self.params.xi])


@dataclass
class OracleSpectrum:
    params: ModelParams
    lam0: complex
    eigenvalues: list
    biorthogonality: float
    residual: float
    details: dict = field(default_factory=dict)

    @property
    def multiplicities(self):
        return [e.multiplicity for e in self.eigenvalues]

    def match(self, node_values, tol: float = 1e-8):
        """Index of the eigenvalue whose node values agree with ``node_values``."""
        node_values = np.asarray(node_values)
        best, best_err = None, np.inf
        for k, e in enumerate(self.eigenvalues):
            ref = e.nodes()
            err = ops.rel_residual(ref, node_values)
            if err < best_err:
                best, best_err = k, err
        return (best, best_err) if best_err < tol else (None, best_err)


def _cluster(values, rel_tol):
    scale = max(np.max(np.abs(values)), 1e-300)
    order = np.argsort(values.real)
    clusters = []
    used = np.zeros(len(values), dtype=bool)
    for i in order:
        if used[i]:
            continue
        members = [j for j in range(len(values)) if not used[j] and abs(values[j] - values[i]) < rel_tol * scale]
        for j in members:
            used[j] = True
        clusters.append(members)
    return clusters


def _min_gap(values):
    scale = max(np.max(np.abs(values)), 1e-300)
    gaps = [abs(values[i] - values[j]) for i in range(len(values)) for j in range(i)]
    return min(gaps) / scale if gaps else 1.0


def _decompose(params: ModelParams, lam0, degenerate: bool):
    T = transfer_8v(lam0, params)
    w, V = sla.eig(T)
    if not degenerate:
        if _min_gap(w) < 1e-8:
            raise GenericityError("eigenvalue gap below 1e-8 at the reference point")
        clusters = [[k] for k in range(len(w))]
    else:
        clusters = _cluster(w, 1e-7)
    Gz = ops.gamma(ops.SZ, params.N)
    cols, groups, labels = [], [], []
    for members in clusters:
        W = V[:, members]
        if degenerate and len(members) > 1:
            # restore an exact invariant subspace and split it by Gamma_z
            Q, _ = np.linalg.qr(W)
            g = np.linalg.lstsq(Q, Gz @ Q, rcond=None)[0]
            gw, gv = np.linalg.eig(g)
            W = Q @ gv
            lab = tuple(int(np.sign(v.real)) for v in gw)
            order = np.argsort([-l for l in lab], kind="stable")
            W = W[:, order]
            lab = tuple(lab[i] for i in order)
        else:
            lab = ()
        start = len(cols)
        groups.append(list(range(start, start + W.shape[1])))
        cols.extend(W.T)
        labels.append(lab)
    R = np.array(cols).T
    R = R / np.linalg.norm(R, axis=0)
    L = np.linalg.inv(R)
    bio = ops.maxabs(L @ R - np.eye(len(w)))
    return T, w, clusters, groups, labels, R, L, bio


def dense_spectrum(params: ModelParams, lam0=DEFAULT_LAMBDA0, max_redraw: int = 5, seed: int = 0) -> OracleSpectrum:
    """Full eigen-decomposition of T(lam0) and the eigenvalue functions.

    For the periodic chain with odd N eigenvalues come in pairs; each pair is
    resolved by Gamma_z, which commutes with the transfer matrix.
    """
    if params.N > 8:
        raise ValueError("dense oracle limited to N <= 8")
    degenerate = params.twist == (0, 0)
    rng = np.random.default_rng(seed)
    lam = complex(lam0)
    last = None
    for _ in range(max_redraw):
        try:
            T, w, clusters, groups, labels, R, L, bio = _decompose(params, lam, degenerate)
        except GenericityError as exc:
            last = exc
            lam = complex(lam0) + 0.1 * (rng.normal() + 1j * rng.normal())
            continue
        if bio > 1e-8:
            last = GenericityError(f"left/right biorthogonality off by {bio:.3g}")
            lam = complex(lam0) + 0.1 * (rng.normal() + 1j * rng.normal())
            continue
        break
    else:
        raise GenericityError(f"oracle failed at every reference point: {last}")
    evs = []
    for members, idx, lab in zip(clusters, groups, labels):
        value = complex(np.mean(w[members]))
        evs.append(OracleEigenvalue(params, value, R[:, idx], L[idx, :], lab))
    evs.sort(key=lambda e: (round(e.value0.real, 9), round(e.value0.imag, 9)))
    resid = max(ops.maxabs(T @ e.right - e.value0 * e.right) for e in evs) / max(ops.maxabs(T), 1e-300)
    return OracleSpectrum(params, lam, evs, bio, resid)


def eigenvalue_distinctness(spec: OracleSpectrum, samples) -> float:
    """Smallest, over pairs, of the largest sampled difference, relative to scale."""
    vals = np.array([[e(l) for l in samples] for e in spec.eigenvalues])
    scale = np.max(np.abs(vals))
    worst = np.inf
    for i in range(len(vals)):
        for j in range(i):
            worst = min(worst, np.max(np.abs(vals[i] - vals[j])) / scale)
    return float(worst)


def span_overlap(A, B) -> float:
    """Cosine of the largest principal angle between the column spans of A and B."""
    if A.shape[1] != B.shape[1]:
        return 0.0
    Qa, _ = np.linalg.qr(A)
    Qb, _ = np.linalg.qr(B)
    return float(np.linalg.svd(Qa.conj().T @ Qb, compute_uv=False).min())


def vector_overlap(u, v) -> float:
    return float(abs(np.vdot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v)))


# ----------------------------------------------------------------------------
# uniform claim runner


def _registry():
    from . import dynamical, lattice, model, spectrum, sov

    def discrete_system(params):
        spec = dense_spectrum(params)
        return max(spectrum.discrete_system_residual(spectrum.EigenvalueFn.from_oracle(e), params)
                   for e in spec.eigenvalues)

    def conjugation(params):
        return dynamical.conjugation_residual(0.31 + 0.17j, params)[0]

    def kernel_dims(params):
        ka = dynamical.kernel_analysis_periodic_odd(params)
        want = 1 << (params.N - 1)
        dims = (ka.ker_S0.shape[1], ka.ker_S_hat.shape[1], ka.intersection_dim)
        return 0.0 if dims == (want, want, 0) else 1.0, {"dims": list(dims)}

    def gram(params):
        b = sov.build_sov_basis(params, tol=np.inf)
        return max(sov.gram_residuals(b).values())

    def ybe(params):
        return model.ybe_residual(0.3 + 0.1j, -0.2 + 0.05j, 0.7 - 0.1j, params)

    def rtt(params):
        return lattice.rtt_residual(0.3 + 0.1j, -0.4 + 0.2j, params)

    return {
        "discrete-system": (discrete_system, 1e-8),
        "conjugation": (conjugation, 1e-8),
        "kernel-dims": (kernel_dims, 0.5),
        "gram": (gram, 1e-10),
        "YB": (ybe, 1e-10),
        "RTT": (rtt, 1e-10),
    }


def crosscheck(claim_id: str, params: ModelParams) -> Claim:
    """Run one registered check; failures are returned as data, never raised."""
    reg = _registry()
    if claim_id not in reg:
        raise KeyError(f"unknown claim {claim_id!r}; known: {sorted(reg)}")
    func, tol = reg[claim_id]
    details = {}
    try:
        out = func(params)
        if isinstance(out, tuple):
            out, details = out
        residual = float(out)
    except Exception as exc:  # noqa: BLE001 - failures are reported
        residual = float("inf")
        details = {"error": f"{type(exc).__name__}: {exc}"}
    return Claim(claim_id, residual, tol, details=details)


def registered_claims():
    return sorted(_registry())
