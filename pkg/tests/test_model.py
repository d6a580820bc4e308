import math

import numpy as np
import pytest
from conftest import TWISTS, generic_t, random_params
from hypothesis import given, settings
from hypothesis import strategies as st

from eightvertex import ops
from eightvertex.model import (
    FIXTURE_ETA,
    GenericityError,
    ModelParams,
    canonical_fixture,
    crossing_residual,
    dybe_residual,
    periodicity_residuals,
    r6vd,
    r8v,
    s_gauge,
    s_gauge_det_closed,
    s_reflection_residual,
    unitarity_residual,
    vertex_irf_residual,
    weights_6vd,
    weights_8v,
    ybe_residual,
)
from eightvertex.theta import jtheta, theta

lams = st.builds(complex, st.floats(-1.5, 1.5), st.floats(-0.4, 0.4))
seeds = st.integers(0, 2**32 - 1)


def test_weights_at_zero():
    p = canonical_fixture(1)
    w = weights_8v(0.0, p)
    assert abs(w.b) < 1e-16 and abs(w.d) < 1e-16
    assert abs(w.a - w.c) < 1e-15 * abs(w.a)
    assert np.max(np.abs(r8v(0.0, p) - w.a * ops.PERM)) < 1e-15 * abs(w.a)


def test_dynamical_weights_at_zero():
    p = canonical_fixture(1, (0, 1))
    w = weights_6vd(0.0, 0.37 + 0.2j, p)
    th = theta(p.eta, p.elliptic)
    assert abs(w.b_plus) < 1e-16 and abs(w.b_minus) < 1e-16
    assert abs(w.c_plus - th) < 1e-15 and abs(w.c_minus - th) < 1e-15
    assert np.max(np.abs(r6vd(0.0, 0.37 + 0.2j, p) - th * ops.PERM)) < 1e-15


@pytest.mark.parametrize("twist", TWISTS)
def test_r6vd_determinant(twist):
    p = canonical_fixture(1, twist)
    lam, t = 0.41 - 0.12j, 0.66 + 0.31j
    w = weights_6vd(lam, t, p)
    y, eta = p.y, p.eta
    expected = w.a ** 2 * (np.exp(1j * y * eta) * w.b_plus * np.exp(-1j * y * eta) * w.b_minus
                           - w.c_plus * w.c_minus)
    got = np.linalg.det(r6vd(lam, t, p))
    assert abs(got - expected) < 1e-13 * abs(expected)


def test_periodicity_pi_example():
    p = canonical_fixture(1)
    z1 = np.kron(ops.SZ, ops.I2)
    assert ops.rel_residual(r8v(0.3 + math.pi, p), -z1 @ r8v(0.3, p) @ z1) < 1e-14


def test_unitarity_example():
    assert unitarity_residual(0.5 + 0.2j, canonical_fixture(1)) < 1e-14


def test_r6vd_rejects_theta_zero():
    p = canonical_fixture(1)
    with pytest.raises(GenericityError):
        r6vd(0.3, math.pi, p)


def test_s_gauge_y0_transcription():
    p = canonical_fixture(1, (1, 0))
    lam, t = 0.3 - 0.2j, 0.9 + 0.1j
    om2 = 2 * p.omega
    expected = np.array([[jtheta(2, -lam + t, om2), jtheta(2, lam + t, om2)],
                         [jtheta(3, -lam + t, om2), jtheta(3, lam + t, om2)]])
    assert np.max(np.abs(s_gauge(lam, t, p) - expected)) < 1e-15 * np.max(np.abs(expected))


@pytest.mark.parametrize("twist", TWISTS)
def test_s_gauge_determinant(twist):
    p = canonical_fixture(1, twist)
    rng = np.random.default_rng(3)
    for _ in range(10):
        lam, t = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        det = np.linalg.det(s_gauge(lam, t, p))
        closed = s_gauge_det_closed(lam, t, p)
        assert abs(det - closed) < 1e-13 * max(abs(closed), 1e-300) + 1e-15


@settings(max_examples=200, deadline=None)
@given(l1=lams, l2=lams, l3=lams, seed=seeds)
def test_yang_baxter(l1, l2, l3, seed):
    p = random_params(np.random.default_rng(seed), 1)
    assert ybe_residual(l1, l2, l3, p) < 1e-10


@settings(max_examples=100, deadline=None)
@given(lam=lams, seed=seeds)
def test_crossing_unitarity_periodicity(lam, seed):
    p = random_params(np.random.default_rng(seed), 1)
    assert crossing_residual(lam, p) < 1e-10
    assert unitarity_residual(lam, p) < 1e-10
    assert max(periodicity_residuals(lam, p)) < 1e-10


@settings(max_examples=100, deadline=None)
@given(l1=lams, l2=lams, l3=lams, seed=seeds)
def test_dynamical_yang_baxter(l1, l2, l3, seed):
    rng = np.random.default_rng(seed)
    p = random_params(rng, 1)
    assert dybe_residual(l1, l2, l3, generic_t(rng, p), p) < 1e-10


@settings(max_examples=200, deadline=None)
@given(l1=lams, l2=lams, seed=seeds)
def test_vertex_irf(l1, l2, seed):
    rng = np.random.default_rng(seed)
    p = random_params(rng, 1)
    assert vertex_irf_residual(l1, l2, generic_t(rng, p), p) < 1e-10


@settings(max_examples=100, deadline=None)
@given(lam=lams, seed=seeds)
def test_gauge_reflection(lam, seed):
    rng = np.random.default_rng(seed)
    p = random_params(rng, 1)
    assert s_reflection_residual(lam, generic_t(rng, p), p) < 1e-10


def test_fixture_is_generic():
    for N in (1, 2, 3, 4):
        p = canonical_fixture(N, (1, 1), seed=N)
        assert p.eta == FIXTURE_ETA and p.omega == 1j
        assert min(p.genericity_margins().values()) >= 1e-3
        assert all(0.1 <= v.real <= math.pi - 0.1 and abs(v.imag) <= 0.05 for v in p.xi)


def test_genericity_rejections():
    p = canonical_fixture(2)
    with pytest.raises(GenericityError, match="cond-inh"):
        p.with_xi([0.5, 0.5]).check_generic()
    with pytest.raises(GenericityError, match="cond-inh0"):
        p.with_xi([-p.eta / 2 + math.pi, 1.0]).check_generic()
    with pytest.raises(GenericityError, match="cond-inh"):
        p.with_xi([0.5, 0.5 + p.eta]).check_generic()
    with pytest.raises(GenericityError, match="eta-generic"):
        ModelParams(math.pi / 3, (0.4, 1.3)).check_generic()


def test_param_validation():
    with pytest.raises(ValueError):
        ModelParams(0.3, (0.1,), (2, 0))
    with pytest.raises(ValueError):
        ModelParams(0.3, ())
    with pytest.raises(ValueError):
        ModelParams(float("inf"), (0.1,))
