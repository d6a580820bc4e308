import math

import numpy as np
import pytest
from conftest import TWISTED, random_params
from hypothesis import given, settings
from hypothesis import strategies as st

from eightvertex.bethe import (
    IncompletenessError,
    InhomTQData,
    NoAdmissibleBeta,
    QFunction,
    _bethe_jacobian,
    _lm,
    _pi_X,
    _sample_points,
    admissible_betas,
    bethe_equations,
    condition_b_shift,
    d_bar_beta_independence,
    eigenstate_from_Q,
    homogeneous_residual_curve,
    inhomogeneous_residual_curve,
    same_root_multiset,
    solve_bethe_homogeneous,
    solve_bethe_inhomogeneous,
    sov_vs_aba_overlap,
    tq_fit_homogeneous,
    tq_fit_inhomogeneous,
    tq_residual_homogeneous,
    tq_residual_inhomogeneous,
)
from eightvertex.lattice import scripted_d, transfer_8v
from eightvertex.model import GenericityError, ModelParams, canonical_fixture
from eightvertex.oracle import dense_spectrum, vector_overlap
from eightvertex.spectrum import EigenvalueFn, IncompletenessWarning, eigenstate_residual

LAM = 0.41 + 0.17j


@pytest.fixture(scope="module")
def hom_solutions():
    p = canonical_fixture(2, (1, 0))
    return p, solve_bethe_homogeneous(p)


@pytest.fixture(scope="module")
def inhom_solutions():
    p = canonical_fixture(2, (1, 0))
    data = InhomTQData(p)
    return data, solve_bethe_inhomogeneous(p, data)


@pytest.mark.parametrize("twist", TWISTED)
def test_d_bar_beta_independence(twist):
    for N in (1, 2, 3):
        assert d_bar_beta_independence(LAM, canonical_fixture(N, twist)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), twist=st.sampled_from(TWISTED), N=st.integers(1, 3))
def test_d_bar_beta_independence_property(seed, twist, N):
    rng = np.random.default_rng(seed)
    p = random_params(rng, N, twist)
    lam = complex(rng.uniform(-2, 2), rng.uniform(-0.5, 0.5))
    assert d_bar_beta_independence(lam, p) < 1e-10


def test_homogeneous_completeness(hom_solutions):
    p, sols = hom_solutions
    assert sorted(s.oracle_index for s in sols) == [0, 1, 2, 3]
    for s in sols:
        assert np.max(np.abs(bethe_equations(s.Q, p, s.h))) < 1e-12
        assert s.details["discrete"] < 1e-9 and s.details["quasi_periodicity"] < 1e-9
        assert np.max(homogeneous_residual_curve(s.ev, s.Q, p, [LAM, 1.3 - 0.2j], s.h)) < 1e-10


def test_homogeneous_states(hom_solutions):
    p, sols = hom_solutions
    T_of = lambda lam: transfer_8v(lam, p)  # noqa: E731
    for s in sols:
        right, left = eigenstate_from_Q(s.Q, p, h=s.h)
        assert eigenstate_residual(T_of, s.ev, right, left, [LAM, 0.9 - 0.1j]) < 1e-9
        assert sov_vs_aba_overlap(s) > 1 - 1e-9


def test_beta_choices_give_parallel_states(hom_solutions):
    p, sols = hom_solutions
    for s in sols:
        ok = admissible_betas(s.Q, p)
        assert (0, 0) in ok and (1, 0) in ok
        a, _ = eigenstate_from_Q(s.Q, p, beta=(0, 0), h=s.h)
        b, _ = eigenstate_from_Q(s.Q, p, beta=(1, 0), h=s.h)
        assert vector_overlap(a, b) > 1 - 1e-9


def test_no_admissible_beta():
    p = canonical_fixture(2, (1, 0))
    v = p.xi[0]
    # a root at xi_1 and one at xi_1 + pi_X kill both choices of beta_1
    Q = QFunction((v, v + _pi_X(p)), p)
    assert admissible_betas(Q, p) == []
    with pytest.raises(NoAdmissibleBeta):
        eigenstate_from_Q(Q, p)
    Q1 = QFunction((v, 0.3 + 0.4j), p)
    with pytest.raises(NoAdmissibleBeta):
        eigenstate_from_Q(Q1, p, beta=(0, 0))


def test_root_uniqueness_modulo_period(hom_solutions):
    p, sols = hom_solutions
    s = sols[0]
    Q, h, norm = tq_fit_homogeneous(s.ev, p, seed=17, h=s.h)
    assert Q is not None and norm < 1e-10
    # the fit can land on a root set shifted by opposite omega-periods: the same function up to a constant
    assert same_root_multiset(Q, s.Q, full_lattice=True)
    ratios = [Q(z) / s.Q(z) for z in (LAM, 1.2 - 0.3j, -0.7 + 0.2j)]
    assert max(abs(r - ratios[0]) for r in ratios) < 1e-9 * abs(ratios[0])
    single = s.Q.with_roots([s.Q.roots[0] + 2 * math.pi * p.omega] + list(s.Q.roots[1:]))
    assert not same_root_multiset(single, s.Q, full_lattice=True)
    P = s.Q.real_period
    moved = s.Q.with_roots([s.Q.roots[0] + P] + list(s.Q.roots[1:]))
    assert same_root_multiset(moved, s.Q)
    assert moved.canonical_roots() == pytest.approx(s.Q.canonical_roots(), abs=1e-9)
    assert np.max(homogeneous_residual_curve(s.ev, moved, p, [LAM], s.h)) < 1e-10
    assert not same_root_multiset(s.Q.with_roots([s.Q.roots[0] + 0.1] + list(s.Q.roots[1:])), s.Q)


def test_perturbed_roots_reconverge(hom_solutions):
    p, sols = hom_solutions
    s = sols[1]
    residual = lambda z: _bethe_jacobian(QFunction(tuple(z), p), p, s.h)  # noqa: E731
    hist = []
    z, norm, ok = _lm(residual, np.array(s.Q.roots) + 1e-6, history=hist)
    assert ok and same_root_multiset(QFunction(tuple(z), p), s.Q, tol=1e-10)
    # quadratic tail: each step squares the error up to a bounded constant
    tail = [e for e in hist if 1e-14 < e < 1e-4]
    assert len(tail) >= 2
    for a, b in zip(tail, tail[1:]):
        assert b <= 1e4 * a * a


def test_node_reduces_equation(hom_solutions):
    # d vanishes at every node, so only the a-term survives there
    p, sols = hom_solutions
    for v in p.xi:
        assert scripted_d(v, p) == 0 or abs(scripted_d(v, p)) < 1e-15
    for s in sols:
        for v in p.xi:
            r = tq_residual_homogeneous(s.ev, s.Q, v, p, s.h)
            assert abs(r) < 1e-10 * abs(s.ev(v) * s.Q(v))


def test_condition_b_is_satisfied(hom_solutions):
    p, sols = hom_solutions
    for s in sols:
        assert None not in condition_b_shift(s.Q, p)


def test_homogeneous_incomplete_even_raises():
    with pytest.raises(IncompletenessError):
        solve_bethe_homogeneous(canonical_fixture(2, (0, 1)), n_starts=0, fit_starts=0)


def test_homogeneous_incomplete_odd_warns():
    with pytest.warns(IncompletenessWarning):
        sols = solve_bethe_homogeneous(canonical_fixture(1, (0, 1)), n_starts=0, fit_starts=0)
    assert sols == []


def test_homogeneous_errors():
    with pytest.raises(ValueError):
        solve_bethe_homogeneous(canonical_fixture(1, (0, 0)))
    with pytest.raises(ValueError):
        solve_bethe_homogeneous(canonical_fixture(1, (1, 0)), mode="psychic")
    with pytest.raises(ValueError):
        QFunction((0.1,), canonical_fixture(1, (0, 0)))
    with pytest.raises(ValueError):
        QFunction((0.1,), canonical_fixture(1, (1, 0)), kind="other")


def test_inhomogeneous_solutions(inhom_solutions):
    data, sols = inhom_solutions
    assert len(sols) == 4
    assert sorted(s.details["oracle_index"] for s in sols) == [0, 1, 2, 3]
    for s in sols:
        assert s.residual < 1e-10 and s.oracle_overlap > 1 - 1e-9


def test_root_shift_by_pi_flips_sign(inhom_solutions):
    data, sols = inhom_solutions
    s = sols[0]
    moved = s.Q.with_roots([s.Q.roots[0] + math.pi] + list(s.Q.roots[1:]))
    assert abs(moved(LAM) + s.Q(LAM)) < 1e-12 * abs(s.Q(LAM))
    assert abs(data.F(LAM, moved) + data.F(LAM, s.Q)) < 1e-12 * abs(data.F(LAM, s.Q))
    samples = _sample_points(data.params, 8, 2)
    assert inhomogeneous_residual_curve(s.ev, moved, data, samples).max() < 1e-10


def test_gauge_change_needs_new_roots(inhom_solutions):
    data, sols = inhom_solutions
    s = sols[0]
    other = InhomTQData(data.params, beta=2 * data.beta)
    samples = _sample_points(data.params, 10, 5)
    assert inhomogeneous_residual_curve(s.ev, s.Q, other, samples).max() > 1e-3
    Q, norm = tq_fit_inhomogeneous(s.ev, other)
    assert Q is not None
    assert inhomogeneous_residual_curve(s.ev, Q, other, samples).max() < 1e-8


def test_inhomogeneous_residual_params_guard(inhom_solutions):
    data, sols = inhom_solutions
    with pytest.raises(ValueError):
        tq_residual_inhomogeneous(sols[0].ev, sols[0].Q, data, LAM, canonical_fixture(2, (0, 1)))


def test_gauge_validation():
    p = canonical_fixture(2, (1, 0))
    with pytest.raises(GenericityError):
        InhomTQData(p, beta=1.5)
    with pytest.raises(GenericityError):
        InhomTQData(p, mu=p.xi[0])
    with pytest.raises(GenericityError):
        InhomTQData(p, mu=p.xi[1] + p.eta + math.pi)
    with pytest.raises(GenericityError):
        InhomTQData(ModelParams(0.37, (0.4, 1.3), (1, 0)))


@pytest.mark.parametrize("N", [1, 3])
def test_inhomogeneous_periodic(N):
    p = canonical_fixture(N, (0, 0))
    sols = solve_bethe_inhomogeneous(p)
    assert len(sols) == 1 << (N - 1)
    T_of = lambda lam: transfer_8v(lam, p)  # noqa: E731
    spec = dense_spectrum(p)
    for s in sols:
        assert len(s.states) == 2 and s.oracle_overlap > 1 - 1e-8
        assert spec.eigenvalues[s.details["oracle_index"]].multiplicity == 2
        for v in s.states:
            assert eigenstate_residual(T_of, s.ev, v, None, [LAM]) < 1e-8


def test_inhomogeneous_periodic_even_rejected():
    with pytest.raises(ValueError):
        solve_bethe_inhomogeneous(canonical_fixture(2, (0, 0)))


def test_q_function_basics():
    p = canonical_fixture(2, (1, 1))
    Q = QFunction((0.2 + 0.1j, 1.1 - 0.3j), p)
    assert Q.alpha == pytest.approx(1.3 - 0.2j)
    h = 1e-6
    grad = Q.root_gradient(LAM)
    for j in range(2):
        r = list(Q.roots)
        r[j] += h
        fd = (Q.with_roots(r)(LAM) - Q(LAM)) / h
        assert abs(fd - grad[j]) < 1e-5 * max(1.0, abs(grad[j]))
    plain = QFunction((0.2,), p, kind="plain")
    assert plain.real_period == math.pi
    assert isinstance(EigenvalueFn(p, [1.0, 2.0]), EigenvalueFn)
