import numpy as np
import pytest
from conftest import TWISTED

from eightvertex import ops
from eightvertex.lattice import transfer_8v
from eightvertex.model import canonical_fixture, weights_8v
from eightvertex.oracle import (
    crosscheck,
    dense_spectrum,
    eigenvalue_distinctness,
    registered_claims,
    span_overlap,
    vector_overlap,
)

SAMPLES = [0.1 + 0.05j, 0.9 - 0.2j, -0.6 + 0.3j, 1.7 + 0.1j]


def test_single_site_eigenvalues():
    p = canonical_fixture(1, (1, 0))
    spec = dense_spectrum(p)
    for lam in SAMPLES:
        w = weights_8v(lam - p.xi[0], p)
        got = np.sort_complex(np.array([e(lam) for e in spec.eigenvalues]))
        want = np.sort_complex(np.array([w.a - w.b, w.b - w.a]))
        assert np.max(np.abs(got - want)) < 1e-13 * abs(w.a - w.b)


@pytest.mark.parametrize("twist", TWISTED)
def test_twisted_spectrum_is_simple(twist):
    spec = dense_spectrum(canonical_fixture(3, twist))
    assert len(spec.eigenvalues) == 8 and spec.multiplicities == [1] * 8
    assert spec.biorthogonality < 1e-8 and spec.residual < 1e-9
    assert eigenvalue_distinctness(spec, SAMPLES) > 1e-6


def test_periodic_odd_spectrum_pairs():
    spec = dense_spectrum(canonical_fixture(3, (0, 0)))
    assert spec.multiplicities == [2] * 4
    assert spec.biorthogonality < 1e-8 and spec.residual < 1e-9
    for e in spec.eigenvalues:
        # each pair is split into the two Gamma_z eigenvalues
        assert sorted(e.gamma_z) == [-1, 1]


@pytest.mark.parametrize("twist", TWISTED)
def test_eigenvalue_functions_off_reference(twist):
    p = canonical_fixture(2, twist)
    spec = dense_spectrum(p)
    for lam in SAMPLES:
        T = transfer_8v(lam, p)
        for e in spec.eigenvalues:
            v = e.right[:, 0]
            assert ops.rel_residual(T @ v, e(lam) * v) < 1e-10


def test_rayleigh_quotient_stable_under_reference_change():
    p = canonical_fixture(3, (1, 1))
    a = dense_spectrum(p)
    b = dense_spectrum(p, lam0=0.71 - 0.05j)
    for e in a.eigenvalues:
        k, err = b.match(e.nodes())
        assert k is not None and err < 1e-9
        assert abs(b.eigenvalues[k](1.3 + 0.2j) - e(1.3 + 0.2j)) < 1e-10 * abs(e(1.3 + 0.2j))


def test_match_rejects_foreign_values():
    spec = dense_spectrum(canonical_fixture(2, (0, 1)))
    k, err = spec.match(np.array([1.0, 2.0]))
    assert k is None and err > 1e-3


def test_projectors_resolve_identity():
    spec = dense_spectrum(canonical_fixture(3, (0, 0)))
    total = sum(e.projector() for e in spec.eigenvalues)
    assert ops.rel_residual(total, np.eye(8)) < 1e-10


def test_overlap_helpers():
    A = np.eye(4)[:, :2]
    B = A @ np.array([[1, 2], [3, -1]])
    assert span_overlap(A, B) == pytest.approx(1.0, abs=1e-14)
    assert span_overlap(A, np.eye(4)[:, 2:]) < 1e-14
    assert span_overlap(A, np.eye(4)[:, :3]) == 0.0
    assert vector_overlap(np.array([1, 1j]), np.array([2j, -2])) == pytest.approx(1.0)


def test_size_limit():
    with pytest.raises(ValueError):
        dense_spectrum(canonical_fixture(9, (1, 0)))


def test_crosscheck_claims():
    assert set(registered_claims()) == {"discrete-system", "conjugation", "kernel-dims", "gram", "YB", "RTT"}
    assert crosscheck("discrete-system", canonical_fixture(2, (0, 1))).passed
    assert crosscheck("conjugation", canonical_fixture(2, (1, 1))).passed
    c = crosscheck("kernel-dims", canonical_fixture(3, (0, 0)))
    assert c.passed and c.details["dims"] == [4, 4, 0]
    for cid in ("gram", "YB", "RTT"):
        assert crosscheck(cid, canonical_fixture(2, (1, 0))).passed


def test_crosscheck_unknown_claim():
    with pytest.raises(KeyError):
        crosscheck("no-such-claim", canonical_fixture(1))


def test_crosscheck_failure_is_data():
    # the kernel analysis needs a periodic odd chain; a twisted chain is reported, not raised
    c = crosscheck("kernel-dims", canonical_fixture(3, (1, 0)))
    assert not c.passed and c.status == "fail"
    assert "ValueError" in c.details["error"]
