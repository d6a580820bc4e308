import math
import time

import numpy as np
import pytest

from eightvertex.model import EllipticParams, GenericityError, ModelParams, lattice_distance

TWISTS = [(0, 0), (1, 0), (0, 1), (1, 1)]
TWISTED = [(1, 0), (0, 1), (1, 1)]

_SESSION = {"start": time.perf_counter(), "lines": []}


def random_params(rng, N, twist=None, margin=0.05):
    """Generic parameters with random eta, omega, inhomogeneities and twist."""
    for _ in range(1000):
        tw = twist if twist is not None else TWISTS[rng.integers(4)]
        omega = rng.uniform(-0.3, 0.3) + 1j * rng.uniform(0.8, 1.4)
        eta = rng.uniform(0.2, 0.8) + 1j * rng.uniform(0.05, 0.3)
        xi = rng.uniform(0.1, math.pi - 0.1, N) + 1j * rng.uniform(-0.1, 0.1, N)
        p = ModelParams(eta, tuple(xi), tw, EllipticParams(omega))
        try:
            p.check_generic(margin)
        except GenericityError:
            continue
        return p
    raise RuntimeError("no generic draw")


def random_point(rng, scale=1.0):
    return complex(scale * (rng.uniform(-1.5, 1.5) + 1j * rng.uniform(-0.4, 0.4)))


def generic_t(rng, params, margin=0.1):
    """Dynamical parameter away from the zeros of theta."""
    while True:
        t = random_point(rng)
        if lattice_distance(t, params.omega) > margin:
            return t


def record(criterion, passed, message):
    line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {message}"
    _SESSION["lines"].append(line)
    print(line)


def session_elapsed():
    return time.perf_counter() - _SESSION["start"]


def pytest_sessionstart(session):
    _SESSION["start"] = time.perf_counter()


def pytest_collection_modifyitems(items):
    # the wall-clock criterion measures everything before it, so it runs last
    last = [it for it in items if it.get_closest_marker("wallclock")]
    rest = [it for it in items if not it.get_closest_marker("wallclock")]
    items[:] = rest + last


def pytest_configure(config):
    config.addinivalue_line("markers", "wallclock: full-suite timing check, ordered last")


def pytest_terminal_summary(terminalreporter):
    if _SESSION["lines"]:
        terminalreporter.section("acceptance criteria")
        for line in _SESSION["lines"]:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
