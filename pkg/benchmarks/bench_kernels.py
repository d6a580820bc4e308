"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Reports the best-of-repeat wall time for each kernel and backend, plus one
end-to-end workload (the N = 3 transfer matrix at 50 points), and checks the two
backends agree.
"""

import argparse
import time

import numpy as np

from eightvertex import _backend, canonical_fixture
from eightvertex.lattice import transfer_8v


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def workloads():
    rng = np.random.default_rng(0)
    zs = rng.normal(size=2000) + 0.3j * rng.normal(size=2000)
    op = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    mat = rng.normal(size=(256, 256)) + 1j * rng.normal(size=(256, 256))
    params = canonical_fixture(3, (1, 1))
    lams = 0.3 * rng.normal(size=50) + 0.1j

    def scalar_series():
        return np.array([_backend.gauss_series(1j, z, 0.5, -1, 0, 1e-18) for z in zs[:500]])

    return {
        "theta series, 500 scalar calls": scalar_series,
        "theta series, 2000-point array": lambda: _backend.gauss_series(1j, zs, 0.5, -1, 0, 1e-18),
        "site operator on 256x256, 8 sites": lambda: np.array(
            [_backend.apply_site(op, mat, n, 8) for n in range(8)]),
        "transfer matrix N=3, 50 points": lambda: np.array([transfer_8v(l, params) for l in lams]),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = _backend.available()
    if "cython" not in backends:
        print("compiled kernels not built; timing the numpy fallback only")
    results = {}
    for b in backends:
        _backend.use(b)
        for name, fn in workloads().items():
            results[(name, b)] = best_of(fn, args.repeat)
    print(f"{'kernel':36s} " + " ".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name in workloads():
        row = [results[(name, b)][0] for b in backends]
        line = f"{name:36s} " + " ".join(f"{t * 1e3:10.2f}ms" for t in row)
        if len(backends) > 1:
            ref, new = results[(name, "python")][1], results[(name, "cython")][1]
            err = np.max(np.abs(ref - new)) / max(np.max(np.abs(ref)), 1e-300)
            line += f" {row[0] / row[1]:10.1f}x  (max rel diff {err:.1e})"
        print(line)
    _backend.use(backends[-1])


if __name__ == "__main__":
    main()
