"""Select the compiled kernels when available, otherwise the numpy fallback."""

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_active = _ckernels if _ckernels is not None else _pykernels


def name():
    return "cython" if _active is _ckernels else "python"


def available():
    out = ["python"]
    if _ckernels is not None:
        out.append("cython")
    return out


def use(backend):
    """Switch the process-wide kernel implementation ("cython" or "python")."""
    global _active
    if backend == "cython":
        if _ckernels is None:
            raise RuntimeError("compiled kernels are not built")
        _active = _ckernels
    elif backend == "python":
        _active = _pykernels
    else:
        raise ValueError(f"unknown backend {backend!r}")


def gauss_series(a, b, c, sign, deriv, tol):
    return _active.gauss_series(a, b, c, sign, deriv, tol)


def apply_site(op, mat, site, nsites):
    return _active.apply_site(op, mat, site, nsites)
