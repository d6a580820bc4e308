"""Quasi-periodic 8-vertex transfer matrices: elliptic R-matrices, the vertex-IRF
map to the dynamical 6-vertex model, the separated basis and its spectrum, and
functional T-Q equations."""

from . import _backend
from .claims import Claim
from .model import GenericityError, ModelParams, canonical_fixture
from .theta import EllipticParams, jtheta, theta, theta_X

__version__ = "0.1.0"

backend = _backend.name

__all__ = [
    "Claim",
    "EllipticParams",
    "GenericityError",
    "ModelParams",
    "backend",
    "canonical_fixture",
    "jtheta",
    "theta",
    "theta_X",
    "__version__",
]
