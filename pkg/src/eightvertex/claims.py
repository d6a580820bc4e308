"""Uniform record for a numerically checked statement."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class Claim:
    """A checked identity: ``residual`` must stay below ``tol``.

    ``default_tol`` is the tolerance the check was designed for; a failure under
    a user-tightened tolerance that still passes the default is reported as
    tolerance-limited rather than incorrect.
    """

    name: str
    residual: float
    tol: float
    statement: str = ""
    default_tol: float | None = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return math.isfinite(self.residual) and self.residual < self.tol

    @property
    def status(self) -> str:
        if self.passed:
            return "pass"
        ref = self.default_tol if self.default_tol is not None else self.tol
        if math.isfinite(self.residual) and self.residual < ref:
            return "tolerance-limited"
        return "fail"

    def retol(self, tol: float) -> "Claim":
        return Claim(self.name, self.residual, tol, self.statement,
                     self.default_tol if self.default_tol is not None else self.tol, self.details)
