"""Wealth, premium and loading of one insurance purchase decision."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import InvalidParameter
from .loss_model import LossModel


@dataclass(frozen=True)
class ProblemSpec:
    """Initial wealth W0, premium pi and safety loading rho for a loss with
    mean ``expected_loss`` and support bound ``max_loss``.

    ``delta`` is the expected retention the premium buys: E[X] - pi/(1+rho).
    """

    W0: float
    pi: float
    rho: float
    expected_loss: float
    max_loss: float

    def __post_init__(self):
        for name in ("W0", "pi", "rho", "expected_loss", "max_loss"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameter(f"{name} must be finite")
        if self.rho < 0:
            raise InvalidParameter(f"safety loading must be non-negative, got {self.rho}")
        if self.pi < 0:
            raise InvalidParameter(f"premium must be non-negative, got {self.pi}")

    @classmethod
    def for_loss(cls, W0: float, pi: float, rho: float, loss: LossModel) -> "ProblemSpec":
        return cls(float(W0), float(pi), float(rho), float(loss.mean), float(loss.M))

    def with_premium(self, pi: float) -> "ProblemSpec":
        return replace(self, pi=float(pi))

    @property
    def delta(self) -> float:
        return self.expected_loss - self.pi / (1.0 + self.rho)

    @property
    def W(self) -> float:
        """Wealth left after paying the fair-plus-loading price of full cover."""
        return self.W0 - (1.0 + self.rho) * self.expected_loss

    @property
    def W_delta(self) -> float:
        return self.W0 - self.pi

    @property
    def full_cover_premium(self) -> float:
        return (1.0 + self.rho) * self.expected_loss

    @property
    def solvency_margin(self) -> float:
        """W0 - (1+rho)E[X] - M; non-negative when no premium can bankrupt the buyer."""
        return self.W - self.max_loss

    @property
    def worst_wealth(self) -> float:
        """Final wealth after paying the premium and retaining the maximal loss."""
        return self.W_delta - self.max_loss

    def wealth_for(self, delta: float) -> float:
        """W_Delta for a retention budget ``delta``: W + (1+rho) delta."""
        return self.W + (1.0 + self.rho) * delta

    def premium_for(self, delta: float) -> float:
        return (1.0 + self.rho) * (self.expected_loss - delta)
