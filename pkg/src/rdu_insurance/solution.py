"""Result record shared by the contract solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

from .landmarks import LandmarkCertificate
from .loss_model import Contract, LossModel, QuantileSolution, Shape
from .problem import ProblemSpec


@dataclass(frozen=True)
class Solution:
    contract: Contract
    problem: ProblemSpec
    method: str
    lambda_star: float
    landmarks: LandmarkCertificate
    thresholds: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    boundary: bool = False

    @property
    def regime(self) -> str:
        return self.contract.shape.value

    @property
    def shape(self) -> Shape:
        return self.contract.shape

    def quantile_solution(self, loss: LossModel) -> QuantileSolution:
        return QuantileSolution(self.contract, loss)


def boundary_band(problem: ProblemSpec) -> float:
    """Premium distance within which two regime formulas are treated as equal."""
    return 1e-9 * problem.full_cover_premium
