"""Loss distributions on [0, M] and piecewise-linear indemnity contracts.

Contracts are stored by quantile-level thresholds. With Q the loss quantile
function, every contract produced here has retention quantile

    G(z) = Q(clip(z, lower, upper)) - Q(lower),

which covers full insurance (lower = upper = 0), no insurance (0, 1),
deductibles (0, q) and threefold contracts (lower, upper).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .errors import InvalidParameter, OutOfDomain
from .numerics import DEFAULT_TOL, Tolerance, integrate_pieces

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class LossModel:
    """Loss X on [0, M] with strictly increasing cdf (possibly an atom at 0)."""

    name: str
    M: float
    atom0: float
    mean: float
    _cdf: ArrayFn = field(repr=False)
    _quantile: ArrayFn = field(repr=False)
    _quantile_derivative: ArrayFn = field(repr=False)
    _integrated_quantile: ArrayFn = field(repr=False)
    params: tuple = ()

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return self._cdf(np.clip(x, 0.0, self.M))

    def quantile(self, z):
        z = np.asarray(z, dtype=float)
        return self._quantile(np.clip(z, 0.0, 1.0))

    def quantile_derivative(self, z):
        z = np.asarray(z, dtype=float)
        return self._quantile_derivative(np.clip(z, 0.0, 1.0))

    def integrated_quantile(self, z):
        """Closed-form integral of the quantile function over [0, z]."""
        z = np.asarray(z, dtype=float)
        return self._integrated_quantile(np.clip(z, 0.0, 1.0))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Inverse-transform sample of size n."""
        return self.quantile(rng.random(n))


def make_truncated_exponential(m: float, M: float) -> LossModel:
    """Exponential(m) loss conditioned on [0, M]."""
    m, M = float(m), float(M)
    if not (m > 0 and math.isfinite(m)):
        raise InvalidParameter(f"rate m must be positive, got {m}")
    if not (M > 0 and math.isfinite(M)):
        raise InvalidParameter(f"support bound M must be positive, got {M}")
    c = -math.expm1(-m * M)

    def cdf(x):
        return -np.expm1(-m * x) / c

    def quantile(z):
        return -np.log1p(-z * c) / m

    def quantile_derivative(z):
        return c / (m * (1.0 - z * c))

    def integrated_quantile(z):
        s = 1.0 - c * z
        with np.errstate(divide="ignore", invalid="ignore"):
            slogs = np.where(s > 0, s * np.log(np.where(s > 0, s, 1.0)), 0.0)
        return (slogs + c * z) / (m * c)

    mean = 1.0 / m - M * math.exp(-m * M) / c
    return LossModel(f"truncated_exponential(m={m:g}, M={M:g})", M, 0.0, mean,
                     cdf, quantile, quantile_derivative, integrated_quantile, (("m", m), ("M", M)))


def make_atom_exponential(gamma: float, eta: float, M: float) -> LossModel:
    """Loss with cdf (1 - gamma e^{-eta x}) / (1 - gamma e^{-eta M}) on [0, M]."""
    gamma, eta, M = float(gamma), float(eta), float(M)
    if not (0.0 < gamma < 1.0):
        raise InvalidParameter(f"gamma must lie in (0, 1), got {gamma}")
    if not (eta > 0 and math.isfinite(eta)):
        raise InvalidParameter(f"eta must be positive, got {eta}")
    if not (M > 0 and math.isfinite(M)):
        raise InvalidParameter(f"support bound M must be positive, got {M}")
    d = 1.0 - gamma * math.exp(-eta * M)
    atom = (1.0 - gamma) / d

    def cdf(x):
        return (1.0 - gamma * np.exp(-eta * x)) / d

    def quantile(z):
        s = np.maximum(1.0 - z * d, gamma * math.exp(-eta * M))
        return np.where(z <= atom, 0.0, -np.log(np.minimum(s / gamma, 1.0)) / eta)

    def quantile_derivative(z):
        return np.where(z < atom, 0.0, d / (eta * (1.0 - z * d)))

    def integrated_quantile(z):
        s = np.minimum(1.0 - z * d, gamma)
        val = (s * np.log(s / gamma) - s + gamma) / (eta * d)
        return np.where(z <= atom, 0.0, val)

    ez = math.exp(-eta * M)
    mean = (gamma * (1.0 - ez) - gamma * eta * M * ez) / (eta * d)
    return LossModel(f"atom_exponential(gamma={gamma:g}, eta={eta:g}, M={M:g})", M, atom, mean,
                     cdf, quantile, quantile_derivative, integrated_quantile,
                     (("gamma", gamma), ("eta", eta), ("M", M)))


def k_of(threshold: float, loss: LossModel) -> float:
    """Integral of the quantile capped at level ``threshold``: retention budget of Deductible(threshold)."""
    t = float(threshold)
    if not (0.0 <= t <= 1.0):
        raise OutOfDomain(f"threshold must lie in [0, 1], got {t}")
    return float(loss.integrated_quantile(t) + loss.quantile(t) * (1.0 - t))


class Shape(Enum):
    FULL = "full"
    NO_COVERAGE = "no_coverage"
    DEDUCTIBLE = "deductible"
    THREEFOLD = "threefold"


@dataclass(frozen=True)
class Contract:
    """Indemnity schedule with slopes in {0, 1}, stored by quantile thresholds."""

    shape: Shape
    lower: float
    upper: float

    def __post_init__(self):
        lo, up = self.lower, self.upper
        if not (0.0 <= lo <= up <= 1.0):
            raise InvalidParameter(f"contract thresholds need 0 <= lower <= upper <= 1, got {lo}, {up}")
        if self.shape is Shape.FULL and up != 0.0:
            raise InvalidParameter("full coverage has no retention band")
        if self.shape is Shape.NO_COVERAGE and (lo, up) != (0.0, 1.0):
            raise InvalidParameter("no coverage retains the whole loss")
        if self.shape is Shape.DEDUCTIBLE and lo != 0.0:
            raise InvalidParameter("a deductible starts retaining at the smallest loss")
        if self.shape is Shape.THREEFOLD and not lo < up:
            raise InvalidParameter("a threefold contract needs lower < upper")

    @classmethod
    def full(cls) -> "Contract":
        return cls(Shape.FULL, 0.0, 0.0)

    @classmethod
    def no_coverage(cls) -> "Contract":
        return cls(Shape.NO_COVERAGE, 0.0, 1.0)

    @classmethod
    def deductible(cls, q: float) -> "Contract":
        return cls(Shape.DEDUCTIBLE, 0.0, float(q))

    @classmethod
    def threefold(cls, lower: float, upper: float) -> "Contract":
        return cls(Shape.THREEFOLD, float(lower), float(upper))

    def breakpoints(self, loss: LossModel) -> tuple[float, float]:
        """Loss-space kinks (x_lo, x_hi) = (Q(lower), Q(upper))."""
        return float(loss.quantile(self.lower)), float(loss.quantile(self.upper))

    def retention(self, x, loss: LossModel):
        x_lo, x_hi = self.breakpoints(loss)
        return np.clip(np.asarray(x, dtype=float), x_lo, x_hi) - x_lo

    def indemnity(self, x, loss: LossModel):
        x = np.asarray(x, dtype=float)
        return x - self.retention(x, loss)

    def describe(self, loss: LossModel) -> dict:
        x_lo, x_hi = self.breakpoints(loss)
        return {"shape": self.shape.value, "lower": self.lower, "upper": self.upper,
                "x_lo": x_lo, "x_hi": x_hi}


@dataclass(frozen=True)
class QuantileSolution:
    """Retention quantile G of a contract under a given loss model."""

    contract: Contract
    loss: LossModel

    @property
    def kinks(self) -> tuple[float, float]:
        return self.contract.lower, self.contract.upper

    def value(self, z):
        c, q = self.contract, self.loss.quantile
        return q(np.clip(np.asarray(z, dtype=float), c.lower, c.upper)) - q(c.lower)

    def derivative(self, z):
        z = np.asarray(z, dtype=float)
        c = self.contract
        inside = (z > c.lower) & (z < c.upper)
        return np.where(inside, self.loss.quantile_derivative(z), 0.0)

    def level(self) -> float:
        """Constant value of G above the upper threshold."""
        return float(self.loss.quantile(self.contract.upper) - self.loss.quantile(self.contract.lower))

    def integral(self) -> float:
        """Exact integral of G over [0, 1] through the closed-form quantile integral."""
        lo, up = self.contract.lower, self.contract.upper
        iq, q = self.loss.integrated_quantile, self.loss.quantile
        ql = float(q(lo))
        return float(iq(up) - iq(lo) - ql * (up - lo) + (float(q(up)) - ql) * (1.0 - up))


def expected_indemnity(loss: LossModel, contract: Contract, tol: Tolerance = DEFAULT_TOL) -> float:
    """E[I(X)] = E[X] - integral of G, with the integral done by quadrature."""
    g = QuantileSolution(contract, loss)
    retained = integrate_pieces(g.value, [0.0, contract.lower, contract.upper, 1.0], tol)
    return loss.mean - retained


def monte_carlo_expected_indemnity(loss: LossModel, contract: Contract, n: int,
                                   rng: np.random.Generator) -> tuple[float, float]:
    """Sample mean and standard error of I(X)."""
    x = loss.sample(n, rng)
    i = contract.indemnity(x, loss)
    return float(np.mean(i)), float(np.std(i, ddof=1) / math.sqrt(n))


def indemnity_at(contract: Contract, loss: LossModel, x: float) -> float:
    if not (0.0 <= x <= loss.M):
        raise OutOfDomain(f"loss {x} outside [0, {loss.M}]")
    return float(contract.indemnity(x, loss))


def retention_at(contract: Contract, loss: LossModel, x: float) -> float:
    if not (0.0 <= x <= loss.M):
        raise OutOfDomain(f"loss {x} outside [0, {loss.M}]")
    return float(contract.retention(x, loss))
