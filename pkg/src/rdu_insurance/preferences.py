"""Utility and probability-weighting functions, Arrow-Pratt measures and
assumption validators.

Every callable accepts scalars or numpy arrays and returns the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .errors import InvalidParameter, OutOfDomain

ArrayFn = Callable[[np.ndarray], np.ndarray]

_TINY = np.finfo(float).tiny
_ONE_MINUS = np.nextafter(1.0, 0.0)

# Tversky-Kahneman weighting stops being monotone for theta below about 0.279.
THETA_MIN = 0.27


@dataclass(frozen=True)
class Clause:
    name: str
    passed: bool
    detail: str = ""
    advisory: bool = False


@dataclass
class ValidationReport:
    title: str
    clauses: list[Clause] = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str = "", advisory: bool = False) -> None:
        self.clauses.append(Clause(name, bool(passed), detail, advisory))

    def extend(self, other: "ValidationReport") -> None:
        self.clauses.extend(other.clauses)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses if not c.advisory)

    def failures(self) -> list[Clause]:
        return [c for c in self.clauses if not c.passed and not c.advisory]

    def clause(self, name: str) -> Clause:
        for c in self.clauses:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> list[str]:
        out = []
        for c in self.clauses:
            tag = "PASS" if c.passed else ("WARN" if c.advisory else "FAIL")
            out.append(f"[{tag}] {c.name}" + (f": {c.detail}" if c.detail else ""))
        return out


# --------------------------------------------------------------------------
# probability weighting

class WeightingFamily(Enum):
    TVERSKY_KAHNEMAN = "tversky_kahneman"
    USER_DEFINED = "user_defined"


@dataclass(frozen=True)
class WeightingSpec:
    """Probability weighting T on [0, 1] with first and second derivatives."""

    family: WeightingFamily
    theta: float | None = None
    T: ArrayFn | None = field(default=None, repr=False)
    dT: ArrayFn | None = field(default=None, repr=False)
    d2T: ArrayFn | None = field(default=None, repr=False)
    name: str = ""

    @classmethod
    def tversky_kahneman(cls, theta: float) -> "WeightingSpec":
        theta = float(theta)
        if not (0.0 < theta < 1.0):
            raise InvalidParameter(f"theta must lie in (0, 1), got {theta}")
        return cls(WeightingFamily.TVERSKY_KAHNEMAN, theta=theta, name=f"TK(theta={theta:g})")

    @classmethod
    def user_defined(cls, T: ArrayFn, dT: ArrayFn, d2T: ArrayFn, name: str = "user") -> "WeightingSpec":
        return cls(WeightingFamily.USER_DEFINED, T=T, dT=dT, d2T=d2T, name=name)

    def value(self, z):
        z = np.asarray(z, dtype=float)
        if self.family is WeightingFamily.USER_DEFINED:
            return np.asarray(self.T(z), dtype=float)
        th = self.theta
        with np.errstate(divide="ignore", invalid="ignore"):
            zt = z ** th
            s = zt + (1.0 - z) ** th
            return zt / s ** (1.0 / th)

    def derivative(self, z):
        """T'(z); abscissae are clipped into the open unit interval."""
        z = np.clip(np.asarray(z, dtype=float), _TINY, _ONE_MINUS)
        if self.family is WeightingFamily.USER_DEFINED:
            return np.asarray(self.dT(z), dtype=float)
        t, lp, _ = self._tk_logs(z)
        return t * lp

    def second_derivative(self, z):
        z = np.clip(np.asarray(z, dtype=float), _TINY, _ONE_MINUS)
        if self.family is WeightingFamily.USER_DEFINED:
            return np.asarray(self.d2T(z), dtype=float)
        t, lp, lpp = self._tk_logs(z)
        return t * (lp * lp + lpp)

    def _tk_logs(self, z):
        """T, (log T)' and (log T)'' for the Tversky-Kahneman family."""
        th = self.theta
        y = 1.0 - z
        s = z ** th + y ** th
        t = z ** th / s ** (1.0 / th)
        diff1 = z ** (th - 1.0) - y ** (th - 1.0)
        lp = th / z - diff1 / s
        lpp = (-th / z ** 2 - (th - 1.0) * (z ** (th - 2.0) + y ** (th - 2.0)) / s
               + th * diff1 ** 2 / s ** 2)
        return t, lp, lpp

    def arrow_pratt(self, z):
        z = np.clip(np.asarray(z, dtype=float), _TINY, _ONE_MINUS)
        if self.family is WeightingFamily.TVERSKY_KAHNEMAN:
            _, lp, lpp = self._tk_logs(z)
            return -(lp + lpp / lp)
        return -self.second_derivative(z) / self.derivative(z)


def eval_weighting(w: WeightingSpec, z, order: int = 0):
    """T, T' or T'' at z with domain checks."""
    z_arr = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(z_arr)) or np.any(z_arr < 0) or np.any(z_arr > 1):
        raise OutOfDomain(f"weighting evaluated outside [0, 1]: {z}")
    if order == 0:
        out = w.value(z_arr)
    elif order in (1, 2):
        if np.any(z_arr <= 0) or np.any(z_arr >= 1):
            raise OutOfDomain("weighting derivatives are defined on the open interval (0, 1)")
        out = w.derivative(z_arr) if order == 1 else w.second_derivative(z_arr)
    else:
        raise InvalidParameter(f"order must be 0, 1 or 2, got {order}")
    return float(out) if np.ndim(out) == 0 else out


def arrow_pratt_T(w: WeightingSpec, z):
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr <= 0) or np.any(z_arr >= 1):
        raise OutOfDomain("A_T is defined on the open interval (0, 1)")
    out = w.arrow_pratt(z_arr)
    return float(out) if np.ndim(out) == 0 else out


def validate_weighting(w: WeightingSpec, grid_size: int = 1000) -> ValidationReport:
    """Grid checks of the inverse-S shape conditions on T."""
    if grid_size < 100:
        raise InvalidParameter("grid_size must be at least 100")
    rep = ValidationReport(f"weighting {w.name}")
    if w.family is WeightingFamily.TVERSKY_KAHNEMAN:
        ok = THETA_MIN < w.theta < 1.0
        rep.add("theta in (0.27, 1)", ok, f"theta={w.theta:g}")
    t0, t1 = float(w.value(0.0)), float(w.value(1.0))
    rep.add("T(0)=0 and T(1)=1", abs(t0) < 1e-12 and abs(t1 - 1) < 1e-12, f"T(0)={t0:.3g}, T(1)={t1:.15g}")

    z = np.linspace(0.0, 1.0, grid_size + 1)
    tz = w.value(z)
    steps = np.diff(tz)
    rep.add("T strictly increasing", bool(np.all(steps > 0)),
            f"min step {steps.min():.3g} at z={z[int(np.argmin(steps))]:.4f}")

    zi = z[1:-1]
    d = w.derivative(zi)
    dd = np.diff(d)
    k = int(np.argmin(d))
    interior = 0 < k < len(d) - 1
    shape = interior and bool(np.all(dd[:k] < 0)) and bool(np.all(dd[k:] > 0))
    rep.add("T' strictly decreasing then increasing (unique interior minimum)", shape,
            f"grid minimum at z={zi[k]:.4f}")
    d0 = float(w.derivative(1.0 / grid_size))
    rep.add("T'(0+) > 1", d0 > 1.0, f"T'({1.0 / grid_size:g})={d0:.6g}")
    d_near = float(w.derivative(1.0 - 1.0 / grid_size))
    d_far = float(w.derivative(1.0 - 10.0 / grid_size))
    rep.add("T'(1-) = +inf", d_near > d_far, f"T'(1-1/n)={d_near:.6g}, T'(1-10/n)={d_far:.6g}")
    return rep


# --------------------------------------------------------------------------
# utility

class UtilityFamily(Enum):
    IDENTITY = "identity"
    EXPONENTIAL = "exponential"
    POWER = "power"
    LOG = "log"
    USER_DEFINED = "user_defined"


class ARAClass(Enum):
    IDENTITY = "identity"
    CONSTANT = "constant_ara"
    DECREASING = "strictly_decreasing_ara"
    OTHER = "other"


@dataclass(frozen=True)
class UtilitySpec:
    """Utility of final wealth with its first two derivatives."""

    family: UtilityFamily
    param: float | None = None
    ara_class: ARAClass = ARAClass.OTHER
    u: ArrayFn | None = field(default=None, repr=False)
    du: ArrayFn | None = field(default=None, repr=False)
    d2u: ArrayFn | None = field(default=None, repr=False)
    inv: ArrayFn | None = field(default=None, repr=False)
    positive_domain: bool = False
    name: str = ""

    @classmethod
    def identity(cls) -> "UtilitySpec":
        return cls(UtilityFamily.IDENTITY, ara_class=ARAClass.IDENTITY, name="identity")

    @classmethod
    def exponential(cls, alpha: float) -> "UtilitySpec":
        alpha = float(alpha)
        if not (alpha > 0 and math.isfinite(alpha)):
            raise InvalidParameter(f"alpha must be positive, got {alpha}")
        return cls(UtilityFamily.EXPONENTIAL, alpha, ARAClass.CONSTANT, name=f"exponential(alpha={alpha:g})")

    @classmethod
    def power(cls, gamma: float) -> "UtilitySpec":
        gamma = float(gamma)
        if not (0.0 < gamma < 1.0):
            raise InvalidParameter(f"gamma must lie in (0, 1), got {gamma}")
        return cls(UtilityFamily.POWER, gamma, ARAClass.DECREASING, positive_domain=True,
                   name=f"power(gamma={gamma:g})")

    @classmethod
    def log(cls) -> "UtilitySpec":
        return cls(UtilityFamily.LOG, None, ARAClass.DECREASING, positive_domain=True, name="log")

    @classmethod
    def user_defined(cls, u: ArrayFn, du: ArrayFn, d2u: ArrayFn, ara_class: ARAClass = ARAClass.OTHER,
                     inverse: ArrayFn | None = None, positive_domain: bool = False,
                     name: str = "user") -> "UtilitySpec":
        return cls(UtilityFamily.USER_DEFINED, None, ara_class, u, du, d2u, inverse,
                   positive_domain, name)

    @property
    def is_identity(self) -> bool:
        return self.ara_class is ARAClass.IDENTITY

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if self.positive_domain and np.any(x <= 0):
            raise OutOfDomain(f"{self.name} utility needs positive wealth, got min {np.min(x):.6g}")
        return x

    def value(self, x):
        x = self._check(x)
        f = self.family
        if f is UtilityFamily.IDENTITY:
            return x.copy() if x.ndim else x + 0.0
        if f is UtilityFamily.EXPONENTIAL:
            return -np.expm1(-self.param * x)
        if f is UtilityFamily.POWER:
            return x ** self.param
        if f is UtilityFamily.LOG:
            return np.log(x)
        return np.asarray(self.u(x), dtype=float)

    def derivative(self, x):
        x = self._check(x)
        f = self.family
        if f is UtilityFamily.IDENTITY:
            return np.ones_like(x)
        if f is UtilityFamily.EXPONENTIAL:
            return self.param * np.exp(-self.param * x)
        if f is UtilityFamily.POWER:
            return self.param * x ** (self.param - 1.0)
        if f is UtilityFamily.LOG:
            return 1.0 / x
        return np.asarray(self.du(x), dtype=float)

    def second_derivative(self, x):
        x = self._check(x)
        f = self.family
        if f is UtilityFamily.IDENTITY:
            return np.zeros_like(x)
        if f is UtilityFamily.EXPONENTIAL:
            return -self.param ** 2 * np.exp(-self.param * x)
        if f is UtilityFamily.POWER:
            return self.param * (self.param - 1.0) * x ** (self.param - 2.0)
        if f is UtilityFamily.LOG:
            return -1.0 / x ** 2
        return np.asarray(self.d2u(x), dtype=float)

    def inverse(self, v):
        """Certainty-equivalent wealth u^{-1}(v)."""
        v = np.asarray(v, dtype=float)
        f = self.family
        if f is UtilityFamily.IDENTITY:
            return v + 0.0
        if f is UtilityFamily.EXPONENTIAL:
            return -np.log1p(-v) / self.param
        if f is UtilityFamily.POWER:
            return v ** (1.0 / self.param)
        if f is UtilityFamily.LOG:
            return np.exp(v)
        if self.inv is None:
            raise InvalidParameter(f"{self.name} utility has no inverse")
        return np.asarray(self.inv(v), dtype=float)


def arrow_pratt(u: UtilitySpec, z):
    """A_u(z) = -u''(z)/u'(z)."""
    if u.family is UtilityFamily.EXPONENTIAL:
        z = u._check(z)
        out = np.full_like(z, u.param)
    elif u.family is UtilityFamily.IDENTITY:
        z = u._check(z)
        out = np.zeros_like(z)
    else:
        d1 = u.derivative(z)
        if np.any(d1 == 0):
            raise OutOfDomain("u'(z) = 0, Arrow-Pratt measure undefined")
        out = -u.second_derivative(z) / d1
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ARAReport:
    a_u_samples: tuple[tuple[float, float], ...]
    classification: ARAClass
    monotone_decreasing: bool


def ara_report(u: UtilitySpec, lo: float, hi: float, n: int = 200) -> ARAReport:
    """Sample A_u on [lo, hi] and classify its monotonicity."""
    z = np.linspace(lo, hi, n)
    a = np.asarray(arrow_pratt(u, z), dtype=float)
    steps = np.diff(a)
    scale = max(1e-300, float(np.max(np.abs(a))))
    if u.family is UtilityFamily.USER_DEFINED and u.ara_class is ARAClass.OTHER:
        if np.all(np.abs(a) <= 1e-12):
            cls = ARAClass.IDENTITY
        elif np.max(a) - np.min(a) <= 1e-10 * scale:
            cls = ARAClass.CONSTANT
        elif np.all(steps < 0):
            cls = ARAClass.DECREASING
        else:
            cls = ARAClass.OTHER
    else:
        cls = u.ara_class
    return ARAReport(tuple(zip(z.tolist(), a.tolist())), cls, bool(np.all(steps <= 1e-12 * scale)))


def validate_utility(u: UtilitySpec, lo: float, hi: float, grid_size: int = 1000) -> ValidationReport:
    """Grid checks of u' > 0, u'' <= 0 and strict concavity on [lo, hi]."""
    rep = ValidationReport(f"utility {u.name}")
    if u.positive_domain and lo <= 0:
        rep.add("wealth range inside utility domain", False, f"lowest wealth {lo:.6g} <= 0")
        return rep
    x = np.linspace(lo, hi, grid_size + 1)
    d1 = u.derivative(x)
    d2 = u.second_derivative(x)
    rep.add("u' > 0", bool(np.all(d1 > 0)), f"min u'={np.min(d1):.6g} on [{lo:.6g}, {hi:.6g}]")
    rep.add("u'' <= 0", bool(np.all(d2 <= 0)), f"max u''={np.max(d2):.6g}")
    if not u.is_identity:
        rep.add("u' strictly decreasing", bool(np.all(np.diff(d1) < 0)), "")
    return rep


def validate_curvature_dominance(u: UtilitySpec, w: WeightingSpec, loss, W: float, a: float,
                           grid_size: int = 1000) -> ValidationReport:
    """Compare A_T(z) with A_u(W - Q(z)) Q'(z) on a grid over (0, a]."""
    rep = ValidationReport("risk-aversion versus weighting curvature")
    ok_class = u.ara_class in (ARAClass.IDENTITY, ARAClass.CONSTANT, ARAClass.DECREASING)
    rep.add("A_u decreasing (constant or strictly decreasing ARA)", ok_class, u.ara_class.value)
    if loss.atom0 >= a:
        rep.add("A_T > A_u(W-Q) Q' on (0, a]", True,
                f"holds automatically: P(X=0)={loss.atom0:.6g} >= a={a:.6g}")
        return rep
    z = a * np.arange(1, grid_size + 1) / grid_size
    qz = loss.quantile(z)
    if u.positive_domain and np.any(W - qz <= 0):
        rep.add("A_T > A_u(W-Q) Q' on (0, a]", False, "W - Q(z) leaves the utility domain")
        return rep
    margin = w.arrow_pratt(z) - np.asarray(arrow_pratt(u, W - qz)) * loss.quantile_derivative(z)
    k = int(np.argmin(margin))
    rep.add("A_T > A_u(W-Q) Q' on (0, a]", bool(np.all(margin > 0)),
            f"minimum margin {margin[k]:.6g} at z={z[k]:.6g}")
    return rep
