"""Run configuration: TOML file with strictly validated tables.

Example::

    [loss]
    kind = "truncated_exponential"
    m = 0.1
    M = 10.0

    [utility]
    kind = "exponential"
    alpha = 0.02

    [weighting]
    kind = "tversky_kahneman"
    theta = 0.5

    [problem]
    W0 = 15.0
    rho = 0.2
    premium = 3.0            # or: premium_grid = [0.1, 3.0, 5.1]

    [tolerances]             # optional
    abs_tol = 1e-10
    rel_tol = 1e-9
    max_iter = 200

    [oracle]                 # optional
    enabled = false
    n = 400
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, InvalidParameter, RduInsuranceError
from .landmarks import compute_landmarks
from .loss_model import LossModel, make_atom_exponential, make_truncated_exponential
from .numerics import Tolerance, integrate
from .preferences import (UtilitySpec, ValidationReport, WeightingSpec, validate_curvature_dominance,
                          validate_utility, validate_weighting)
from .problem import ProblemSpec

_LOSS_KEYS = {
    "truncated_exponential": {"m", "M"},
    "atom_exponential": {"gamma", "eta", "M"},
}
_UTILITY_KEYS = {
    "identity": set(),
    "exponential": {"alpha"},
    "power": {"gamma"},
    "log": set(),
}
_WEIGHTING_KEYS = {"tversky_kahneman": {"theta"}}
_TABLES = {"loss", "utility", "weighting", "problem", "tolerances", "oracle"}


@dataclass(frozen=True)
class RunConfig:
    loss: LossModel
    utility: UtilitySpec
    weighting: WeightingSpec
    W0: float
    rho: float
    premium: float | None
    premium_grid: tuple[float, ...] | None
    tol: Tolerance
    oracle_enabled: bool
    oracle_n: int
    source: dict

    def problem(self, premium: float | None = None) -> ProblemSpec:
        pi = self.premium if premium is None else premium
        if pi is None:
            raise ConfigError("configuration has no single premium; use premium or pass one explicitly")
        return ProblemSpec.for_loss(self.W0, pi, self.rho, self.loss)

    def premiums(self) -> tuple[float, ...]:
        if self.premium_grid is not None:
            return self.premium_grid
        return (self.premium,) if self.premium is not None else ()

    def with_tolerance(self, tol: Tolerance) -> "RunConfig":
        return replace(self, tol=tol)


def _number(table: dict, key: str, where: str, positive: bool = False) -> float:
    if key not in table:
        raise ConfigError(f"[{where}] missing required key '{key}'")
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"[{where}] '{key}' must be a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(f"[{where}] '{key}' must be finite")
    if positive and v <= 0:
        raise ConfigError(f"[{where}] '{key}' must be positive, got {v}")
    return v


def _table(doc: dict, name: str, required: bool = True) -> dict:
    if name not in doc:
        if required:
            raise ConfigError(f"missing table [{name}]")
        return {}
    t = doc[name]
    if not isinstance(t, dict):
        raise ConfigError(f"[{name}] must be a table")
    return t


def _kind(table: dict, where: str, allowed: dict) -> str:
    kind = table.get("kind")
    if kind is None:
        raise ConfigError(f"[{where}] missing required key 'kind'")
    if kind not in allowed:
        raise ConfigError(f"[{where}] unknown kind {kind!r}; expected one of {sorted(allowed)}")
    extra = set(table) - allowed[kind] - {"kind"}
    if extra:
        raise ConfigError(f"[{where}] unknown keys for kind {kind!r}: {sorted(extra)}")
    return kind


def parse_config(doc: dict) -> RunConfig:
    """Build a RunConfig from a parsed TOML document."""
    unknown = set(doc) - _TABLES
    if unknown:
        raise ConfigError(f"unknown tables: {sorted(unknown)}")

    lt = _table(doc, "loss")
    kind = _kind(lt, "loss", _LOSS_KEYS)
    try:
        if kind == "truncated_exponential":
            loss = make_truncated_exponential(_number(lt, "m", "loss", True), _number(lt, "M", "loss", True))
        else:
            loss = make_atom_exponential(_number(lt, "gamma", "loss"), _number(lt, "eta", "loss", True),
                                         _number(lt, "M", "loss", True))
    except InvalidParameter as exc:
        raise ConfigError(f"[loss] {exc}") from exc

    ut = _table(doc, "utility")
    kind = _kind(ut, "utility", _UTILITY_KEYS)
    try:
        if kind == "identity":
            utility = UtilitySpec.identity()
        elif kind == "exponential":
            utility = UtilitySpec.exponential(_number(ut, "alpha", "utility", True))
        elif kind == "power":
            utility = UtilitySpec.power(_number(ut, "gamma", "utility", True))
        else:
            utility = UtilitySpec.log()
    except InvalidParameter as exc:
        raise ConfigError(f"[utility] {exc}") from exc

    wt = _table(doc, "weighting")
    _kind(wt, "weighting", _WEIGHTING_KEYS)
    try:
        weighting = WeightingSpec.tversky_kahneman(_number(wt, "theta", "weighting", True))
    except InvalidParameter as exc:
        raise ConfigError(f"[weighting] {exc}") from exc

    pt = _table(doc, "problem")
    extra = set(pt) - {"W0", "rho", "premium", "premium_grid"}
    if extra:
        raise ConfigError(f"[problem] unknown keys: {sorted(extra)}")
    W0 = _number(pt, "W0", "problem")
    rho = _number(pt, "rho", "problem")
    if rho < 0:
        raise ConfigError("[problem] 'rho' must be non-negative")
    premium = grid = None
    if "premium" in pt and "premium_grid" in pt:
        raise ConfigError("[problem] give either 'premium' or 'premium_grid', not both")
    if "premium" in pt:
        premium = _number(pt, "premium", "problem")
    elif "premium_grid" in pt:
        raw = pt["premium_grid"]
        if not isinstance(raw, list):
            raise ConfigError("[problem] 'premium_grid' must be an array")
        grid = tuple(_number({"p": v}, "p", "problem.premium_grid") for v in raw)
        if not grid:
            raise ConfigError("[problem] 'premium_grid' is empty")
    else:
        raise ConfigError("[problem] missing required key 'premium' (or 'premium_grid')")
    for pi in (premium,) if grid is None else grid:
        if pi < 0:
            raise ConfigError(f"[problem] premiums must be non-negative, got {pi}")
        if utility.positive_domain and W0 - pi - loss.M <= 0:
            raise ConfigError(
                f"[problem] final wealth W0 - premium - M = {W0 - pi - loss.M:.6g} is not positive "
                f"for premium {pi}; {utility.name} utility needs positive wealth")

    tt = _table(doc, "tolerances", required=False)
    extra = set(tt) - {"abs_tol", "rel_tol", "max_iter"}
    if extra:
        raise ConfigError(f"[tolerances] unknown keys: {sorted(extra)}")
    try:
        tol = Tolerance(
            _number(tt, "abs_tol", "tolerances", True) if "abs_tol" in tt else Tolerance.abs_tol,
            _number(tt, "rel_tol", "tolerances", True) if "rel_tol" in tt else Tolerance.rel_tol,
            int(_number(tt, "max_iter", "tolerances", True)) if "max_iter" in tt else Tolerance.max_iter,
        )
    except InvalidParameter as exc:
        raise ConfigError(f"[tolerances] {exc}") from exc

    ot = _table(doc, "oracle", required=False)
    extra = set(ot) - {"enabled", "n"}
    if extra:
        raise ConfigError(f"[oracle] unknown keys: {sorted(extra)}")
    enabled = ot.get("enabled", False)
    if not isinstance(enabled, bool):
        raise ConfigError("[oracle] 'enabled' must be true or false")
    n = ot.get("n", 400)
    if isinstance(n, bool) or not isinstance(n, int) or n < 100:
        raise ConfigError("[oracle] 'n' must be an integer >= 100")

    return RunConfig(loss, utility, weighting, W0, rho, premium, grid, tol, enabled, n, doc)


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return parse_config(doc)


def validate_loss(loss: LossModel, grid_size: int = 1000) -> ValidationReport:
    """Grid checks of the loss distribution's regularity conditions."""
    rep = ValidationReport(f"loss {loss.name}")
    x = np.linspace(0.0, loss.M, grid_size + 1)
    fx = loss.cdf(x)
    rep.add("F strictly increasing on [0, M]", bool(np.all(np.diff(fx) > 0)), "")
    rep.add("F(M) = 1", abs(float(loss.cdf(loss.M)) - 1.0) < 1e-12, "")
    back = loss.quantile(fx)
    err = float(np.max(np.abs(back - x)))
    rep.add("Q(F(x)) = x", err < 1e-8 * (1 + loss.M), f"max error {err:.3g}")
    pts = np.linspace(0.0, 1.0, 11)
    ac = max(abs(float(loss.quantile(b) - loss.quantile(a))
                 - integrate(loss.quantile_derivative, a, b)) for a, b in zip(pts[:-1], pts[1:]))
    rep.add("Q absolutely continuous", ac < 1e-8 * (1 + loss.M), f"max defect {ac:.3g}")
    m = integrate(loss.quantile, 0.0, 1.0)
    rep.add("E[X] = integral of Q", abs(m - loss.mean) < 1e-8 * (1 + loss.mean),
            f"E[X]={loss.mean:.12g}, quadrature {m:.12g}")
    return rep


def validate_config(cfg: RunConfig) -> ValidationReport:
    """Clause-by-clause report for every modelling assumption the solvers use."""
    rep = ValidationReport("configuration")
    rep.extend(validate_weighting(cfg.weighting))
    rep.extend(validate_loss(cfg.loss))
    premiums = cfg.premiums()
    problems = [cfg.problem(pi) for pi in premiums]
    base = problems[0]
    rep.add("solvency W0 - (1+rho)E[X] - M >= 0", base.solvency_margin >= 0,
            f"margin {base.solvency_margin:.6g}", advisory=True)
    worst = min(p.worst_wealth for p in problems)
    rep.add("final wealth W0 - pi - M > 0", worst > 0, f"smallest {worst:.6g}",
            advisory=not cfg.utility.positive_domain)
    lo = min(p.W_delta for p in problems) - cfg.loss.M
    hi = max(p.W_delta for p in problems)
    if cfg.utility.positive_domain:
        lo = max(lo, 1e-9 * hi)
    rep.extend(validate_utility(cfg.utility, lo, hi))
    try:
        cert = compute_landmarks(cfg.weighting, cfg.tol)
        rep.add("landmarks a < b, a < c", 0 < cert.a < cert.b < 1 and cert.a < cert.c,
                f"a={cert.a:.6g}, b={cert.b:.6g}, c={cert.c:.6g}")
    except RduInsuranceError as exc:
        rep.add("landmarks a < b, a < c", False, str(exc))
        return rep
    if not cfg.utility.is_identity:
        rep.extend(validate_curvature_dominance(cfg.utility, cfg.weighting, cfg.loss, base.W, cert.a))
    return rep
