"""Optimal contracts for a strictly risk-averse rank-dependent-utility buyer.

Two shapes can be optimal when the premium buys a retention budget
0 < Delta < E[X]:

* a threefold contract with thresholds z2 <= a <= z1, where the flat
  indemnity level k = Q(z1) - Q(z2) satisfies the inner condition

      u'(W_Delta - k) f(z1) (z1 - z2)
          = int_{z2}^{z1} u'(W_Delta - Q(t) + Q(z2)) T'(t) dt,

  and the budget binds;
* a deductible at level f >= l_Delta binding the budget.

For constant absolute risk aversion the split point l_Delta does not depend
on Delta, so one premium threshold pi_hat separates the shapes. For strictly
decreasing absolute risk aversion the split uses the budgets
Delta_tilde <= Delta_bar and, between them, the sign of g(p).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (AssumptionViolated, BracketInvalid, InfeasibleDelta, NoBracket,
                     NonConvergent, NoSignChange, SolverFailed, UnsupportedARAClass)
from .landmarks import (compute_landmarks, delta_of_d, f_curve, find_l_delta, g_value,
                        lambda_from_flat_level, marginal_integral)
from .loss_model import Contract, LossModel, QuantileSolution, Shape, k_of
from .numerics import DEFAULT_TOL, Bracket, Tolerance, find_root, integrate, scan_bracket
from .preferences import ARAClass, UtilitySpec, WeightingSpec, validate_curvature_dominance
from .problem import ProblemSpec
from .solution import Solution, boundary_band
from .yaari import solve_yaari


def _tight(tol: Tolerance) -> Tolerance:
    """Tolerance for inner quadratures and thresholds of nested solves."""
    return Tolerance(min(tol.abs_tol, 1e-14), min(tol.rel_tol, 1e-13), max(tol.max_iter, 200))


@dataclass(frozen=True)
class ThreefoldResidual:
    z2: float
    z1: float
    inner_residual: float
    premium_residual: float


def inner_residual(wealth: float, u: UtilitySpec, w: WeightingSpec, loss: LossModel,
                   z2: float, z1: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Flat-level condition of a threefold contract with thresholds (z2, z1)."""
    q2 = float(loss.quantile(z2))
    k = float(loss.quantile(z1)) - q2
    head = float(u.derivative(wealth - k)) * float(f_curve(w, z1)) * (z1 - z2)
    if u.is_identity:
        return head - float(w.value(z1) - w.value(z2))
    tail = integrate(lambda t: u.derivative(wealth - loss.quantile(t) + q2) * w.derivative(t), z2, z1, tol)
    return head - tail


def _budget(loss: LossModel, z2: float, z1: float) -> float:
    if z1 <= z2:
        return 0.0
    return QuantileSolution(Contract.threefold(z2, z1), loss).integral()


def solve_threefold_pair(problem: ProblemSpec, u: UtilitySpec, w: WeightingSpec, loss: LossModel,
                         delta: float, tol: Tolerance = DEFAULT_TOL) -> ThreefoldResidual:
    """Thresholds (z2, z1) of the threefold contract with retention budget ``delta``.

    The outer search runs over z2 in [0, a]; for each z2 the inner condition
    has a unique root z1 in (a, c). The budget falls from K_Delta at z2 = 0 to
    0 at z2 = a.
    """
    cert = compute_landmarks(w, tol)
    a, c_hi = cert.a, cert.c_upper
    wealth = problem.wealth_for(delta)
    scale = float(u.derivative(wealth))
    itol = _tight(tol)

    def r(z2, z1):
        return inner_residual(wealth, u, w, loss, z2, z1, itol) / scale

    def z1_of(z2):
        if z2 >= a:
            return a
        r_lo = r(z2, a)
        if r_lo >= 0.0:
            # z2 numerically at a: the band has collapsed
            return a
        r_hi = r(z2, c_hi)
        if r_hi <= 0.0:
            raise BracketInvalid(f"inner condition has no root in (a, c) for z2={z2:.6g}")
        return find_root(lambda z1: r(z2, z1), Bracket(a, c_hi, r_lo, r_hi), itol)

    def gap(z2):
        return _budget(loss, z2, z1_of(z2)) - delta

    if delta <= 0.0:
        raise NoBracket("a threefold contract needs a positive retention budget")
    g0 = gap(0.0)
    if g0 < -1e-12 * (1.0 + delta):
        raise NoBracket(f"budget {delta:.10g} is not below K_Delta={g0 + delta:.10g}: not a threefold regime")
    if g0 <= 0.0:
        # budget equals K_Delta to round-off: the band starts at zero
        z2 = 0.0
    else:
        try:
            z2 = find_root(gap, Bracket(0.0, a, g0, -delta), itol)
        except (NonConvergent, NoSignChange):
            z2 = find_root(gap, scan_bracket(gap, 0.0, a, 200), itol)
    z1 = z1_of(z2)
    # the budget falls with z2, so a sign change elsewhere would signal non-monotonicity
    if z2 > 0 and not (gap(0.5 * z2) >= -1e-9 * (1 + delta)):
        raise SolverFailed("retention budget is not monotone in the lower threshold")
    res = ThreefoldResidual(z2, z1, inner_residual(wealth, u, w, loss, z2, z1, itol),
                            _budget(loss, z2, z1) - delta)
    return res


def solve_deductible(problem: ProblemSpec, u: UtilitySpec, w: WeightingSpec, loss: LossModel,
                     delta: float, regime_bracket: tuple[float, float],
                     tol: Tolerance = DEFAULT_TOL) -> float:
    """Deductible level f in ``regime_bracket`` with retention budget ``delta``."""
    lo, hi = regime_bracket
    if delta >= loss.mean:
        return 1.0

    def gap(q):
        return k_of(q, loss) - delta

    g_lo = gap(lo)
    if 0.0 < g_lo <= 1e-12 * (1.0 + delta):
        # budget equals K at the lower end to round-off
        return lo
    try:
        br = Bracket(lo, hi, g_lo, gap(hi))
    except NoSignChange as exc:
        raise NoBracket(f"budget {delta:.10g} outside the deductible range [{lo:.6g}, {hi:.6g}]") from exc
    return find_root(gap, br, _tight(tol))


def contract_objective(problem: ProblemSpec, u: UtilitySpec, w: WeightingSpec, loss: LossModel,
                       contract: Contract, tol: Tolerance = DEFAULT_TOL) -> float:
    """RDU value int_0^1 u(W_Delta - G(z)) T'(z) dz of a contract."""
    g = QuantileSolution(contract, loss)
    return marginal_integral(u, w, g, problem.W_delta, 0.0, 1.0, tol, order=0)


def classify_by_k_delta(problem: ProblemSpec, u: UtilitySpec, w: WeightingSpec, loss: LossModel,
                        tol: Tolerance = DEFAULT_TOL) -> str:
    """Shape predicted by comparing Delta with K_Delta = K(l_Delta) directly."""
    delta = problem.delta
    if delta <= 0:
        return Shape.FULL.value
    if delta >= loss.mean:
        return Shape.NO_COVERAGE.value
    l_d = find_l_delta(problem, u, w, loss, tol)
    return Shape.THREEFOLD.value if delta < k_of(l_d, loss) else Shape.DEDUCTIBLE.value


def _check_assumptions(problem: ProblemSpec, u: UtilitySpec, w: WeightingSpec, loss: LossModel,
                       tol: Tolerance) -> None:
    if u.ara_class not in (ARAClass.CONSTANT, ARAClass.DECREASING):
        raise UnsupportedARAClass(
            f"no closed-form solver for utility {u.name} with ARA class {u.ara_class.value}")
    if u.positive_domain and problem.worst_wealth <= 0:
        raise AssumptionViolated("positive final wealth",
                                 f"W0 - pi - M = {problem.worst_wealth:.6g} <= 0")
    cert = compute_landmarks(w, tol)
    if u.positive_domain and problem.W - float(loss.quantile(cert.c_upper)) <= 0:
        raise AssumptionViolated("positive final wealth",
                                 "W - Q(c) <= 0 leaves the utility domain")
    rep = validate_curvature_dominance(u, w, loss, problem.W, cert.a)
    if not rep.passed:
        bad = rep.failures()[0]
        raise AssumptionViolated(bad.name, bad.detail)


def solve_rdu(problem: ProblemSpec, u: UtilitySpec, w: WeightingSpec, loss: LossModel,
              tol: Tolerance = DEFAULT_TOL) -> Solution:
    _check_assumptions(problem, u, w, loss, tol)
    cert = compute_landmarks(w, tol)
    delta = problem.delta
    band = boundary_band(problem)
    wd = problem.W_delta
    method = "rdu_cara" if u.ara_class is ARAClass.CONSTANT else "rdu_dara"
    thresholds: dict = {"full_cover_premium": problem.full_cover_premium}
    diagnostics: dict = {}

    def finish(contract: Contract, lam: float, boundary: bool = False, extra=None) -> Solution:
        residuals = {"premium": QuantileSolution(contract, loss).integral() - delta}
        if extra:
            residuals.update(extra)
        return Solution(contract, problem, method, lam, cert, thresholds, residuals, diagnostics, boundary)

    if delta > loss.mean + band:
        raise InfeasibleDelta(f"retention budget {delta} exceeds E[X]={loss.mean}")
    if problem.pi >= problem.full_cover_premium - band:
        binding = abs(delta) <= band
        lam = cert.lambda_hat * float(u.derivative(wd)) if binding else 0.0
        return finish(Contract.full(), lam, boundary=binding)
    if problem.pi <= band and delta >= loss.mean - band:
        return finish(Contract.no_coverage(), math.inf)

    def threefold() -> Solution:
        pair = solve_threefold_pair(problem, u, w, loss, delta, tol)
        k = float(loss.quantile(pair.z1) - loss.quantile(pair.z2))
        lam = lambda_from_flat_level(u, w, wd, k, pair.z1)
        extra = {"inner": pair.inner_residual}
        contract = Contract.deductible(pair.z1) if pair.z2 == 0.0 else Contract.threefold(pair.z2, pair.z1)
        return finish(contract, lam, extra=extra)

    def deductible(bracket, boundary=False) -> Solution:
        f = solve_deductible(problem, u, w, loss, delta, bracket, tol)
        if f >= 1.0:
            return finish(Contract.no_coverage(), math.inf)
        lam = lambda_from_flat_level(u, w, wd, float(loss.quantile(f)), f)
        return finish(Contract.deductible(f), lam, boundary=boundary)

    if u.ara_class is ARAClass.CONSTANT:
        l_d = find_l_delta(problem, u, w, loss, tol)
        K = k_of(l_d, loss)
        pi_hat = problem.premium_for(K)
        thresholds.update({"l": l_d, "K": K, "pi_hat": pi_hat})
        if abs(problem.pi - pi_hat) <= band:
            sol = deductible((l_d, 1.0), boundary=True)
        elif problem.pi > pi_hat:
            sol = threefold()
        else:
            sol = deductible((l_d, 1.0))
    else:
        d_a = delta_of_d(cert.a, loss)
        d_c = delta_of_d(cert.c_upper, loss)
        l_a = find_l_delta(problem, u, w, loss, tol, wealth=problem.wealth_for(d_a))
        l_c = find_l_delta(problem, u, w, loss, tol, wealth=problem.wealth_for(d_c))
        d_tilde, d_bar = k_of(l_a, loss), k_of(l_c, loss)
        thresholds.update({"l_Delta_a": l_a, "l_Delta_c": l_c, "Delta_tilde": d_tilde,
                           "Delta_bar": d_bar, "pi_tilde": problem.premium_for(d_tilde),
                           "pi_bar": problem.premium_for(d_bar)})
        if delta <= d_tilde:
            sol = threefold()
        elif delta >= d_bar:
            sol = deductible((l_c, 1.0), boundary=abs(delta - d_bar) * (1 + problem.rho) <= band)
        else:
            p = find_root(lambda z: k_of(z, loss) - delta,
                          Bracket.of(lambda z: k_of(z, loss) - delta, l_a, l_c), _tight(tol))
            gp = g_value(p, problem, u, w, loss, _tight(tol)) / float(u.derivative(wd))
            thresholds.update({"p": p, "g_p": gp})
            if gp < 0:
                sol = threefold()
            else:
                sol = deductible((l_a, l_c), boundary=abs(gp) <= 1e-12)

    if sol.shape in (Shape.THREEFOLD, Shape.DEDUCTIBLE):
        if abs(sol.residuals["premium"]) > 1e-8 * (1.0 + loss.mean):
            raise SolverFailed("premium constraint does not bind", sol.residuals)
        if "inner" in sol.residuals and abs(sol.residuals["inner"]) > 1e-8 * float(u.derivative(wd)):
            raise SolverFailed("flat-level condition not met", sol.residuals)
    return sol


def solve(problem: ProblemSpec, u: UtilitySpec, w: WeightingSpec, loss: LossModel,
          tol: Tolerance = DEFAULT_TOL) -> Solution:
    """Dispatch to the linear-utility or the concave-utility solver."""
    if u.is_identity:
        return solve_yaari(problem, w, loss, tol)
    return solve_rdu(problem, u, w, loss, tol)




def marginal_profile(problem: ProblemSpec, u: UtilitySpec, w: WeightingSpec, loss: LossModel,
                     contract: Contract, z) -> np.ndarray:
    """u'(W_Delta - G(z)) T'(z) along a grid, for shape diagnostics."""
    g = QuantileSolution(contract, loss)
    z = np.asarray(z, dtype=float)
    return u.derivative(problem.W_delta - g.value(z)) * w.derivative(z)
