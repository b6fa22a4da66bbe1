"""Optimal contracts for a linear-utility (Yaari dual theory) buyer.

With K_c = K(c) and pi_c = (1+rho)(E[X] - K_c):

* pi >= (1+rho)E[X]: full insurance;
* pi_c < pi < (1+rho)E[X]: threefold contract with thresholds d < a < e
  solving f(d) = f(e) and binding the premium;
* pi <= pi_c: deductible at level q >= c binding the premium.
"""

from __future__ import annotations

import math

from .errors import InfeasibleDelta, SolverFailed
from .landmarks import LandmarkCertificate, compute_landmarks, f_value, invert_f
from .loss_model import Contract, LossModel, QuantileSolution, k_of
from .numerics import DEFAULT_TOL, Bracket, Tolerance, find_root
from .preferences import WeightingSpec
from .problem import ProblemSpec
from .solution import Solution, boundary_band

METHOD = "yaari"


def pi_c(w: WeightingSpec, loss: LossModel, rho: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Premium below which the linear-utility optimum is a deductible."""
    cert = compute_landmarks(w, tol)
    kc = loss.mean if cert.c >= 1.0 else k_of(cert.c, loss)
    return (1.0 + rho) * (loss.mean - kc)


def yaari_pair(w: WeightingSpec, loss: LossModel, delta: float, tol: Tolerance = DEFAULT_TOL,
               lam_bracket: tuple[float, float] | None = None) -> tuple[float, float, float]:
    """(d, e, lambda) with f(d) = f(e) = lambda and retention budget ``delta``.

    The budget of the pair grows continuously from 0 at lambda_hat to K_c at 1,
    so the multiplier is found by bracketed root finding on that map.
    ``lam_bracket`` optionally narrows the starting bracket; it is widened to
    the full range when it does not straddle the root.
    """
    cert = compute_landmarks(w, tol)
    lo_full, hi_full = cert.lambda_hat, 1.0
    # the pair moves like sqrt(lambda - lambda_hat), so solve tightly
    tol = Tolerance(min(tol.abs_tol, 1e-15), tol.rel_tol, tol.max_iter)

    def pair(lam):
        d = invert_f(w, lam, "falling", cert, tol)
        e = invert_f(w, lam, "rising", cert, tol)
        return d, e

    def budget_gap(lam):
        d, e = pair(lam)
        if e <= d:
            return -delta
        return QuantileSolution(Contract.threefold(d, e), loss).integral() - delta

    bracket = None
    if lam_bracket is not None:
        lo, hi = max(lam_bracket[0], lo_full), min(lam_bracket[1], hi_full)
        if lo < hi:
            g_lo, g_hi = budget_gap(lo), budget_gap(hi)
            if g_lo * g_hi <= 0:
                bracket = Bracket(lo, hi, g_lo, g_hi)
    if bracket is None:
        g_hi = budget_gap(hi_full)
        if -1e-12 * (1.0 + delta) <= g_hi <= 0.0:
            # budget equals K_c to round-off: the pair is (0, c)
            return 0.0, min(cert.c, 1.0), 1.0
        bracket = Bracket(lo_full, hi_full, budget_gap(lo_full), g_hi)
    lam = find_root(budget_gap, bracket, tol)
    d, e = pair(lam)
    return d, e, lam


def yaari_deductible(w: WeightingSpec, loss: LossModel, delta: float,
                     tol: Tolerance = DEFAULT_TOL) -> float:
    """Deductible level q >= c whose retention budget equals ``delta``."""
    cert = compute_landmarks(w, tol)
    tol = Tolerance(min(tol.abs_tol, 1e-14), tol.rel_tol, tol.max_iter)

    def gap(q):
        return k_of(q, loss) - delta

    lo = min(cert.c, 1.0)
    g_lo = gap(lo)
    if 0.0 <= g_lo <= 1e-12 * (1.0 + delta):
        # budget equals K_c to round-off
        return lo
    return find_root(gap, Bracket(lo, 1.0, g_lo, gap(1.0)), tol)


def solve_yaari(problem: ProblemSpec, w: WeightingSpec, loss: LossModel,
                tol: Tolerance = DEFAULT_TOL,
                lam_bracket: tuple[float, float] | None = None) -> Solution:
    cert: LandmarkCertificate = compute_landmarks(w, tol)
    delta = problem.delta
    band = boundary_band(problem)
    kc = loss.mean if cert.c >= 1.0 else k_of(cert.c, loss)
    pic = problem.premium_for(kc)
    thresholds = {"pi_c": pic, "K_c": kc, "full_cover_premium": problem.full_cover_premium}

    def done(contract, lam, diagnostics=None, boundary=False):
        g = QuantileSolution(contract, loss)
        residuals = {"premium": g.integral() - delta}
        return Solution(contract, problem, METHOD, lam, cert, thresholds, residuals,
                        diagnostics or {}, boundary)

    if delta > loss.mean * (1 + 1e-12) + band:
        raise InfeasibleDelta(f"retention budget {delta} exceeds E[X]={loss.mean}")
    if problem.pi >= problem.full_cover_premium - band:
        lam = cert.lambda_hat if abs(delta) <= band else 0.0
        return done(Contract.full(), lam, boundary=abs(delta) <= band)
    if problem.pi <= band and delta >= loss.mean - band:
        return done(Contract.no_coverage(), math.inf)

    if abs(problem.pi - pic) <= band:
        return done(Contract.deductible(min(cert.c, 1.0)), 1.0, {"f(d)": 1.0, "f(e)": 1.0}, True)

    if problem.pi > pic:
        d, e, lam = yaari_pair(w, loss, delta, tol, lam_bracket)
        fd, fe = f_value(w, d), f_value(w, e)
        contract = Contract.deductible(e) if d == 0.0 else Contract.threefold(d, e)
        sol = done(contract, fe, {"f(d)": fd, "f(e)": fe, "lambda": lam})
    else:
        q = yaari_deductible(w, loss, delta, tol)
        if q >= 1.0:
            return done(Contract.no_coverage(), math.inf)
        sol = done(Contract.deductible(q), f_value(w, q), {"f(q)": f_value(w, q)})

    if abs(sol.residuals["premium"]) > 1e-8 * (1.0 + loss.mean):
        raise SolverFailed("premium constraint does not bind", sol.residuals)
    return sol
