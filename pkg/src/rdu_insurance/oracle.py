"""Independent checks of solver output.

``oracle_solve`` maximizes the RDU objective over retention quantiles that
are piecewise of the form G(z) = G(z_{i-1}) + s_i (Q(z) - Q(z_{i-1})) on a
grid, s_i in [0, 1]. Every such G is feasible. The budget equality is
enforced by bisection on its multiplier; for a fixed multiplier the concave
Lagrangian is maximized over the box of increments.

``check_optimality`` evaluates the variational residual

    N_lambda(z) = lambda (1 - z) - int_z^1 u'(W_Delta - G(t)) T'(t) dt

on a grid for a candidate contract and tests the sign pattern that
characterizes optimality: N <= 0 where G is flat and N >= 0 where G rises
at full slope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize

from .errors import InfeasibleDelta, NonConvergent
from .landmarks import compute_landmarks, lambda_from_flat_level, marginal_integral
from .loss_model import Contract, LossModel, QuantileSolution, Shape
from .numerics import DEFAULT_TOL, Bracket, Tolerance, find_root
from .preferences import UtilitySpec, WeightingSpec
from .problem import ProblemSpec

_GL_X, _GL_W = leggauss(10)


@dataclass(frozen=True)
class DiscretizedProgram:
    """Grid version of the retention-quantile problem.

    ``weights`` are exact T increments per cell, ``cap`` the largest
    increment of G per cell and ``r`` the position of the cell mean of Q
    inside the cell, so the cell mean of G is G(z_{i-1}) + r_i g_i.
    """

    n: int
    z: np.ndarray
    h: np.ndarray
    cap: np.ndarray
    weights: np.ndarray
    r: np.ndarray

    @classmethod
    def build(cls, w: WeightingSpec, loss: LossModel, n: int) -> "DiscretizedProgram":
        if n < 100:
            raise ValueError("grid size must be at least 100")
        z = np.linspace(0.0, 1.0, n + 1)
        if 0.0 < loss.atom0 < 1.0:
            z = np.unique(np.append(z, loss.atom0))
        h = np.diff(z)
        qz = loss.quantile(z)
        cap = np.diff(qz)
        iq = loss.integrated_quantile(z)
        mean_offset = np.diff(iq) / h - qz[:-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(cap > 0, mean_offset / cap, 0.5)
        r = np.clip(r, 0.0, 1.0)
        return cls(len(h), z, h, cap, np.diff(w.value(z)), r)

    def node_values(self, g: np.ndarray) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(g)])

    def cell_means(self, g: np.ndarray) -> np.ndarray:
        return self.node_values(g)[:-1] + self.r * g

    def budget(self, g: np.ndarray) -> float:
        """Exact integral of the piecewise G over [0, 1]."""
        return float(np.sum(self.h * self.cell_means(g)))

    def discrete_objective(self, u: UtilitySpec, wealth: float, g: np.ndarray) -> float:
        return float(np.sum(u.value(wealth - self.cell_means(g)) * self.weights))

    def continuous_objective(self, u: UtilitySpec, w: WeightingSpec, loss: LossModel,
                             wealth: float, g: np.ndarray) -> float:
        """int u(W - G) T' after integrating by parts: u(W - G(1)) + int u'(W - G) G' T."""
        s = np.divide(g, self.cap, out=np.zeros_like(g), where=self.cap > 0)
        nodes = self.node_values(g)
        zl = self.z[:-1, None]
        t = zl + 0.5 * self.h[:, None] * (_GL_X[None, :] + 1.0)
        gz = nodes[:-1, None] + s[:, None] * (loss.quantile(t) - loss.quantile(zl))
        integrand = u.derivative(wealth - gz) * s[:, None] * loss.quantile_derivative(t) * w.value(t)
        cells = (integrand @ _GL_W) * 0.5 * self.h
        return float(u.value(wealth - nodes[-1])) + float(np.sum(cells))


@dataclass
class OracleResult:
    objective: float
    discrete_objective: float
    increments: np.ndarray
    fractions: np.ndarray
    program: DiscretizedProgram
    lambda_star: float
    lambda_trace: list = field(default_factory=list)

    @property
    def G(self) -> np.ndarray:
        """Retention quantile at the grid nodes."""
        return self.program.node_values(self.increments)

    def band(self, threshold: float = 1e-9) -> tuple[float, float]:
        """Quantile levels where G starts and stops rising (0, 0 if G stays at 0)."""
        s = self.fractions
        idx = np.nonzero(s > threshold)[0]
        if len(idx) == 0:
            return 0.0, 0.0
        z, h = self.program.z, self.program.h
        i, j = idx[0], idx[-1]
        lower = z[i + 1] - s[i] * h[i] if i > 0 else 0.0
        upper = z[j] + s[j] * h[j]
        return float(lower), float(upper)


def _inner_lagrangian(prog: DiscretizedProgram, u: UtilitySpec, wealth: float, scale: float):
    base = float(u.value(wealth))

    def neg(s, lam):
        g = s * prog.cap
        gb = prog.cell_means(g)
        val = np.sum((u.value(wealth - gb) - base) * prog.weights) / scale + lam * np.sum(prog.h * gb)
        psi = -u.derivative(wealth - gb) * prog.weights / scale + lam * prog.h
        tail = np.concatenate([np.cumsum(psi[::-1])[::-1][1:], [0.0]])
        grad = (prog.r * psi + tail) * prog.cap
        return -val, -grad

    return neg


def oracle_solve(problem: ProblemSpec, u: UtilitySpec, w: WeightingSpec, loss: LossModel,
                 n: int = 400, tol: Tolerance = DEFAULT_TOL) -> OracleResult:
    """Brute-force grid maximizer of the RDU objective under the budget constraint."""
    prog = DiscretizedProgram.build(w, loss, n)
    wealth = problem.W_delta
    delta = problem.delta
    scale = float(u.derivative(wealth))
    total = float(np.sum(prog.h * prog.cell_means(prog.cap)))

    def result(s, lam, trace):
        g = s * prog.cap
        return OracleResult(prog.continuous_objective(u, w, loss, wealth, g),
                            prog.discrete_objective(u, wealth, g), g, s, prog, lam * scale, trace)

    if delta > total + 1e-12 * (1.0 + total):
        raise InfeasibleDelta(f"retention budget {delta} exceeds the largest feasible {total}")
    if delta <= 0.0:
        return result(np.zeros(prog.n), 0.0, [])
    if delta >= total - 1e-14 * (1.0 + total):
        return result(np.ones(prog.n), math.inf, [])

    if u.is_identity:
        def inner(lam, start):
            psi = lam * prog.h - prog.weights
            tail = np.concatenate([np.cumsum(psi[::-1])[::-1][1:], [0.0]])
            return ((prog.r * psi + tail) > 0).astype(float)
    else:
        neg = _inner_lagrangian(prog, u, wealth, scale)
        bounds = [(0.0, 1.0)] * prog.n

        def inner(lam, start):
            res = minimize(neg, start, args=(lam,), jac=True, method="L-BFGS-B", bounds=bounds,
                           options={"ftol": 1e-16, "gtol": 1e-13, "maxiter": 5000, "maxcor": 30})
            return np.clip(res.x, 0.0, 1.0)

    def budget(s):
        return prog.budget(s * prog.cap)

    trace = []
    lo, s_lo, b_lo = 0.0, np.zeros(prog.n), 0.0
    hi = 2.0
    s_hi = inner(hi, np.ones(prog.n))
    b_hi = budget(s_hi)
    trace.append((hi * scale, b_hi))
    doublings = 0
    while b_hi < delta:
        lo, s_lo, b_lo = hi, s_hi, b_hi
        hi *= 2.0
        s_hi = inner(hi, s_hi)
        b_hi = budget(s_hi)
        trace.append((hi * scale, b_hi))
        doublings += 1
        if doublings > 400:
            raise NonConvergent("could not bracket the budget multiplier")
    for _ in range(200):
        if hi - lo <= 1e-13 * hi or b_hi - b_lo <= 1e-15 * (1.0 + delta):
            break
        mid = 0.5 * (lo + hi)
        s_mid = inner(mid, s_hi)
        b_mid = budget(s_mid)
        trace.append((mid * scale, b_mid))
        if b_mid < delta:
            lo, s_lo, b_lo = mid, s_mid, b_mid
        else:
            hi, s_hi, b_hi = mid, s_mid, b_mid
    t = (delta - b_lo) / (b_hi - b_lo) if b_hi > b_lo else 1.0
    s = np.clip(s_lo + t * (s_hi - s_lo), 0.0, 1.0)
    return result(s, hi, trace)


@dataclass
class OptimalityReport:
    lambda_star: float
    violations: list
    max_violation: float
    tolerance: float
    verdict: bool
    premium_gap: float
    null_measure: float = 0.0

    @property
    def passed(self) -> bool:
        return self.verdict

    def worst(self):
        return max(self.violations, key=lambda v: v[3]) if self.violations else None


def candidate_lambda(problem: ProblemSpec, u: UtilitySpec, w: WeightingSpec, loss: LossModel,
                     contract: Contract, slack: bool, tol: Tolerance = DEFAULT_TOL) -> float:
    """Multiplier implied by the contract's own first-order relation."""
    wealth = problem.W_delta
    if slack:
        return 0.0
    if contract.shape is Shape.FULL:
        return compute_landmarks(w, tol).lambda_hat * float(u.derivative(wealth))
    if contract.shape is Shape.NO_COVERAGE or contract.upper >= 1.0:
        return math.inf
    level = QuantileSolution(contract, loss).level()
    return lambda_from_flat_level(u, w, wealth, level, contract.upper)


def n_profile(problem: ProblemSpec, u: UtilitySpec, w: WeightingSpec, loss: LossModel,
              contract: Contract, lam: float, z: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """N_lambda on an increasing grid z, sharing the tail integrals between points."""
    z = np.asarray(z, dtype=float)
    if u.is_identity:
        return lam * (1.0 - z) - (1.0 - w.value(z))
    g = QuantileSolution(contract, loss)
    cuts = np.unique(np.concatenate([z, [contract.lower, contract.upper, 1.0]]))
    cuts = cuts[(cuts >= z[0]) & (cuts <= 1.0)]
    pieces = np.array([marginal_integral(u, w, g, problem.W_delta, a, b, tol)
                       for a, b in zip(cuts[:-1], cuts[1:])])
    tails = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
    tail_at = dict(zip(cuts.tolist(), tails.tolist()))
    return lam * (1.0 - z) - np.array([tail_at[x] for x in z.tolist()])


def check_optimality(problem: ProblemSpec, u: UtilitySpec, w: WeightingSpec, loss: LossModel,
                     candidate: Contract, tol: Tolerance = DEFAULT_TOL, grid: int = 500) -> OptimalityReport:
    """Sign-pattern test of N_lambda for a candidate contract."""
    g = QuantileSolution(candidate, loss)
    gap = g.integral() - problem.delta
    binding_tol = 1e-8 * (1.0 + loss.mean)
    if gap < -binding_tol:
        return OptimalityReport(math.nan, [(math.nan, math.nan, "premium", -gap)], -gap,
                                binding_tol, False, gap)
    lam = candidate_lambda(problem, u, w, loss, candidate, gap > binding_tol, tol)
    threshold = 1e-6 * (1.0 + (lam if math.isfinite(lam) else 0.0))
    if not math.isfinite(lam):
        # retaining everything is the only feasible choice
        return OptimalityReport(lam, [], 0.0, threshold, True, gap)

    z = (np.arange(grid) + 0.5) / grid
    n_vals = n_profile(problem, u, w, loss, candidate, lam, z, tol)
    rising = (z > candidate.lower) & (z < candidate.upper)
    free = loss.quantile_derivative(z) == 0.0
    severity = np.where(rising, np.maximum(-n_vals, 0.0), np.maximum(n_vals, 0.0))
    severity = np.where(free, 0.0, severity)
    violations = [(float(z[k]), float(n_vals[k]), "cap" if rising[k] else "zero", float(severity[k]))
                  for k in np.nonzero(severity > threshold)[0]]
    max_v = float(np.max(severity)) if len(severity) else 0.0
    null = float(np.mean(np.abs(n_vals) <= threshold))
    return OptimalityReport(lam, violations, max_v, threshold, max_v <= threshold, gap, null)


def perturbed_contract(problem: ProblemSpec, loss: LossModel, contract: Contract,
                       shift: float = 0.05, tol: Tolerance = DEFAULT_TOL) -> Contract:
    """Negative control: move the upper threshold up and re-bind the budget
    by raising the lower threshold."""
    if contract.shape in (Shape.FULL, Shape.NO_COVERAGE):
        return Contract.deductible(0.5)
    new_upper = contract.upper + min(shift, 0.5 * (1.0 - contract.upper))
    delta = problem.delta

    def gap(lower):
        if lower >= new_upper:
            return -delta
        return QuantileSolution(Contract.threefold(lower, new_upper), loss).integral() - delta

    lower = find_root(gap, Bracket.of(gap, contract.lower, new_upper), Tolerance(1e-14, 1e-13, 200))
    return Contract.threefold(lower, new_upper)
