"""Structural points of an inverse-S weighting and the auxiliary functions
that decide which contract shape is optimal.

With f(z) = (1 - T(z)) / (1 - z):

* b minimises T';
* a is the unique root of p(z) = (1 - T(z)) - T'(z)(1 - z) in (0, b), the
  minimiser of f, so f falls on [0, a] and rises on [a, 1);
* c is the fixed point T(c) = c in (a, 1], so f(c) = 1;
* lambda_hat = f(a) < 1.

For concave utility, h_Delta(z) = u'(W_Delta - Q(z)) f(z) z - int_0^z
u'(W_Delta - Q(t)) T'(t) dt has a unique root l_Delta in (a, c); a budget
Delta below K(l_Delta) leads to a threefold contract, otherwise to a
deductible, where K(t) = int_0^t Q + Q(t)(1 - t).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketInvalid, LandmarkNotFound, NoSignChange, OutOfDomain
from .loss_model import LossModel, QuantileSolution, k_of
from .numerics import DEFAULT_TOL, Bracket, Tolerance, find_root, integrate
from .preferences import UtilitySpec, WeightingSpec
from .problem import ProblemSpec

# Upper end used when T has no interior fixed point (c = 1).
C_EDGE = 1.0 - 1e-9
# Right-end window in which T'-weighted integrals subtract the endpoint value.
_SINGULAR_WINDOW = 1e-3


@dataclass(frozen=True)
class LandmarkCertificate:
    b: float
    a: float
    c: float
    lambda_hat: float

    @property
    def c_upper(self) -> float:
        """Largest usable abscissa on the rising branch of f."""
        return self.c if self.c < 1.0 else C_EDGE


def f_curve(w: WeightingSpec, z):
    """Vectorized f(z) = (1 - T(z)) / (1 - z) on [0, 1)."""
    z = np.asarray(z, dtype=float)
    return (1.0 - w.value(z)) / (1.0 - z)


def f_value(w: WeightingSpec, z: float) -> float:
    if not (0.0 <= z < 1.0):
        raise OutOfDomain(f"f is defined on [0, 1), got {z}")
    return float(f_curve(w, z))


def _p(w: WeightingSpec, z):
    return (1.0 - w.value(z)) - w.derivative(z) * (1.0 - z)


@functools.lru_cache(maxsize=256)
def compute_landmarks(w: WeightingSpec, tol: Tolerance = DEFAULT_TOL) -> LandmarkCertificate:
    """Locate b, a, c and lambda_hat for weighting ``w``."""
    grid = np.linspace(0.0, 1.0, 4001)[1:-1]
    d = w.derivative(grid)
    k = int(np.argmin(d))
    if k == 0 or k == len(grid) - 1:
        raise LandmarkNotFound(f"T' has no interior minimum on the scan grid (argmin at z={grid[k]:.4g})")
    try:
        b = find_root(lambda z: float(w.second_derivative(z)),
                      Bracket.of(lambda z: float(w.second_derivative(z)), grid[k - 1], grid[k + 1]), tol)
    except NoSignChange as exc:
        raise LandmarkNotFound(f"b: T'' does not change sign around the T' minimum ({exc})") from exc

    def p(z):
        return float(_p(w, z))

    lo = 1e-12
    try:
        a = find_root(p, Bracket.of(p, lo, b), tol)
    except NoSignChange as exc:
        raise LandmarkNotFound(f"a: p(z) has no sign change on (0, b) ({exc})") from exc
    if not (p(a - 1e-7 * max(a, 1e-6)) <= 0.0 <= p(min(b, a + 1e-7 * max(a, 1e-6)))):
        raise LandmarkNotFound("a: sign re-check around the root failed")

    def fixed(z):
        return float(w.value(z)) - z

    if fixed(a) <= 0:
        raise LandmarkNotFound(f"c: T(a) <= a at a={a:.6g}")
    if fixed(C_EDGE) < 0:
        c = find_root(fixed, Bracket.of(fixed, a, C_EDGE), tol)
    else:
        c = 1.0
    lam = float(f_curve(w, a))
    return LandmarkCertificate(b=b, a=a, c=c, lambda_hat=lam)


def invert_f(w: WeightingSpec, lam: float, branch: str, cert: LandmarkCertificate,
             tol: Tolerance = DEFAULT_TOL) -> float:
    """Solve f(z) = lam on the falling branch [0, a] or the rising branch [a, c]."""
    if branch == "falling":
        lo, hi = 0.0, cert.a
    elif branch == "rising":
        lo, hi = cert.a, cert.c_upper
    else:
        raise ValueError(f"unknown branch {branch!r}")

    def g(z):
        return float(f_curve(w, z)) - lam

    return find_root(g, Bracket.of(g, lo, hi), tol)


def weighted_integral(w: WeightingSpec, phi, lo: float, hi: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Integral of phi(t) T'(t) over [lo, hi] for a smooth vectorized phi.

    Near t = 1 the endpoint value of phi is taken out exactly through the T
    increment, leaving an integrand that vanishes where T' blows up.
    """
    if hi <= lo:
        return 0.0
    if hi > 1.0 - _SINGULAR_WINDOW:
        end = float(phi(np.asarray(hi)))
        rest = integrate(lambda t: (phi(t) - end) * w.derivative(t), lo, hi, tol)
        return end * float(w.value(hi) - w.value(lo)) + rest
    return integrate(lambda t: phi(t) * w.derivative(t), lo, hi, tol)


def marginal_integral(u: UtilitySpec, w: WeightingSpec, G: QuantileSolution, wealth: float,
                      lo: float, hi: float, tol: Tolerance = DEFAULT_TOL, order: int = 1) -> float:
    """Integral over [lo, hi] of u^{(order)}(wealth - G(t)) T'(t), exact where G is flat."""
    fn = {0: u.value, 1: u.derivative}[order]
    lower, upper = G.kinks
    cuts = sorted({lo, hi, *(x for x in (lower, upper) if lo < x < hi)})
    total = 0.0
    for s, e in zip(cuts[:-1], cuts[1:]):
        if e <= s:
            continue
        if e <= lower or s >= upper or lower == upper:
            level = float(G.value(0.5 * (s + e)))
            total += float(fn(wealth - level)) * float(w.value(e) - w.value(s))
        else:
            total += weighted_integral(w, lambda t: fn(wealth - G.value(t)), s, e, tol)
    return total


def n_lambda(problem: ProblemSpec, u: UtilitySpec, w: WeightingSpec, G: QuantileSolution,
             lam: float, z: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """N_lambda(z) = lam (1 - z) - int_z^1 u'(W_Delta - G(t)) T'(t) dt."""
    if not (0.0 <= z <= 1.0):
        raise OutOfDomain(f"z must lie in [0, 1], got {z}")
    if u.is_identity:
        return lam * (1.0 - z) - (1.0 - float(w.value(z)))
    return lam * (1.0 - z) - marginal_integral(u, w, G, problem.W_delta, z, 1.0, tol)


def h_delta(problem: ProblemSpec, u: UtilitySpec, w: WeightingSpec, loss: LossModel, z: float,
            tol: Tolerance = DEFAULT_TOL, wealth: float | None = None) -> float:
    """h_Delta(z) at wealth W_Delta (the problem's own unless ``wealth`` is given)."""
    wd = problem.W_delta if wealth is None else wealth
    if u.is_identity:
        return float(f_curve(w, z)) * z - float(w.value(z))
    head = float(u.derivative(wd - loss.quantile(z))) * float(f_curve(w, z)) * z
    tail = integrate(lambda t: u.derivative(wd - loss.quantile(t)) * w.derivative(t), 0.0, z, tol)
    return head - tail


def find_l_delta(problem: ProblemSpec, u: UtilitySpec, w: WeightingSpec, loss: LossModel,
                 tol: Tolerance = DEFAULT_TOL, wealth: float | None = None) -> float:
    """Unique root of h_Delta in (a, c); equals c for linear utility."""
    cert = compute_landmarks(w, tol)
    if u.is_identity:
        return cert.c
    wd = problem.W_delta if wealth is None else wealth
    scale = float(u.derivative(wd))

    def h(z):
        return h_delta(problem, u, w, loss, z, tol, wd) / scale

    h_a, h_c = h(cert.a), h(cert.c_upper)
    if not (h_a < 0 < h_c):
        raise BracketInvalid(
            f"h_Delta sign conditions fail at wealth {wd:.6g}: h(a)={h_a:.3g}, h(c)={h_c:.3g}")
    return find_root(h, Bracket(cert.a, cert.c_upper, h_a, h_c), tol)


def delta_of_d(d: float, loss: LossModel) -> float:
    """Delta(d) = int_0^d Q + Q(d)(1 - d)."""
    return k_of(d, loss)


def g_value(p: float, problem: ProblemSpec, u: UtilitySpec, w: WeightingSpec, loss: LossModel,
            tol: Tolerance = DEFAULT_TOL) -> float:
    """g(p) = h_{Delta(p)}(p), with wealth W + (1+rho) Delta(p)."""
    return h_delta(problem, u, w, loss, p, tol, wealth=problem.wealth_for(delta_of_d(p, loss)))


@dataclass(frozen=True)
class RduLandmarks:
    l_Delta: float
    K_Delta: float
    l_Delta_a: float
    l_Delta_c: float
    Delta_tilde: float
    Delta_bar: float


def rdu_landmarks(problem: ProblemSpec, u: UtilitySpec, w: WeightingSpec, loss: LossModel,
                  tol: Tolerance = DEFAULT_TOL) -> RduLandmarks:
    cert = compute_landmarks(w, tol)
    l_d = find_l_delta(problem, u, w, loss, tol)
    l_a = find_l_delta(problem, u, w, loss, tol, wealth=problem.wealth_for(delta_of_d(cert.a, loss)))
    l_c = find_l_delta(problem, u, w, loss, tol,
                       wealth=problem.wealth_for(delta_of_d(cert.c_upper, loss)))
    return RduLandmarks(l_Delta=l_d, K_Delta=k_of(l_d, loss), l_Delta_a=l_a, l_Delta_c=l_c,
                        Delta_tilde=k_of(l_a, loss), Delta_bar=k_of(l_c, loss))


def tail_ratio_chord_margin(w: WeightingSpec, z2: float, z1: float) -> float:
    """f(z1) minus the chord slope of T over [z2, z1]; positive for a < z2 < b, z2 < z1 < 1."""
    t1, t2 = float(w.value(z1)), float(w.value(z2))
    return (1.0 - t1) / (1.0 - z1) - (t1 - t2) / (z1 - z2)


def marginal_product(u: UtilitySpec, x: float, z) -> np.ndarray:
    """u'(x + z) u'(x - z); strictly increasing in z on (0, x) for strictly DARA u."""
    z = np.asarray(z, dtype=float)
    return u.derivative(x + z) * u.derivative(x - z)


def lambda_from_flat_level(u: UtilitySpec, w: WeightingSpec, wealth: float, level: float,
                           upper: float) -> float:
    """Multiplier implied by a flat retention ``level`` starting at ``upper``."""
    if upper >= 1.0:
        return math.inf
    return float(u.derivative(wealth - level)) * float(f_curve(w, upper))
