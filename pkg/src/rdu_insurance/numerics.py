"""Numeric kernel: adaptive quadrature, bracketed root finding, monotone inversion.

Integrands are called with numpy arrays of abscissae and must return arrays of
the same shape. Integrable endpoint singularities (such as a weighting
derivative that blows up at 1) are handled by switching a stalled endpoint
panel to the substitution t = end -/+ w*s**2, which removes square-root type
blow-ups.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidInterval, InvalidParameter, NonConvergent, NoSignChange

Integrand = Callable[[np.ndarray], np.ndarray]
ScalarFn = Callable[[float], float]


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_iter: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and math.isfinite(self.abs_tol)):
            raise InvalidParameter(f"abs_tol must be positive, got {self.abs_tol}")
        if not (self.rel_tol > 0 and math.isfinite(self.rel_tol)):
            raise InvalidParameter(f"rel_tol must be positive, got {self.rel_tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise InvalidParameter(f"max_iter must be a positive integer, got {self.max_iter}")

    def scaled(self, factor: float) -> "Tolerance":
        """Same tolerance with both error targets multiplied by ``factor``."""
        return Tolerance(self.abs_tol * factor, self.rel_tol * factor, self.max_iter)


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidInterval(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.f_lo * self.f_hi > 0 or math.isnan(self.f_lo) or math.isnan(self.f_hi):
            raise NoSignChange(
                f"no sign change on [{self.lo:.17g}, {self.hi:.17g}]: "
                f"f(lo)={self.f_lo:.6g}, f(hi)={self.f_hi:.6g}"
            )

    @classmethod
    def of(cls, f: ScalarFn, lo: float, hi: float) -> "Bracket":
        """Evaluate ``f`` at both ends and build the bracket."""
        return cls(lo, hi, float(f(lo)), float(f(hi)))


# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (QUADPACK qk15 values).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5]] = _WG[:3]
_GW[[13, 11, 9]] = _WG[:3]
_GW[7] = _WG[3]

_EPS = np.finfo(float).eps
_UFLOW = np.finfo(float).tiny

# An endpoint panel that keeps being split this many times switches to the
# quadratic substitution; at most this many substitutions are stacked.
_SUBST_DEPTH = 6
_MAX_SUBST = 3


def _gk15(f: Integrand, lo: np.ndarray, hi: np.ndarray):
    """Kronrod estimate and QUADPACK-style error for a batch of panels."""
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = centre[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        raise NonConvergent("integrand returned a non-finite value inside the interval")
    resk = fx @ _KW
    resg = fx @ _GW
    mean = 0.5 * resk
    resabs = np.abs(fx) @ _KW * np.abs(half)
    resasc = np.abs(fx - mean[:, None]) @ _KW * np.abs(half)
    err = np.abs((resk - resg) * half)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    err = np.where(resabs > _UFLOW / (50 * _EPS), np.maximum(50 * _EPS * resabs, err), err)
    return resk * half, err


def _substituted(f: Integrand, lo: float, hi: float, side: str) -> Integrand:
    """Integrand on s in [0, 1] equivalent to ``f`` on [lo, hi] with the
    singular end mapped to s = 0 through a quadratic change of variable."""
    width = hi - lo
    end = hi if side == "right" else lo
    sign = -1.0 if side == "right" else 1.0

    def g(s):
        s = np.asarray(s, dtype=float)
        t = end + sign * width * s * s
        # nodes that round onto the singular end carry negligible weight
        on_end = t == end
        vals = np.asarray(f(np.where(on_end, end + sign * width * 0.5, t)), dtype=float)
        return np.where(on_end, 0.0, vals * (2.0 * width * s))
    return g


def integrate(f: Integrand, lo: float, hi: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Globally adaptive Gauss-Kronrod integral of a vectorized ``f`` over [lo, hi]."""
    lo = float(lo)
    hi = float(hi)
    if lo > hi:
        raise InvalidInterval(f"integration interval has lo > hi: [{lo}, {hi}]")
    if lo == hi:
        return 0.0

    fns: list[Integrand] = [f]
    # heap entries: (-err, seq, a, b, value, err, fn index, singular side, depth, substitutions)
    heap: list = []
    seq = 0

    def push_batch(a, b, fn_id, sides, depths, nsub):
        nonlocal seq
        vals, errs = _gk15(fns[fn_id], np.asarray(a, float), np.asarray(b, float))
        for i in range(len(a)):
            heapq.heappush(heap, (-errs[i], seq, a[i], b[i], vals[i], errs[i],
                                  fn_id, sides[i], depths[i], nsub))
            seq += 1

    push_batch([lo], [hi], 0, ["both"], [0], 0)
    splits = 0
    while True:
        total = math.fsum(e[4] for e in heap)
        err = math.fsum(e[5] for e in heap)
        if err <= max(tol.abs_tol, tol.rel_tol * abs(total)):
            return total
        if splits >= tol.max_iter:
            raise NonConvergent(
                f"quadrature on [{lo}, {hi}] stopped at error {err:.3g} after {splits} subdivisions"
            )
        _, _, a, b, _, _, fn_id, side, depth, nsub = heapq.heappop(heap)
        splits += 1
        if side in ("left", "right") and depth >= _SUBST_DEPTH and nsub < _MAX_SUBST:
            fns.append(_substituted(fns[fn_id], a, b, side))
            # after substitution the singular end sits at s = 0
            push_batch([0.0], [1.0], len(fns) - 1, ["left"], [0], nsub + 1)
            continue
        mid = 0.5 * (a + b)
        if side == "both":
            sides = ["left", "right"]
        elif side == "left":
            sides = ["left", None]
        elif side == "right":
            sides = [None, "right"]
        else:
            sides = [None, None]
        push_batch([a, mid], [mid, b], fn_id, sides, [depth + 1, depth + 1], nsub)


def integrate_pieces(f: Integrand, points, tol: Tolerance = DEFAULT_TOL) -> float:
    """Sum of ``integrate`` over consecutive breakpoints (kinks of the integrand)."""
    pts = sorted(float(p) for p in points)
    return math.fsum(integrate(f, a, b, tol) for a, b in zip(pts[:-1], pts[1:]) if b > a)


def find_root(f: ScalarFn, bracket: Bracket, tol: Tolerance = DEFAULT_TOL) -> float:
    """Root of ``f`` inside ``bracket`` by Brent's bracketed method."""
    if bracket.f_lo == 0.0:
        return bracket.lo
    if bracket.f_hi == 0.0:
        return bracket.hi
    try:
        root, info = brentq(f, bracket.lo, bracket.hi, xtol=tol.abs_tol, rtol=4 * _EPS,
                            maxiter=max(tol.max_iter, 100), full_output=True, disp=False)
    except ValueError as exc:
        raise NoSignChange(str(exc)) from exc
    if not info.converged:
        raise NonConvergent(f"root finding did not converge: {info.flag}")
    return min(max(root, bracket.lo), bracket.hi)


def invert_monotone(f: ScalarFn, y: float, lo: float, hi: float,
                    tol: Tolerance = DEFAULT_TOL) -> float:
    """Solve f(x) = y for monotone ``f`` on [lo, hi]."""
    def g(x):
        return f(x) - y
    return find_root(g, Bracket.of(g, lo, hi), tol)


def scan_bracket(f: ScalarFn, lo: float, hi: float, n: int) -> Bracket:
    """First sign change of ``f`` on an n-point uniform scan of [lo, hi]."""
    xs = np.linspace(lo, hi, n)
    prev_x, prev_f = xs[0], float(f(xs[0]))
    if prev_f == 0.0:
        return Bracket(prev_x, xs[1], prev_f, float(f(xs[1])))
    for x in xs[1:]:
        fx = float(f(x))
        if prev_f * fx <= 0:
            return Bracket(prev_x, x, prev_f, fx)
        prev_x, prev_f = x, fx
    raise NoSignChange(f"no sign change found scanning [{lo}, {hi}] with {n} points")
