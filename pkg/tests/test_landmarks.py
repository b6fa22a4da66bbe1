"""Weighting landmarks a, b, c, the tail ratio f and the l_Delta split point."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rdu_insurance.errors import LandmarkNotFound, OutOfDomain
from rdu_insurance.landmarks import (compute_landmarks, f_curve, f_value, find_l_delta, h_delta,
                                     invert_f, marginal_product, rdu_landmarks, tail_ratio_chord_margin,
                                     weighted_integral)
from rdu_insurance.preferences import UtilitySpec, WeightingSpec

from reference_values import CARA_L, LANDMARKS


@pytest.mark.parametrize("theta", sorted(LANDMARKS))
def test_landmarks_match_high_precision_reference(theta):
    cert = compute_landmarks(WeightingSpec.tversky_kahneman(theta))
    ref = LANDMARKS[theta]
    assert cert.a == pytest.approx(ref["a"], abs=1e-9)
    assert cert.b == pytest.approx(ref["b"], abs=1e-9)
    assert cert.c == pytest.approx(ref["c"], abs=1e-9)
    assert cert.lambda_hat == pytest.approx(ref["lambda_hat"], abs=1e-9)


def test_landmark_defining_equations(tk05):
    cert = compute_landmarks(tk05)
    a, b, c = cert.a, cert.b, cert.c
    assert abs(float(tk05.second_derivative(b))) < 1e-6
    assert float(tk05.derivative(a)) == pytest.approx(f_value(tk05, a), rel=1e-9)
    assert float(tk05.value(c)) == pytest.approx(c, abs=1e-10)
    assert 0 < a < b < 1 and a < c


def test_f_curve_endpoints(tk05):
    assert f_value(tk05, 0.0) == 1.0
    assert f_value(tk05, 1 - 1e-9) > 10
    with pytest.raises(OutOfDomain):
        f_value(tk05, 1.0)


def test_invert_f_branches(tk05):
    cert = compute_landmarks(tk05)
    lam = 0.5 * (cert.lambda_hat + 1.0)
    d = invert_f(tk05, lam, "falling", cert)
    e = invert_f(tk05, lam, "rising", cert)
    assert 0 < d < cert.a < e < cert.c
    assert f_value(tk05, d) == pytest.approx(lam, abs=1e-10)
    assert f_value(tk05, e) == pytest.approx(lam, abs=1e-10)


def test_weighted_integral_of_constant_is_t_increment(tk05):
    assert weighted_integral(tk05, lambda t: 0 * t + 1.0, 0.2, 1.0) == pytest.approx(1 - float(tk05.value(0.2)), abs=1e-12)


def test_weighting_without_landmarks_raises():
    w = WeightingSpec.user_defined(lambda z: np.asarray(z) ** 2, lambda z: 2 * np.asarray(z),
                                   lambda z: 2 + 0 * np.asarray(z))
    with pytest.raises(LandmarkNotFound):
        compute_landmarks(w)


def test_l_delta_cara_matches_reference(problem, cara, tk05, loss):
    assert find_l_delta(problem(3.0), cara, tk05, loss) == pytest.approx(CARA_L, abs=1e-9)
    # independent of the premium under constant absolute risk aversion
    assert find_l_delta(problem(4.0), cara, tk05, loss) == pytest.approx(CARA_L, abs=1e-9)


def test_l_delta_linear_is_c(problem, linear, tk05, loss):
    assert find_l_delta(problem(3.0), linear, tk05, loss) == compute_landmarks(tk05).c


def test_h_delta_sign_pattern(problem, cara, tk05, loss):
    cert = compute_landmarks(tk05)
    p = problem(3.0)
    assert h_delta(p, cara, tk05, loss, cert.a) < 0 < h_delta(p, cara, tk05, loss, cert.c)


def test_dara_split_points_ordered(loss, tk05, log_u):
    from rdu_insurance import ProblemSpec
    rl = rdu_landmarks(ProblemSpec.for_loss(20.0, 3.0, 0.2, loss), log_u, tk05, loss)
    cert = compute_landmarks(tk05)
    assert cert.a < rl.l_Delta_a < rl.l_Delta_c < cert.c
    assert rl.Delta_tilde < rl.Delta_bar


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 1.0 - 1e-6), st.floats(1e-6, 1.0 - 1e-6))
def test_chord_below_tail_ratio(s, t):
    # separations below ~1e-6 are not resolvable by the difference quotient in doubles
    w = WeightingSpec.tversky_kahneman(0.5)
    cert = compute_landmarks(w)
    z2 = cert.a + s * (cert.b - cert.a)
    z1 = z2 + t * (1.0 - z2)
    assert tail_ratio_chord_margin(w, z2, z1) > 0


@settings(max_examples=100, deadline=None)
@given(st.floats(1.0, 50.0), st.floats(0.01, 0.98))
def test_marginal_product_increasing_for_decreasing_ara(x, frac):
    u = UtilitySpec.log()
    z = np.array([frac, frac + 0.01]) * x
    q = marginal_product(u, x, z)
    assert q[1] > q[0]
