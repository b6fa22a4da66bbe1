"""Weighting and utility families, Arrow-Pratt measures and validators."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rdu_insurance.errors import InvalidParameter, OutOfDomain
from rdu_insurance.preferences import (ARAClass, UtilitySpec, WeightingSpec, ara_report,
                                       arrow_pratt, validate_utility, validate_weighting)


def _numeric_derivative(f, z, h=1e-6):
    return (f(z + h) - f(z - h)) / (2 * h)


def test_tk_endpoints_and_rejects_bad_theta():
    w = WeightingSpec.tversky_kahneman(0.5)
    assert w.value(0.0) == 0.0 and w.value(1.0) == pytest.approx(1.0, abs=1e-15)
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(InvalidParameter):
            WeightingSpec.tversky_kahneman(bad)


@pytest.mark.parametrize("theta", [0.3, 0.5, 0.8])
def test_tk_derivatives_match_finite_differences(theta):
    w = WeightingSpec.tversky_kahneman(theta)
    z = np.linspace(0.05, 0.95, 19)
    assert np.allclose(w.derivative(z), _numeric_derivative(w.value, z), rtol=1e-6)
    assert np.allclose(w.second_derivative(z), _numeric_derivative(w.derivative, z), rtol=1e-5, atol=1e-6)


def test_tk_closed_form_at_half():
    # T(1/2) = 2^{-1/theta} / (2 * 2^{-1})^{1/theta} ... direct form
    theta = 0.5
    w = WeightingSpec.tversky_kahneman(theta)
    expected = 0.5 ** theta / (2 * 0.5 ** theta) ** (1 / theta)
    assert w.value(0.5) == pytest.approx(expected, rel=1e-14)


def test_weighting_arrow_pratt():
    w = WeightingSpec.tversky_kahneman(0.5)
    z = np.array([0.1, 0.3, 0.7])
    assert np.allclose(w.arrow_pratt(z), -w.second_derivative(z) / w.derivative(z), rtol=1e-12)


def test_validate_weighting_pass_and_fail():
    assert validate_weighting(WeightingSpec.tversky_kahneman(0.5)).passed
    rep = validate_weighting(WeightingSpec.tversky_kahneman(0.2))
    assert not rep.passed
    assert not rep.clause("T strictly increasing").passed
    assert all(line.startswith(("[PASS]", "[FAIL]", "[WARN]")) for line in rep.lines())


def test_user_defined_weighting_is_checked():
    w = WeightingSpec.user_defined(lambda z: np.asarray(z) ** 2, lambda z: 2 * np.asarray(z),
                                   lambda z: 2 + 0 * np.asarray(z))
    rep = validate_weighting(w)
    assert not rep.passed  # convex T has no interior minimum of T'


def test_utility_families():
    e = UtilitySpec.exponential(0.02)
    assert e.value(0.0) == pytest.approx(0.0) and e.derivative(0.0) == pytest.approx(0.02)
    assert arrow_pratt(e, np.array([1.0, 5.0])) == pytest.approx([0.02, 0.02])
    assert e.ara_class is ARAClass.CONSTANT
    lg = UtilitySpec.log()
    assert arrow_pratt(lg, 4.0) == pytest.approx(0.25)
    assert lg.ara_class is ARAClass.DECREASING
    with pytest.raises(OutOfDomain):
        lg.value(-1.0)
    with pytest.raises(InvalidParameter):
        UtilitySpec.exponential(0.0)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["exp", "log", "pow", "id"]), st.floats(0.5, 30.0))
def test_utility_inverse_roundtrip(kind, x):
    u = {"exp": UtilitySpec.exponential(0.05), "log": UtilitySpec.log(),
         "pow": UtilitySpec.power(0.5), "id": UtilitySpec.identity()}[kind]
    assert float(u.inverse(u.value(x))) == pytest.approx(x, rel=1e-10)


def test_ara_report_and_validate_utility():
    rep = ara_report(UtilitySpec.power(0.5), 1.0, 10.0)
    assert rep.classification is ARAClass.DECREASING and rep.monotone_decreasing
    assert validate_utility(UtilitySpec.exponential(0.02), -10.0, 15.0).passed
    assert not validate_utility(UtilitySpec.log(), -1.0, 5.0).passed
