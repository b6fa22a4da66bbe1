"""Linear-utility solver: regimes, thresholds and premium binding."""

import pytest

from rdu_insurance.landmarks import compute_landmarks, f_value
from rdu_insurance.loss_model import Shape
from rdu_insurance.yaari import pi_c, solve_yaari, yaari_pair

from reference_values import K_C, PI_C, YAARI_PI4


def test_pi_c_matches_reference(tk05, loss):
    assert pi_c(tk05, loss, 0.2) == pytest.approx(PI_C, abs=1e-9)


def test_threefold_at_premium_4(problem, tk05, loss):
    sol = solve_yaari(problem(4.0), tk05, loss)
    assert sol.shape is Shape.THREEFOLD
    assert sol.contract.lower == pytest.approx(YAARI_PI4["d"], abs=1e-9)
    assert sol.contract.upper == pytest.approx(YAARI_PI4["e"], abs=1e-9)
    assert sol.lambda_star == pytest.approx(YAARI_PI4["lambda"], abs=1e-9)
    assert sol.diagnostics["f(d)"] == pytest.approx(sol.diagnostics["f(e)"], abs=1e-10)
    assert abs(sol.residuals["premium"]) < 1e-12
    assert sol.thresholds["K_c"] == pytest.approx(K_C, abs=1e-9)


def test_deductible_below_pi_c(problem, tk05, loss):
    sol = solve_yaari(problem(3.0), tk05, loss)
    assert sol.shape is Shape.DEDUCTIBLE
    assert sol.contract.upper >= compute_landmarks(tk05).c
    assert sol.lambda_star == pytest.approx(f_value(tk05, sol.contract.upper))


def test_full_and_no_coverage(problem, tk05, loss):
    assert solve_yaari(problem(5.1), tk05, loss).shape is Shape.FULL
    assert solve_yaari(problem(0.0), tk05, loss).shape is Shape.NO_COVERAGE


def test_pi_c_is_boundary(problem, tk05, loss):
    sol = solve_yaari(problem(pi_c(tk05, loss, 0.2)), tk05, loss)
    assert sol.boundary and sol.shape is Shape.DEDUCTIBLE


@pytest.mark.parametrize("pi", [3.05, 3.5, 4.5, 5.0])
def test_pair_has_equal_tail_ratio(pi, problem, tk05, loss):
    d, e, lam = yaari_pair(tk05, loss, problem(pi).delta)
    cert = compute_landmarks(tk05)
    assert d < cert.a < e < cert.c
    assert f_value(tk05, d) == pytest.approx(lam, abs=1e-10)
    assert f_value(tk05, e) == pytest.approx(lam, abs=1e-10)


def test_thresholds_monotone_in_premium(problem, tk05, loss):
    uppers = [solve_yaari(problem(pi), tk05, loss).contract.upper for pi in (3.1, 3.6, 4.2, 4.8)]
    assert all(x > y for x, y in zip(uppers, uppers[1:]))
