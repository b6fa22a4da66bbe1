"""Concave-utility solver: CARA and DARA dispatch, thresholds, residuals."""

import pytest

from rdu_insurance import ProblemSpec
from rdu_insurance.errors import AssumptionViolated, UnsupportedARAClass
from rdu_insurance.loss_model import Shape
from rdu_insurance.preferences import ARAClass, UtilitySpec
from rdu_insurance.rdu import classify_by_k_delta, contract_objective, solve, solve_rdu

from reference_values import (CARA_K, CARA_L, CARA_PI3_DEDUCTIBLE, CARA_PI3_DEDUCTIBLE_LOSS,
                              CARA_PI4, CARA_PI_HAT)


def test_cara_thresholds(problem, cara, tk05, loss):
    sol = solve_rdu(problem(3.0), cara, tk05, loss)
    assert sol.thresholds["l"] == pytest.approx(CARA_L, abs=1e-9)
    assert sol.thresholds["K"] == pytest.approx(CARA_K, abs=1e-9)
    assert sol.thresholds["pi_hat"] == pytest.approx(CARA_PI_HAT, abs=1e-8)


def test_cara_deductible_at_premium_3(problem, cara, tk05, loss):
    sol = solve_rdu(problem(3.0), cara, tk05, loss)
    assert sol.shape is Shape.DEDUCTIBLE
    assert sol.contract.upper == pytest.approx(CARA_PI3_DEDUCTIBLE, abs=1e-10)
    assert sol.contract.breakpoints(loss)[1] == pytest.approx(CARA_PI3_DEDUCTIBLE_LOSS, abs=1e-9)
    assert abs(sol.residuals["premium"]) < 1e-12


def test_cara_threefold_at_premium_4(problem, cara, tk05, loss):
    sol = solve_rdu(problem(4.0), cara, tk05, loss)
    assert sol.shape is Shape.THREEFOLD
    assert sol.contract.lower == pytest.approx(CARA_PI4["z2"], abs=1e-9)
    assert sol.contract.upper == pytest.approx(CARA_PI4["z1"], abs=1e-9)
    assert abs(sol.residuals["inner"]) < 1e-10


@pytest.mark.parametrize("pi", [0.5, 2.0, 3.0, 3.1, 3.5, 4.5, 5.0])
def test_cara_dispatch_matches_direct_classification(pi, problem, cara, tk05, loss):
    p = problem(pi)
    assert solve_rdu(p, cara, tk05, loss).regime == classify_by_k_delta(p, cara, tk05, loss)


@pytest.mark.parametrize("pi", [1.0, 3.0, 3.2, 3.205, 3.5, 4.5])
def test_dara_dispatch(pi, loss, log_u, tk05):
    p = ProblemSpec.for_loss(20.0, pi, 0.2, loss)
    sol = solve_rdu(p, log_u, tk05, loss)
    assert sol.method == "rdu_dara"
    assert sol.regime == classify_by_k_delta(p, log_u, tk05, loss)
    assert abs(sol.residuals["premium"]) < 1e-10


def test_full_coverage_above_full_price(problem, cara, tk05, loss):
    assert solve_rdu(problem(5.1), cara, tk05, loss).shape is Shape.FULL


def test_dispatch_routes_identity_to_linear_solver(problem, linear, tk05, loss):
    assert solve(problem(4.0), linear, tk05, loss).method == "yaari"


def test_unsupported_ara_class(problem, tk05, loss):
    import numpy as np
    u = UtilitySpec.user_defined(lambda x: -np.exp(-x * x), lambda x: 2 * x * np.exp(-x * x),
                                 lambda x: (2 - 4 * x * x) * np.exp(-x * x), ARAClass.OTHER)
    with pytest.raises(UnsupportedARAClass):
        solve_rdu(problem(3.0), u, tk05, loss)


def test_log_utility_needs_positive_wealth(loss, log_u, tk05):
    with pytest.raises(AssumptionViolated):
        solve_rdu(ProblemSpec.for_loss(12.0, 3.0, 0.2, loss), log_u, tk05, loss)


def test_solver_beats_feasible_alternatives(problem, cara, tk05, loss):
    from rdu_insurance.oracle import perturbed_contract
    p = problem(4.0)
    sol = solve_rdu(p, cara, tk05, loss)
    best = contract_objective(p, cara, tk05, loss, sol.contract)
    for shift in (0.01, 0.05, 0.2):
        alt = perturbed_contract(p, loss, sol.contract, shift)
        assert contract_objective(p, cara, tk05, loss, alt) < best
