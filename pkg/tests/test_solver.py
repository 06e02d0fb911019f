import json
import math

import pytest

from game.errors import ContractViolation
from game.model import Mechanism, eval_payoff
from game.solver import (
    EquilibriumReport,
    best_response,
    compare_mechanisms,
    search_grid,
    solve,
    sweep,
    verify_nash,
)


def test_search_grid():
    assert search_grid(10, 3) == (0, 3, 6, 9, 10)
    assert search_grid(10, 3, include_zero=False) == (3, 6, 9, 10)
    assert search_grid(0, 5) == (0,)
    assert search_grid(4, 10) == (0, 4)
    assert search_grid(5, 1) == (0, 1, 2, 3, 4, 5)


def test_best_response_in_sqrt_game(sqrt_game):
    spec = sqrt_game()
    assert best_response(spec, (0,), 0) == 4
    assert best_response(spec, (10,), 0) == 4


def test_best_response_free_rides_when_cost_dominates(make_spec):
    spec = make_spec([0.0, 0.0], [10, 10], [100.0, 0.1])
    assert best_response(spec, (5, 5), 0) == 0
    no_zero = make_spec([0.0, 0.0], [10, 10], [100.0, 0.1], solver={"grid_step": 1, "include_zero": False})
    assert best_response(no_zero, (5, 5), 0) == 1


def test_best_response_breaks_ties_toward_smaller(make_spec):
    # U(s) = s - 1.0 * s = 0 for every s
    spec = make_spec(
        [0.0], [6], [1.0],
        accuracy={"variant": "stub", "form": "additive", "weights": [1.0], "baseline": 0.0, "clamp": False},
        profit={"beta1": 0.0, "linear": 1.0},
    )
    assert best_response(spec, (3,), 0) == 0
    no_zero = make_spec(
        [0.0], [6], [1.0],
        accuracy={"variant": "stub", "form": "additive", "weights": [1.0], "baseline": 0.0, "clamp": False},
        profit={"beta1": 0.0, "linear": 1.0},
        solver={"grid_step": 2, "include_zero": False},
    )
    assert best_response(no_zero, (3,), 0) == 2


def test_best_response_never_loses_payoff(make_spec):
    spec = make_spec([0.1, 0.0, 0.2], [30, 30, 30], [0.002, 0.003, 0.001], mechanism="LOO")
    s = (10, 20, 5)
    for n in range(3):
        br = best_response(spec, s, n)
        moved = s[:n] + (br,) + s[n + 1:]
        for candidate in search_grid(30, 1):
            trial = s[:n] + (candidate,) + s[n + 1:]
            assert eval_payoff(spec, moved, n) >= eval_payoff(spec, trial, n)


def test_solve_single_client_from_any_start(sqrt_game):
    for start in (0, 3, 10):
        report = solve(sqrt_game(initial=[start]))
        assert report.final == (4,)
        assert report.converged
        assert report.verdict.is_nash


def test_solve_from_fixed_point_takes_one_iteration(sqrt_game):
    report = solve(sqrt_game(initial=[4]))
    assert report.iterations == 1
    assert report.trajectory == ((4,), (4,))


def test_solve_from_capacity(sqrt_game):
    report = solve(sqrt_game())
    assert report.trajectory == ((10,), (4,), (4,))
    assert report.iterations == 2
    assert report.payoffs == pytest.approx((2.0,))
    assert report.shares == (1.0,)
    assert len(report.trajectory_payoffs) == len(report.trajectory)


def test_jacobi_cycle_is_reported_not_raised(cycling_game):
    report = solve(cycling_game(max_iters=5))
    assert not report.converged
    assert report.iterations == 5
    assert len(report.trajectory) == 6
    assert report.trajectory[:3] == ((1, 1), (0, 0), (1, 1))


def test_gauss_seidel_settles_the_cycling_game(cycling_game):
    report = solve(cycling_game(scheme="gauss_seidel", max_iters=5))
    assert report.converged
    assert report.final == (0, 1)
    assert report.verdict.is_nash


def test_symmetric_clients_reach_symmetric_profile(make_spec):
    spec = make_spec([0.1] * 3, [20] * 3, [0.05] * 3, mechanism="EG", solver={"grid_step": 1, "max_iters": 30})
    report = solve(spec)
    assert len(set(report.final)) == 1
    assert report.shares == pytest.approx((1 / 3,) * 3)


def test_verify_nash_in_sqrt_game(sqrt_game):
    spec = sqrt_game()
    assert verify_nash(spec, (4,)).is_nash
    verdict = verify_nash(spec, (3,))
    assert not verdict.is_nash
    assert verdict.client == 1
    assert verdict.deviation == 4
    assert verdict.gain == pytest.approx(2.0 - (2.0 * math.sqrt(3.0) - 1.5))


def test_verify_nash_without_profit_requires_zero_contribution(make_spec):
    spec = make_spec([0.0, 0.0], [3, 3], [0.2, 0.4], profit={"beta1": 0.0, "beta2": 0.0})
    assert verify_nash(spec, (0, 0)).is_nash
    assert not verify_nash(spec, (1, 0)).is_nash
    assert not verify_nash(spec, (0, 3)).is_nash


def test_verify_nash_with_no_alternatives(make_spec):
    spec = make_spec([0.0], [0], [0.1])
    verdict = verify_nash(spec, (0,))
    assert verdict.is_nash
    assert verdict.gain == 0.0
    assert verdict.client is None


def test_verify_nash_agrees_with_cycling_game(cycling_game):
    spec = cycling_game()
    assert verify_nash(spec, (0, 1)).is_nash
    assert verify_nash(spec, (1, 0)).is_nash
    assert not verify_nash(spec, (1, 1)).is_nash


def test_report_round_trips_through_json(make_spec):
    report = solve(make_spec([0.1, 0.0], [15, 15], [0.01, 0.02], mechanism="SV"))
    restored = EquilibriumReport.from_dict(json.loads(json.dumps(report.to_dict())))
    assert restored == report


def test_solve_is_deterministic(make_spec):
    spec = make_spec([0.1, 0.3, 0.0], [25, 25, 25], [0.004, 0.002, 0.003], mechanism="LOO")
    assert solve(spec) == solve(spec)


def test_privacy_sweep_on_single_client(make_spec):
    spec = make_spec([0.0], [100], [0.001], profit={"beta1": 1.0})
    points = sweep(spec, "mu", [1], [0.0001, 0.001, 0.003, 0.01])
    finals = [p.report.final[0] for p in points]
    assert finals == sorted(finals, reverse=True)
    assert [p.value for p in points] == [0.0001, 0.001, 0.003, 0.01]


def test_capacity_sweep_on_single_client(make_spec):
    spec = make_spec([0.0], [100], [0.001], profit={"beta1": 1.0})
    points = sweep(spec, "capacity", [1], [10, 100, 200])
    finals = [p.report.final[0] for p in points]
    assert finals == sorted(finals)


def test_eg_shares_stay_equal_along_quality_sweep(make_spec):
    spec = make_spec([0.0] * 4, [20] * 4, [0.01] * 4, mechanism="EG", accuracy={
        "variant": "surrogate", "alpha": [0.1, 0.01, 1.0, 0.0, 0.35], "gamma": 0.3, "baseline": 0.1,
    })
    for point in sweep(spec, "epsilon", [1, 2], [0.0, 0.25, 0.5]):
        assert point.report.shares == pytest.approx((0.25,) * 4)


def test_sweep_records_failures_and_continues(make_spec):
    spec = make_spec([0.0, 0.0], [10, 10], [0.01, 0.01])
    points = sweep(spec, "epsilon", [1], [0.1, 1.5, 0.2])
    assert points[0].report is not None and points[2].report is not None
    assert points[1].report is None
    assert "epsilon" in points[1].error


def test_sweep_rejects_unknown_parameter(make_spec):
    spec = make_spec([0.0], [10], [0.01])
    with pytest.raises(ContractViolation):
        sweep(spec, "beta", [1], [0.1])


def test_sweep_results_do_not_depend_on_n_jobs(make_spec):
    spec = make_spec([0.1, 0.0], [20, 20], [0.003, 0.003])
    serial = sweep(spec, "mu", [1], [0.001, 0.005, 0.02], n_jobs=1)
    parallel = sweep(spec, "mu", [1], [0.001, 0.005, 0.02], n_jobs=2)
    assert [p.report for p in serial] == [p.report for p in parallel]


def test_compare_mechanisms_covers_all_four(make_spec):
    spec = make_spec([0.3, 0.0, 0.0], [15, 15, 15], [0.004, 0.004, 0.004])
    outcomes = compare_mechanisms(spec)
    assert [m for m, _ in outcomes] == [Mechanism.EG, Mechanism.LP, Mechanism.LOO, Mechanism.SV]
    for mechanism, report in outcomes:
        assert report.mechanism is mechanism
        assert sum(report.shares) == pytest.approx(1.0)
