import itertools

import numpy as np
import pytest

from game.mechanisms import index_loo, index_sv, shares
from game.model import CachedAccuracy, eval_accuracy, eval_payoff
from game.solver import search_grid, solve, sweep, verify_nash

pytestmark = pytest.mark.slow


def payoff_table(spec):
    grids = [search_grid(c.capacity, step, spec.solver.include_zero) for c, step in zip(spec.clients, spec.steps())]
    table = {}
    for profile in itertools.product(*grids):
        table[profile] = tuple(eval_payoff(spec, profile, n) for n in range(spec.n_clients))
    return grids, table


def is_nash_by_table(grids, table, profile, tolerance):
    for n, grid in enumerate(grids):
        for alt in grid:
            moved = profile[:n] + (alt,) + profile[n + 1:]
            if table[moved][n] - table[profile][n] > tolerance:
                return False
    return True


@pytest.mark.parametrize("mechanism", ["EG", "LP", "LOO", "SV"])
def test_verify_agrees_with_exhaustive_search(make_spec, mechanism):
    rng = np.random.default_rng({"EG": 1, "LP": 2, "LOO": 3, "SV": 4}[mechanism])
    for _ in range(3):
        spec = make_spec(
            [float(e) for e in rng.uniform(0.0, 0.4, 3)], [12, 12, 12],
            [float(m) for m in rng.uniform(0.0005, 0.01, 3)],
            mechanism=mechanism,
            profit={"beta1": 1.0},
            solver={"grid_step": 3},
        )
        grids, table = payoff_table(spec)
        tolerance = spec.solver.tolerance
        for profile in table:
            assert verify_nash(spec, profile).is_nash == is_nash_by_table(grids, table, profile, tolerance)
        report = solve(spec)
        if report.converged:
            assert is_nash_by_table(grids, table, report.final, tolerance)


def test_sv_shares_sum_to_one_for_contributing_coalitions(make_spec):
    rng = np.random.default_rng(9)
    spec = make_spec([0.1, 0.0, 0.2, 0.05], [30] * 4, [0.01] * 4, mechanism="SV")
    acc = CachedAccuracy(spec)
    for _ in range(20):
        profile = tuple(int(v) for v in rng.integers(1, 31, 4))
        result = shares(index_sv(spec, profile, acc))
        assert sum(result.shares) == pytest.approx(1.0)
        assert all(g >= 0.0 for g in result.shares)


def symmetric_table(rng, n_clients):
    """Coalition table where clients 1 and 2 are interchangeable and client N adds nothing."""
    values = {}
    table = {}
    for mask in range(1, 1 << n_clients):
        members = [i + 1 for i in range(n_clients) if mask >> i & 1]
        rest = tuple(m for m in members if m not in (1, 2, n_clients))
        pair = sum(1 for m in members if m in (1, 2))
        if n_clients == 2:
            rest, pair = (), int(1 in members)
        key = (pair, rest)
        if key not in values:
            values[key] = float(rng.uniform(0.2, 0.9)) if key != (0, ()) else 0.1
        table[",".join(str(m) for m in members)] = values[key]
    return table


@pytest.mark.parametrize("n_clients", range(2, 9))
def test_shapley_axioms_on_stub_and_surrogate_models(make_spec, n_clients):
    rng = np.random.default_rng(100 + n_clients)
    for _ in range(3):
        # surrogate: clients 1 and 2 share (s, eps), the last client contributes nothing
        eps = [float(e) for e in rng.uniform(0.0, 0.4, n_clients)]
        s = [int(v) for v in rng.integers(1, 60, n_clients)]
        s[-1] = 0
        if n_clients > 2:
            s[1], eps[1] = s[0], eps[0]
        surrogate = make_spec(
            eps, [60] * n_clients, [0.1] * n_clients, mechanism="SV",
            accuracy={
                "variant": "surrogate",
                "alpha": [float(rng.uniform(0.05, 0.2)), float(rng.uniform(0.001, 0.1)), 1.0, 0.0, 0.3],
                "gamma": float(rng.uniform(0.0, 0.3)),
                "baseline": 0.1,
            },
        )
        sv = index_sv(surrogate, s).indices
        full = eval_accuracy(surrogate.accuracy, s, surrogate.epsilons)
        assert abs(sum(sv) - (full - 0.1)) <= 1e-9
        assert abs(sv[-1]) <= 1e-9
        if n_clients > 2:
            assert abs(sv[0] - sv[1]) <= 1e-9

        # table stub: symmetry and dummy hold by construction of the table
        table = make_spec(
            [0.0] * n_clients, [1] * n_clients, [0.1] * n_clients, mechanism="SV",
            accuracy={"variant": "stub", "form": "table", "baseline": 0.1, "table": symmetric_table(rng, n_clients)},
        )
        ones = (1,) * n_clients
        sv = index_sv(table, ones).indices
        full = eval_accuracy(table.accuracy, ones, table.epsilons)
        assert abs(sum(sv) - (full - 0.1)) <= 1e-9
        if n_clients > 2:
            assert abs(sv[0] - sv[1]) <= 1e-9
            assert abs(sv[-1]) <= 1e-9


def test_sv_equals_loo_on_additive_models(make_spec):
    rng = np.random.default_rng(21)
    for _ in range(100):
        n_clients = int(rng.integers(2, 7))
        weights = [float(w) for w in rng.uniform(0.0, 0.002, n_clients)]
        s = [int(v) for v in rng.integers(0, 61, n_clients)]
        spec = make_spec(
            [float(e) for e in rng.uniform(0.0, 0.5, n_clients)], [60] * n_clients, [0.1] * n_clients,
            mechanism="SV",
            accuracy={"variant": "stub", "form": "additive", "weights": weights, "baseline": 0.1},
        )
        acc = CachedAccuracy(spec)
        sv = index_sv(spec, s, acc).indices
        loo = index_loo(spec, s, acc).indices
        assert all(abs(a - b) <= 1e-12 for a, b in zip(sv, loo))


def test_two_client_equilibria_match_joint_enumeration(make_spec):
    rng = np.random.default_rng(33)
    converged = 0
    for _ in range(50):
        spec = make_spec(
            [float(e) for e in rng.uniform(0.0, 0.4, 2)],
            [int(d) for d in rng.integers(5, 31, 2)],
            [float(m) for m in rng.uniform(0.001, 0.02, 2)],
            mechanism=str(rng.choice(["EG", "LP", "LOO", "SV"])),
            accuracy={"variant": "surrogate", "alpha": [0.1, 0.01, 1.0, 0.0, 0.35], "gamma": float(rng.uniform(0.0, 0.3)), "baseline": 0.1},
            profit={"beta1": 1.0},
            solver={"grid_step": 1, "scheme": "gauss_seidel"},
        )
        grids, table = payoff_table(spec)
        tolerance = spec.solver.tolerance
        report = solve(spec)
        assert report.verdict.is_nash == is_nash_by_table(grids, table, report.final, tolerance)
        if report.converged:
            converged += 1
            assert report.verdict.is_nash
        profiles = list(table)
        for i in rng.choice(len(profiles), size=20, replace=False):
            profile = profiles[int(i)]
            assert verify_nash(spec, profile).is_nash == is_nash_by_table(grids, table, profile, tolerance)
    assert converged >= 45


def random_three_client_game(make_spec, rng, gamma=0.0):
    """Concave accuracy, linear profit and linear cost; every sweep point starts from zero."""
    return make_spec(
        [float(e) for e in rng.uniform(0.0, 0.3, 3)],
        [int(d) for d in rng.integers(40, 81, 3)],
        [float(m) for m in rng.uniform(0.001, 0.004, 3)],
        mechanism=str(rng.choice(["LP", "LOO", "SV"])),
        accuracy={
            "variant": "surrogate",
            "alpha": [float(rng.uniform(0.05, 0.2)), float(rng.uniform(0.005, 0.05)), 1.0, 0.0, 0.3],
            "gamma": gamma,
            "baseline": 0.1,
        },
        profit={"beta1": 0.0, "linear": 1.0},
        solver={"grid_step": 1, "scheme": "gauss_seidel", "initial": [0, 0, 0]},
    )


def sweep_violations(spec, parameter, values, increasing):
    """Pairs of consecutive converged points where client 1 moves against the expected direction."""
    points = [p for p in sweep(spec, parameter, [1], values) if p.report is not None and p.report.converged]
    finals = [p.report.final[0] for p in points]
    bad = [
        (a, b) for a, b in zip(finals, finals[1:])
        if (b < a if increasing else b > a)
    ]
    return [{"spec": spec.model_dump(mode="json"), "parameter": parameter, "finals": finals}] if bad else []


def test_contribution_falls_with_privacy_and_rises_with_capacity(make_spec):
    rng = np.random.default_rng(55)
    violations = []
    for _ in range(200):
        spec = random_three_client_game(make_spec, rng)
        mu = spec.clients[0].privacy_sensitivity
        cap = spec.clients[0].capacity
        violations += sweep_violations(spec, "mu", [mu * 0.5, mu, mu * 2.0], increasing=False)
        violations += sweep_violations(spec, "capacity", [cap, cap + 8, cap + 20], increasing=True)
    assert violations == []


def test_contribution_falls_with_label_noise(make_spec):
    rng = np.random.default_rng(66)
    violations = []
    for _ in range(200):
        spec = random_three_client_game(make_spec, rng, gamma=float(rng.uniform(0.3, 0.6)))
        violations += sweep_violations(spec, "epsilon", [0.0, 0.2, 0.4], increasing=False)
    assert violations == []
