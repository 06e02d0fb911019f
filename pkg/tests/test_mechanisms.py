import numpy as np
import pytest

from game.errors import CapacityError, ContractViolation
from game.mechanisms import (
    ContributionIndices,
    compute_indices,
    index_eg,
    index_loo,
    index_lp,
    index_sv,
    profit_shares,
    shares,
)
from game.model import CachedAccuracy, Mechanism, eval_accuracy


def test_eg_shares_are_equal():
    result = shares(index_eg(4))
    assert result.shares == (0.25, 0.25, 0.25, 0.25)
    assert not result.fallback_used


def test_lp_weights_effective_clean_data():
    indices = index_lp((10, 20), (0.5, 0.0))
    assert indices.indices == (5.0, 20.0)
    assert shares(indices).shares == pytest.approx((0.2, 0.8))


def test_all_zero_indices_fall_back_to_equal_split():
    result = shares(index_lp((0, 0, 0), (0.1, 0.2, 0.3)))
    assert result.fallback_used
    assert result.shares == pytest.approx((1 / 3, 1 / 3, 1 / 3))


def test_negative_indices_are_clipped():
    result = shares(ContributionIndices((-1.0, 1.0, 3.0), Mechanism.LOO))
    assert result.shares == (0.0, 0.25, 0.75)


def test_non_finite_index_is_rejected():
    with pytest.raises(ContractViolation):
        shares(ContributionIndices((float("inf"), 1.0), Mechanism.SV))


def test_loo_and_sv_on_additive_model(make_spec):
    spec = make_spec(
        [0.0, 0.0, 0.0], [5, 5, 5], [0.1] * 3,
        accuracy={"variant": "stub", "form": "additive", "weights": [0.01, 0.02, 0.03], "baseline": 0.1},
    )
    s = (1, 2, 3)
    expected = (0.01, 0.04, 0.09)
    assert index_loo(spec, s).indices == pytest.approx(expected, abs=1e-12)
    assert index_sv(spec, s).indices == pytest.approx(expected, abs=1e-12)


def test_loo_index_of_non_contributor_is_zero(make_spec):
    spec = make_spec([0.0, 0.0], [5, 5], [0.1, 0.1])
    assert index_loo(spec, (0, 4)).indices[0] == 0.0


def test_sv_on_two_client_table():
    from game.model import GameSpec

    spec = GameSpec.model_validate({
        "seed": 0,
        "mechanism": "SV",
        "clients": [
            {"id": 1, "epsilon": 0.0, "capacity": 1, "privacy_sensitivity": 0.0},
            {"id": 2, "epsilon": 0.0, "capacity": 1, "privacy_sensitivity": 0.0},
        ],
        "accuracy": {"variant": "stub", "form": "table", "baseline": 0.1, "table": {"1": 0.5, "2": 0.3, "1,2": 0.6}},
        "profit": {"beta1": 1.0},
    })
    assert index_sv(spec, (1, 1)).indices == pytest.approx((0.35, 0.15))


def test_sv_refuses_more_clients_than_cap(make_spec):
    spec = make_spec([0.0] * 3, [5] * 3, [0.1] * 3, coalition_cap=2)
    with pytest.raises(CapacityError):
        index_sv(spec, (1, 1, 1))


def test_shapley_axioms_on_random_surrogates(make_spec):
    rng = np.random.default_rng(5)
    for n_clients in range(2, 7):
        for _ in range(5):
            eps = [float(e) for e in rng.uniform(0.0, 0.4, n_clients)]
            s = [int(v) for v in rng.integers(0, 60, n_clients)]
            # a symmetric pair (N > 2) and a dummy
            if n_clients > 2:
                s[1], eps[1] = s[0], eps[0]
            s[-1] = 0
            spec = make_spec(
                eps, [60] * n_clients, [0.1] * n_clients, mechanism="SV",
                accuracy={
                    "variant": "surrogate",
                    "alpha": [float(rng.uniform(0.05, 0.2)), float(rng.uniform(0.001, 0.1)), float(rng.uniform(0.5, 2.0)), 0.0, 0.3],
                    "gamma": float(rng.uniform(0.0, 0.3)),
                    "baseline": 0.1,
                },
            )
            acc = CachedAccuracy(spec)
            sv = index_sv(spec, s, acc).indices
            full = eval_accuracy(spec.accuracy, s, spec.epsilons)
            assert sum(sv) == pytest.approx(full - spec.accuracy.baseline, abs=1e-9)
            assert sv[-1] == pytest.approx(0.0, abs=1e-12)
            if n_clients > 2:
                assert sv[0] == pytest.approx(sv[1], abs=1e-9)


def test_compute_indices_dispatches_on_mechanism(make_spec):
    spec = make_spec([0.2, 0.0], [10, 10], [0.1, 0.1], mechanism="LP")
    assert compute_indices(spec, (5, 5)).indices == pytest.approx((4.0, 5.0))
    indices, result = profit_shares(spec, (5, 5))
    assert indices.mechanism is Mechanism.LP
    assert sum(result.shares) == pytest.approx(1.0)
