from typing import Any, Dict, Optional, Sequence

import pytest
import yaml

from game.model import GameSpec

SURROGATE = {"variant": "surrogate", "alpha": [0.1, 0.01, 1.0, 0.0, 0.35], "gamma": 0.0, "baseline": 0.1}


def spec_document(
    eps: Sequence[float],
    caps: Sequence[int],
    mus: Sequence[float],
    mechanism: str = "LP",
    accuracy: Optional[Dict[str, Any]] = None,
    profit: Optional[Dict[str, Any]] = None,
    solver: Optional[Dict[str, Any]] = None,
    privacy: Optional[Dict[str, Any]] = None,
    seed: int = 0,
    **extra: Any,
) -> Dict[str, Any]:
    doc: Dict[str, Any] = {
        "seed": seed,
        "mechanism": mechanism,
        "clients": [
            {"id": i + 1, "epsilon": e, "capacity": d, "privacy_sensitivity": m}
            for i, (e, d, m) in enumerate(zip(eps, caps, mus))
        ],
        "accuracy": dict(accuracy or SURROGATE),
        "profit": dict(profit or {"beta1": 1.0, "beta2": 0.0}),
        "solver": dict(solver or {"grid_step": 1}),
    }
    if privacy:
        doc["privacy"] = dict(privacy)
    doc.update(extra)
    return doc


@pytest.fixture
def make_spec():
    def build(*args, **kwargs) -> GameSpec:
        return GameSpec.model_validate(spec_document(*args, **kwargs))

    return build


@pytest.fixture
def sqrt_game(make_spec):
    """One client, A(s) = 2*sqrt(s) unclamped, Pi(A) = A, cost 0.5*s, D = 10: best response is 4."""
    def build(capacity: int = 10, **solver: Any) -> GameSpec:
        return make_spec(
            [0.0], [capacity], [0.5],
            accuracy={"variant": "stub", "form": "power", "scale": 2.0, "exponent": 0.5, "baseline": 0.0, "clamp": False},
            profit={"beta1": 0.0, "beta2": 0.0, "linear": 1.0},
            solver={"grid_step": 1, **solver},
        )

    return build


@pytest.fixture
def cycling_game(make_spec):
    """Two clients, D = 1, EG shares, A = 1 for any non-empty coalition: Jacobi from (1, 1) alternates with (0, 0)."""
    def build(**solver: Any) -> GameSpec:
        return make_spec(
            [0.0, 0.0], [1, 1], [0.3, 0.3],
            mechanism="EG",
            accuracy={"variant": "stub", "form": "table", "baseline": 0.0, "table": {"1": 1.0, "2": 1.0, "1,2": 1.0}},
            profit={"beta1": 0.0, "beta2": 0.0, "linear": 1.0},
            solver={"grid_step": 1, **solver},
        )

    return build


@pytest.fixture
def write_config(tmp_path):
    def write(doc: Dict[str, Any], name: str = "game.yaml") -> str:
        path = tmp_path / name
        path.write_text(yaml.safe_dump(doc, sort_keys=False), encoding="utf-8")
        return str(path)

    return write
