"""
Finite-difference audit of the structural assumptions behind the equilibrium results.

  accuracy_concave    A(s, eps) non-decreasing and concave in each s_n
  profit_concave      g_n(s) * Pi(A(s)) concave in s_n
  cost_convex         C_n(s_n) non-decreasing and convex
  noise_monotone      A and g_n non-increasing in eps_n; cross difference in (s_n, eps_n) <= 0

Profiles are drawn uniformly from the interior of each client's box with a seeded
generator; differences use the client's solver grid step. Diagnostic only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

import numpy as np
from loguru import logger

from .mechanisms import profit_shares
from .model import (
    CachedAccuracy,
    GameSpec,
    Profile,
    eval_privacy_cost,
    eval_profit,
    replace_spec,
)

CHECK_NAMES = ("accuracy_concave", "profit_concave", "cost_convex", "noise_monotone")
NOISE_STEP = 0.05


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    checked: int
    violations: int
    worst: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


@dataclass(frozen=True)
class AssumptionReport:
    checks: Tuple[AssumptionCheck, ...]
    samples: int
    seed: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "samples": self.samples,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "checks": {
                c.name: {"passed": c.passed, "checked": c.checked, "violations": c.violations, "worst": c.worst}
                for c in self.checks
            },
        }


class _Tally:
    def __init__(self, name: str, tolerance: float):
        self.name = name
        self.tolerance = tolerance
        self.checked = 0
        self.violations = 0
        self.worst = 0.0

    def at_most_zero(self, value: float) -> None:
        """Record a quantity that should be <= 0."""
        self.checked += 1
        if value > self.tolerance:
            self.violations += 1
        self.worst = max(self.worst, value)

    def done(self) -> AssumptionCheck:
        return AssumptionCheck(self.name, self.checked, self.violations, self.worst)


def _with_epsilon(spec: GameSpec, n: int, epsilon: float) -> GameSpec:
    clients = [c.model_dump() for c in spec.clients]
    clients[n]["epsilon"] = epsilon
    return replace_spec(spec, clients=clients)


def _moved(profile: Profile, n: int, value: int) -> Profile:
    return profile[:n] + (value,) + profile[n + 1:]


def _allocated_profit(spec: GameSpec, acc: CachedAccuracy, profile: Profile, n: int) -> float:
    _, shares = profit_shares(spec, profile, acc)
    return shares.shares[n] * eval_profit(spec.profit, acc(profile))


def random_profiles(spec: GameSpec, samples: int, seed: int) -> List[Profile]:
    rng = np.random.default_rng(seed)
    return [
        tuple(int(rng.integers(0, c.capacity + 1)) for c in spec.clients)
        for _ in range(samples)
    ]


def check_assumptions(
    spec: GameSpec,
    samples: int = 50,
    seed: int = 0,
    tolerance: float = 1e-9,
) -> AssumptionReport:
    tallies = {name: _Tally(name, tolerance) for name in CHECK_NAMES}
    acc = CachedAccuracy(spec)
    steps = spec.steps()
    noisy_specs = {}
    for n, c in enumerate(spec.clients):
        delta = min(NOISE_STEP, 1.0 - c.epsilon)
        if delta > 0:
            noisy = _with_epsilon(spec, n, c.epsilon + delta)
            noisy_specs[n] = (noisy, CachedAccuracy(noisy))

    for profile in random_profiles(spec, samples, seed):
        for n, client in enumerate(spec.clients):
            h = steps[n]
            v = profile[n]
            if v + h <= client.capacity:
                up = _moved(profile, n, v + h)
                tallies["accuracy_concave"].at_most_zero(acc(profile) - acc(up))
                c0 = eval_privacy_cost(spec.privacy, client, v)
                c1 = eval_privacy_cost(spec.privacy, client, v + h)
                tallies["cost_convex"].at_most_zero(c0 - c1)
                if v - h >= 0:
                    down = _moved(profile, n, v - h)
                    tallies["accuracy_concave"].at_most_zero(acc(up) - 2 * acc(profile) + acc(down))
                    tallies["profit_concave"].at_most_zero(
                        _allocated_profit(spec, acc, up, n)
                        - 2 * _allocated_profit(spec, acc, profile, n)
                        + _allocated_profit(spec, acc, down, n)
                    )
                    cm = eval_privacy_cost(spec.privacy, client, v - h)
                    tallies["cost_convex"].at_most_zero(-(c1 - 2 * c0 + cm))

            if n not in noisy_specs:
                continue
            noisy, noisy_acc = noisy_specs[n]
            tally = tallies["noise_monotone"]
            tally.at_most_zero(noisy_acc(profile) - acc(profile))
            _, base_shares = profit_shares(spec, profile, acc)
            _, noisy_shares = profit_shares(noisy, profile, noisy_acc)
            tally.at_most_zero(noisy_shares.shares[n] - base_shares.shares[n])
            if v + h <= client.capacity:
                up = _moved(profile, n, v + h)
                tally.at_most_zero((noisy_acc(up) - acc(up)) - (noisy_acc(profile) - acc(profile)))

    report = AssumptionReport(tuple(tallies[name].done() for name in CHECK_NAMES), samples, seed, tolerance)
    for check in report.checks:
        if not check.passed:
            logger.info("{}: {} of {} checks violated (worst {:.3g})", check.name, check.violations, check.checked, check.worst)
    return report
