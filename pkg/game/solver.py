"""
Best-response dynamics over the integer strategy grid and Nash-equilibrium verification.

Contract
- best_response returns the smallest maximizer of U_n over the client's search grid.
- solve iterates best responses (Jacobi: everyone answers s(t); Gauss-Seidel: clients answer
  in index order and see earlier updates of the same round) until max_n |s_n(t) - s_n(t-1)| <= tau
  or max_iters rounds. Non-convergence is reported, not raised.
- verify_nash checks every unilateral deviation on the same grid the solver used.
- sweep re-solves the game for each value of one parameter; a failing point is recorded
  and the sweep continues.

Determinism
- No randomness; caches are keyed on full contribution vectors; sweep points are collected
  in input order whatever `n_jobs` is.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from joblib import Parallel, delayed
from loguru import logger
from pydantic import ValidationError

from .errors import ContractViolation, GameError
from .mechanisms import profit_shares
from .model import (
    CachedAccuracy,
    GameSpec,
    Mechanism,
    Profile,
    StrategyProfile,
    UpdateScheme,
    eval_payoff,
    eval_privacy_cost,
    eval_profit,
    replace_spec,
    validate_profile,
)

SWEEP_PARAMETERS = ("epsilon", "mu", "capacity")


@dataclass(frozen=True)
class NashVerdict:
    """Outcome of the unilateral-deviation check.

    `gain` is the largest U_n(s_n', s_-n) - U_n(s) over all clients and grid deviations
    s_n' != s_n; `client` (1-based) and `deviation` locate it. With no alternative strategy
    anywhere, gain is 0 and client/deviation are None.
    """
    is_nash: bool
    gain: float
    client: Optional[int]
    deviation: Optional[int]
    tolerance: float


@dataclass(frozen=True)
class EquilibriumReport:
    final: Profile
    trajectory: Tuple[Profile, ...]
    converged: bool
    iterations: int
    verdict: NashVerdict
    mechanism: Mechanism
    accuracy: float
    payoffs: Tuple[float, ...]
    shares: Tuple[float, ...]
    indices: Tuple[float, ...]
    fallback_used: bool
    trajectory_payoffs: Tuple[Tuple[float, ...], ...] = field(default=())
    trajectory_accuracy: Tuple[float, ...] = field(default=())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mechanism": self.mechanism.value,
            "converged": self.converged,
            "iterations": self.iterations,
            "final": list(self.final),
            "accuracy": self.accuracy,
            "payoffs": list(self.payoffs),
            "shares": list(self.shares),
            "indices": list(self.indices),
            "fallback_used": self.fallback_used,
            "verdict": {
                "is_nash": self.verdict.is_nash,
                "gain": self.verdict.gain,
                "client": self.verdict.client,
                "deviation": self.verdict.deviation,
                "tolerance": self.verdict.tolerance,
            },
            "trajectory": [list(p) for p in self.trajectory],
            "trajectory_payoffs": [list(p) for p in self.trajectory_payoffs],
            "trajectory_accuracy": list(self.trajectory_accuracy),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EquilibriumReport":
        v = data["verdict"]
        return cls(
            final=tuple(data["final"]),
            trajectory=tuple(tuple(p) for p in data["trajectory"]),
            converged=bool(data["converged"]),
            iterations=int(data["iterations"]),
            verdict=NashVerdict(
                is_nash=bool(v["is_nash"]),
                gain=float(v["gain"]),
                client=v["client"],
                deviation=v["deviation"],
                tolerance=float(v["tolerance"]),
            ),
            mechanism=Mechanism(data["mechanism"]),
            accuracy=float(data["accuracy"]),
            payoffs=tuple(data["payoffs"]),
            shares=tuple(data["shares"]),
            indices=tuple(data["indices"]),
            fallback_used=bool(data["fallback_used"]),
            trajectory_payoffs=tuple(tuple(p) for p in data.get("trajectory_payoffs", [])),
            trajectory_accuracy=tuple(data.get("trajectory_accuracy", [])),
        )


@dataclass(frozen=True)
class ProfileEvaluation:
    accuracy: float
    payoffs: Tuple[float, ...]
    shares: Tuple[float, ...]
    indices: Tuple[float, ...]
    fallback_used: bool


@dataclass(frozen=True)
class SweepPoint:
    parameter: str
    value: float
    clients: Tuple[int, ...]
    report: Optional[EquilibriumReport]
    error: Optional[str] = None


def search_grid(capacity: int, step: int, include_zero: bool = True) -> Tuple[int, ...]:
    """{0 if include_zero, step, 2*step, ..., capacity}; capacity is always a member."""
    if capacity == 0:
        return (0,)
    points = list(range(step, capacity + 1, step))
    if not points or points[-1] != capacity:
        points.append(capacity)
    if include_zero:
        points.insert(0, 0)
    return tuple(points)


def client_grid(spec: GameSpec, n: int) -> Tuple[int, ...]:
    client = spec.clients[n]
    return search_grid(client.capacity, spec.solver.step_for(client.capacity), spec.solver.include_zero)


def best_response(
    spec: GameSpec,
    s_others: Union[StrategyProfile, Sequence[int]],
    n: int,
    accuracy: Optional[CachedAccuracy] = None,
) -> int:
    """min argmax of U_n(., s_-n) over client n's search grid (n is 0-based)."""
    profile = validate_profile(spec, s_others)
    acc = accuracy if accuracy is not None else CachedAccuracy(spec)
    best, best_value = None, None
    for candidate in client_grid(spec, n):
        trial = profile[:n] + (candidate,) + profile[n + 1:]
        value = eval_payoff(spec, trial, n, acc)
        if best_value is None or value > best_value:
            best, best_value = candidate, value
    return best


def evaluate_profile(
    spec: GameSpec,
    s: Union[StrategyProfile, Sequence[int]],
    accuracy: Optional[CachedAccuracy] = None,
) -> ProfileEvaluation:
    profile = validate_profile(spec, s)
    acc = accuracy if accuracy is not None else CachedAccuracy(spec)
    a = acc(profile)
    indices, shares = profit_shares(spec, profile, acc)
    profit = eval_profit(spec.profit, a)
    payoffs = tuple(
        g * profit - eval_privacy_cost(spec.privacy, c, v)
        for g, c, v in zip(shares.shares, spec.clients, profile)
    )
    return ProfileEvaluation(a, payoffs, shares.shares, indices.indices, shares.fallback_used)


def verify_nash(
    spec: GameSpec,
    s: Union[StrategyProfile, Sequence[int]],
    tolerance: Optional[float] = None,
) -> NashVerdict:
    profile = validate_profile(spec, s)
    tol = spec.solver.tolerance if tolerance is None else tolerance
    acc = CachedAccuracy(spec)
    worst_gain, worst_client, worst_dev = None, None, None
    for n in range(spec.n_clients):
        current = eval_payoff(spec, profile, n, acc)
        for candidate in client_grid(spec, n):
            if candidate == profile[n]:
                continue
            trial = profile[:n] + (candidate,) + profile[n + 1:]
            gain = eval_payoff(spec, trial, n, acc) - current
            if worst_gain is None or gain > worst_gain:
                worst_gain, worst_client, worst_dev = gain, n + 1, candidate
    if worst_gain is None:
        return NashVerdict(True, 0.0, None, None, tol)
    return NashVerdict(worst_gain <= tol, worst_gain, worst_client, worst_dev, tol)


def _round(spec: GameSpec, current: Profile) -> Profile:
    acc = CachedAccuracy(spec)
    if spec.solver.scheme == UpdateScheme.JACOBI:
        return tuple(best_response(spec, current, n, acc) for n in range(spec.n_clients))
    working = list(current)
    for n in range(spec.n_clients):
        working[n] = best_response(spec, tuple(working), n, acc)
    return tuple(working)


def solve(spec: GameSpec) -> EquilibriumReport:
    settings = spec.solver
    current = validate_profile(spec, spec.initial_profile())
    trajectory: List[Profile] = [current]
    converged = False
    for t in range(1, settings.max_iters + 1):
        nxt = _round(spec, current)
        trajectory.append(nxt)
        delta = max(abs(a - b) for a, b in zip(nxt, current))
        current = nxt
        logger.debug("iteration {}: s={} max|ds|={}", t, current, delta)
        if delta <= settings.tau:
            converged = True
            break

    iterations = len(trajectory) - 1
    if converged:
        logger.info("{} best responses converged after {} iterations at s={}", spec.mechanism.value, iterations, current)
    else:
        logger.info("{} best responses did not converge within {} iterations", spec.mechanism.value, settings.max_iters)

    acc = CachedAccuracy(spec)
    rows = [evaluate_profile(spec, p, acc) for p in trajectory]
    final = rows[-1]
    return EquilibriumReport(
        final=current,
        trajectory=tuple(trajectory),
        converged=converged,
        iterations=iterations,
        verdict=verify_nash(spec, current),
        mechanism=spec.mechanism,
        accuracy=final.accuracy,
        payoffs=final.payoffs,
        shares=final.shares,
        indices=final.indices,
        fallback_used=final.fallback_used,
        trajectory_payoffs=tuple(r.payoffs for r in rows),
        trajectory_accuracy=tuple(r.accuracy for r in rows),
    )


def with_parameter(spec: GameSpec, parameter: str, clients: Sequence[int], value: float) -> GameSpec:
    """Copy of `spec` with `parameter` set to `value` for the given 1-based client ids."""
    if parameter not in SWEEP_PARAMETERS:
        raise ContractViolation(f"sweep parameter must be one of {SWEEP_PARAMETERS}, got {parameter!r}")
    unknown = [c for c in clients if not 1 <= c <= spec.n_clients]
    if unknown:
        raise ContractViolation(f"unknown client ids {unknown}")
    key = {"epsilon": "epsilon", "mu": "privacy_sensitivity", "capacity": "capacity"}[parameter]
    if parameter == "capacity":
        if float(value) != int(value):
            raise ContractViolation(f"capacity must be an integer, got {value}")
        value = int(value)
    targets = set(clients)
    updated = [c.model_copy(update={key: value}) if c.id in targets else c for c in spec.clients]
    changes: Dict[str, Any] = {"clients": [c.model_dump() for c in updated]}
    initial = spec.solver.initial
    if parameter == "capacity" and initial is not None:
        capped = tuple(min(v, c.capacity) for v, c in zip(initial, updated))
        changes["solver"] = spec.solver.model_copy(update={"initial": capped}).model_dump()
    return replace_spec(spec, **changes)


def _solve_point(spec: GameSpec, parameter: str, clients: Tuple[int, ...], value: float) -> SweepPoint:
    try:
        report = solve(with_parameter(spec, parameter, clients, value))
        return SweepPoint(parameter, value, clients, report)
    except (GameError, ValidationError) as exc:
        logger.warning("sweep {}={} failed: {}", parameter, value, exc)
        return SweepPoint(parameter, value, clients, None, str(exc))


def sweep(
    spec: GameSpec,
    parameter: str,
    clients: Sequence[int],
    values: Sequence[float],
    n_jobs: Optional[int] = None,
) -> List[SweepPoint]:
    """Solve the game once per value, same initial profile and settings throughout."""
    if parameter not in SWEEP_PARAMETERS:
        raise ContractViolation(f"sweep parameter must be one of {SWEEP_PARAMETERS}, got {parameter!r}")
    ids = tuple(clients)
    jobs = spec.solver.n_jobs if n_jobs is None else n_jobs
    return Parallel(n_jobs=jobs)(delayed(_solve_point)(spec, parameter, ids, v) for v in values)


def compare_mechanisms(
    spec: GameSpec,
    mechanisms: Optional[Sequence[Mechanism]] = None,
) -> List[Tuple[Mechanism, EquilibriumReport]]:
    """Solve the same game under each mechanism (EG, LP, LOO, SV by default)."""
    chosen = list(mechanisms) if mechanisms else list(Mechanism)
    outcomes = []
    for mechanism in chosen:
        report = solve(replace_spec(spec, mechanism=mechanism))
        logger.info(
            "{}: s*={} total={} accuracy={:.4f}",
            mechanism.value, report.final, sum(report.final), report.accuracy,
        )
        outcomes.append((mechanism, report))
    return outcomes
