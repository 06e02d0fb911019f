"""
Domain types and economic primitives of the data-contribution game.

Types
- ClientProfile: exogenous parameters of one client (noise rate, capacity, privacy sensitivity).
- StrategyProfile: the vector of data-contribution levels s.
- AccuracyModel: surrogate accuracy A(s, eps) or a stub form used by tests.
- ProfitModel / PrivacyCostModel: Pi(A) and C_n(s_n).
- SolverSettings / GameSpec: a full game instance as read from a config file.

Operations
- eval_accuracy, eval_profit, eval_privacy_cost, eval_payoff (+ payoff_breakdown).

Conventions
- Config-borne types are frozen pydantic models with extra keys forbidden.
- Profiles are plain tuples of ints internally; `as_profile` accepts either form.
- Client positions in the Python API are 0-based; client ids (1-based) appear in configs and outputs.
- Every eval_* is pure; `CachedAccuracy` memoizes on the full contribution vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Optional, Sequence, Tuple, Union

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

from .errors import CapacityError, ContractViolation, LocatedValueError, ModelDomainError

Profile = Tuple[int, ...]


class Mechanism(str, Enum):
    EG = "EG"
    LP = "LP"
    LOO = "LOO"
    SV = "SV"


class UpdateScheme(str, Enum):
    JACOBI = "jacobi"
    GAUSS_SEIDEL = "gauss_seidel"


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class ClientProfile(_Frozen):
    """Exogenous parameters of one client."""
    id: int = Field(ge=1, description="1-based client index")
    epsilon: float = Field(ge=0.0, le=1.0, description="Label-noise rate eps_n")
    capacity: int = Field(ge=0, description="Maximum data points D_n")
    privacy_sensitivity: float = Field(ge=0.0, description="Privacy sensitivity mu_n")


class StrategyProfile(_Frozen):
    """Data-contribution levels, one non-negative integer per client."""
    contributions: Tuple[int, ...]

    @field_validator("contributions")
    @classmethod
    def _non_negative(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(c < 0 for c in v):
            raise ValueError("contributions must be non-negative")
        return v


class AccuracyModel(_Frozen):
    """Maps (s, eps) to global-model accuracy.

    variant=surrogate: A(s,0) = a1*log(a2*S + a3) + a4*S + a5 with S = sum(s).
    variant=stub: one of
      additive  A(s,0) = baseline + sum_n weights[n]*s_n
      power     A(s,0) = baseline + scale * S**exponent
      table     A(s,0) = table["i,j,..."] for the set of clients with s_n > 0
    Both variants subtract gamma * sum_n eps_n*s_n / S. At S = 0 the value is `baseline`.
    """
    variant: str = Field(default="surrogate", pattern="^(surrogate|stub)$")
    alpha: Tuple[float, float, float, float, float] = (0.0, 1.0, 1.0, 0.0, 0.0)
    gamma: float = Field(default=0.0, ge=0.0)
    baseline: float = Field(default=0.1, ge=0.0, le=1.0)
    form: Optional[str] = Field(default=None, pattern="^(additive|power|table)$")
    weights: Optional[Tuple[float, ...]] = None
    scale: float = 1.0
    exponent: float = Field(default=1.0, gt=0.0)
    table: Optional[Dict[str, float]] = None
    clamp: bool = True

    _coalitions: Dict[FrozenSet[int], float] = PrivateAttr(default_factory=dict)

    @model_validator(mode="after")
    def _check_variant(self) -> "AccuracyModel":
        if self.variant == "surrogate" and self.form is not None:
            raise ValueError("'form' only applies to variant 'stub'")
        if self.variant == "stub":
            if self.form is None:
                raise ValueError("stub accuracy needs a 'form' (additive, power or table)")
            if self.form == "additive" and self.weights is None:
                raise ValueError("additive stub needs 'weights'")
            if self.form == "table":
                if not self.table:
                    raise ValueError("table stub needs a non-empty 'table'")
                self._coalitions = {_parse_coalition(k): float(v) for k, v in self.table.items()}
        return self


def _parse_coalition(key: str) -> FrozenSet[int]:
    parts = [p.strip() for p in str(key).split(",") if p.strip()]
    try:
        return frozenset(int(p) for p in parts)
    except ValueError:
        raise ValueError(f"table key {key!r} is not a comma-separated list of client ids")


def coalition_key(active: FrozenSet[int]) -> str:
    return ",".join(str(i) for i in sorted(active))


class ProfitModel(_Frozen):
    """Pi(A) = beta1*A^2 + linear*A + beta2; non-decreasing on [0, 1] since beta1, linear >= 0."""
    beta1: float = Field(default=1.0, ge=0.0)
    beta2: float = 0.0
    linear: float = Field(default=0.0, ge=0.0)


class PrivacyCostModel(_Frozen):
    """C_n(s_n) = mu_n * f(s_n) with f(s) = s (linear) or s**exponent (power, exponent >= 1)."""
    form: str = Field(default="linear", pattern="^(linear|power)$")
    exponent: float = Field(default=1.0, ge=1.0)


class SolverSettings(_Frozen):
    """Best-response dynamics settings.

    initial defaults to full capacity for every client; grid_step defaults to
    max(1, D_n // 200) per client.
    """
    initial: Optional[Tuple[int, ...]] = None
    tau: float = Field(default=0.0, ge=0.0)
    max_iters: int = Field(default=100, ge=1)
    grid_step: Optional[int] = Field(default=None, ge=1)
    scheme: UpdateScheme = UpdateScheme.JACOBI
    include_zero: bool = True
    tolerance: float = Field(default=1e-9, ge=0.0)
    n_jobs: int = 1

    def step_for(self, capacity: int) -> int:
        if self.grid_step is not None:
            return self.grid_step
        return max(1, capacity // 200)


class GameSpec(_Frozen):
    """A complete game instance: clients, mechanism, model parameters and solver settings."""
    seed: int
    clients: Tuple[ClientProfile, ...] = Field(min_length=1)
    mechanism: Mechanism = Mechanism.LP
    accuracy: AccuracyModel
    profit: ProfitModel
    privacy: PrivacyCostModel = PrivacyCostModel()
    solver: SolverSettings = SolverSettings()
    coalition_cap: int = Field(default=12, ge=1)
    flsim: Optional["FlsimSettings"] = None

    @model_validator(mode="after")
    def _check_game(self) -> "GameSpec":
        n = len(self.clients)
        ids = [c.id for c in self.clients]
        for i, cid in enumerate(ids):
            if cid != i + 1:
                raise LocatedValueError(("clients", i, "id"), f"client ids must be 1..{n} in order, got {ids}")
        if self.mechanism == Mechanism.SV and n > self.coalition_cap:
            raise LocatedValueError(("mechanism",), str(CapacityError(n, self.coalition_cap)))
        init = self.solver.initial
        if init is not None:
            if len(init) != n:
                raise LocatedValueError(("solver", "initial"), f"{len(init)} entries for {n} clients")
            for i, (c, v) in enumerate(zip(self.clients, init)):
                if not 0 <= v <= c.capacity:
                    raise LocatedValueError(("solver", "initial", i), f"{v} outside [0, {c.capacity}]")
        acc = self.accuracy
        if acc.form == "additive" and acc.weights is not None and len(acc.weights) != n:
            raise LocatedValueError(("accuracy", "weights"), f"{len(acc.weights)} entries for {n} clients")
        if acc.form == "table":
            for raw in acc.table:
                if not _parse_coalition(raw) <= set(ids):
                    raise LocatedValueError(("accuracy", "table", raw), f"key {raw!r} names unknown clients")
        try:
            check_finite(acc)
        except ModelDomainError as exc:
            raise LocatedValueError(("accuracy",), str(exc))
        return self

    @property
    def n_clients(self) -> int:
        return len(self.clients)

    @property
    def epsilons(self) -> Tuple[float, ...]:
        return tuple(c.epsilon for c in self.clients)

    @property
    def capacities(self) -> Tuple[int, ...]:
        return tuple(c.capacity for c in self.clients)

    def initial_profile(self) -> Profile:
        if self.solver.initial is not None:
            return tuple(self.solver.initial)
        return self.capacities

    def steps(self) -> Tuple[int, ...]:
        return tuple(self.solver.step_for(c.capacity) for c in self.clients)


def replace_spec(spec: GameSpec, **changes) -> GameSpec:
    """Copy of `spec` with top-level fields replaced; the result is re-validated."""
    data = spec.model_dump()
    data.update(changes)
    return GameSpec.model_validate(data)


def as_profile(s: Union[StrategyProfile, Sequence[int]]) -> Profile:
    raw = s.contributions if isinstance(s, StrategyProfile) else s
    profile = tuple(int(v) for v in raw)
    if any(v < 0 for v in profile):
        raise ContractViolation(f"negative contribution in {profile}")
    return profile


def validate_profile(spec: GameSpec, s: Union[StrategyProfile, Sequence[int]]) -> Profile:
    """Check length and capacity bounds against a game; returns the tuple form."""
    profile = as_profile(s)
    if len(profile) != spec.n_clients:
        raise ContractViolation(f"profile has {len(profile)} entries for {spec.n_clients} clients")
    for c, v in zip(spec.clients, profile):
        if v > c.capacity:
            raise ContractViolation(f"s_{c.id}={v} exceeds capacity {c.capacity}")
    return profile


def check_finite(model: AccuracyModel) -> None:
    for i, a in enumerate(model.alpha, start=1):
        if not math.isfinite(a):
            raise ModelDomainError(f"alpha{i}", f"non-finite value {a}")
    for name in ("gamma", "baseline", "scale", "exponent"):
        value = getattr(model, name)
        if not math.isfinite(value):
            raise ModelDomainError(name, f"non-finite value {value}")
    for i, w in enumerate(model.weights or (), start=1):
        if not math.isfinite(w):
            raise ModelDomainError(f"weights[{i}]", f"non-finite value {w}")


def surrogate_clean(alpha: Sequence[float], total: float) -> float:
    """A(s,0) of the surrogate form for a given total contribution."""
    a1, a2, a3, a4, a5 = alpha
    arg = a2 * total + a3
    if arg <= 0:
        raise ModelDomainError("alpha2,alpha3", f"log argument alpha2*sum(s)+alpha3 = {arg} <= 0")
    return a1 * math.log(arg) + a4 * total + a5


def clean_accuracy(model: AccuracyModel, s: Sequence[int]) -> float:
    """Unpenalized, unclamped A(s, 0)."""
    total = sum(s)
    if total == 0:
        return model.baseline
    if model.variant == "surrogate":
        return surrogate_clean(model.alpha, total)
    if model.form == "additive":
        weights = model.weights or ()
        if len(weights) != len(s):
            raise ContractViolation(f"additive stub has {len(weights)} weights for {len(s)} clients")
        return model.baseline + sum(w * v for w, v in zip(weights, s))
    if model.form == "power":
        return model.baseline + model.scale * float(total) ** model.exponent
    active = frozenset(i + 1 for i, v in enumerate(s) if v > 0)
    try:
        return model._coalitions[active]
    except KeyError:
        raise ContractViolation(f"table stub has no entry for coalition {coalition_key(active)!r}")


def eval_accuracy(model: AccuracyModel, s: Union[StrategyProfile, Sequence[int]], eps: Sequence[float]) -> float:
    """A(s, eps) = A(s,0) - gamma * sum_n eps_n s_n / sum_n s_n, clamped to [0, 1] unless the model opts out."""
    profile = as_profile(s)
    if len(eps) != len(profile):
        raise ContractViolation(f"{len(eps)} noise rates for {len(profile)} contributions")
    check_finite(model)
    total = sum(profile)
    if total == 0:
        return model.baseline
    value = clean_accuracy(model, profile)
    if model.gamma:
        value = value - model.gamma * sum(e * v for e, v in zip(eps, profile)) / total
    if model.clamp and not 0.0 <= value <= 1.0:
        clamped = min(1.0, max(0.0, value))
        logger.debug("accuracy {} at s={} clamped to {}", value, profile, clamped)
        value = clamped
    return value


def eval_profit(profit: ProfitModel, accuracy: float) -> float:
    for name in ("beta1", "beta2", "linear"):
        value = getattr(profit, name)
        if not math.isfinite(value):
            raise ModelDomainError(name, f"non-finite value {value}")
    return profit.beta1 * accuracy * accuracy + profit.linear * accuracy + profit.beta2


def eval_privacy_cost(privacy: PrivacyCostModel, client: ClientProfile, s_n: int) -> float:
    if s_n < 0 or s_n > client.capacity:
        raise ContractViolation(f"s_{client.id}={s_n} outside [0, {client.capacity}]")
    if privacy.form == "linear":
        return client.privacy_sensitivity * s_n
    return client.privacy_sensitivity * float(s_n) ** privacy.exponent


class CachedAccuracy:
    """Accuracy of a game's model at the game's noise vector, memoized per contribution vector."""

    def __init__(self, spec: GameSpec):
        self.model = spec.accuracy
        self.eps = spec.epsilons
        self._values: Dict[Profile, float] = {}

    def __call__(self, profile: Profile) -> float:
        value = self._values.get(profile)
        if value is None:
            value = eval_accuracy(self.model, profile, self.eps)
            self._values[profile] = value
        return value

    def __len__(self) -> int:
        return len(self._values)


@dataclass(frozen=True)
class PayoffBreakdown:
    share: float
    profit: float
    cost: float
    accuracy: float

    @property
    def payoff(self) -> float:
        return self.share * self.profit - self.cost


def payoff_breakdown(
    spec: GameSpec,
    s: Union[StrategyProfile, Sequence[int]],
    n: int,
    accuracy: Optional[CachedAccuracy] = None,
) -> PayoffBreakdown:
    """Share, profit, privacy cost and accuracy behind client n's payoff (n is 0-based)."""
    from .mechanisms import profit_shares

    profile = validate_profile(spec, s)
    acc = accuracy if accuracy is not None else CachedAccuracy(spec)
    a = acc(profile)
    _, shares = profit_shares(spec, profile, acc)
    return PayoffBreakdown(
        share=shares.shares[n],
        profit=eval_profit(spec.profit, a),
        cost=eval_privacy_cost(spec.privacy, spec.clients[n], profile[n]),
        accuracy=a,
    )


def eval_payoff(
    spec: GameSpec,
    s: Union[StrategyProfile, Sequence[int]],
    n: int,
    accuracy: Optional[CachedAccuracy] = None,
) -> float:
    """U_n(s) = g_n(s, eps) * Pi(A(s, eps)) - C_n(s_n)."""
    return payoff_breakdown(spec, s, n, accuracy).payoff


from .flsim import FlsimSettings  # noqa: E402

GameSpec.model_rebuild()
