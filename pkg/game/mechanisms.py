"""
Contribution indices I_n(s, eps) and profit shares g_n under the four allocation mechanisms.

  EG   I_n = 1/N
  LP   I_n = (1 - eps_n) * s_n
  LOO  I_n = A(s) - A(s with s_n := 0)
  SV   I_n = sum over S in N\\{n} of [A(S + n) - A(S)] / (N * C(N-1, |S|))

Coalitions are evaluated by zeroing non-members, so the accuracy model always
sees N entries and the empty coalition evaluates to the baseline accuracy.

Shares clip negative indices to 0 before normalizing; when the clipped total is
at most 1e-12 every client gets 1/N and `fallback_used` is set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import List, Optional, Sequence, Tuple, Union

from loguru import logger

from .errors import CapacityError, ContractViolation
from .model import CachedAccuracy, GameSpec, Mechanism, Profile, StrategyProfile, as_profile

FALLBACK_THRESHOLD = 1e-12


@dataclass(frozen=True)
class ContributionIndices:
    indices: Tuple[float, ...]
    mechanism: Mechanism


@dataclass(frozen=True)
class ProfitShares:
    shares: Tuple[float, ...]
    fallback_used: bool = False


def index_eg(n_clients: int) -> ContributionIndices:
    if n_clients < 1:
        raise ContractViolation(f"need at least one client, got {n_clients}")
    return ContributionIndices(tuple([1.0 / n_clients] * n_clients), Mechanism.EG)


def index_lp(s: Union[StrategyProfile, Sequence[int]], eps: Sequence[float]) -> ContributionIndices:
    profile = as_profile(s)
    if len(profile) != len(eps):
        raise ContractViolation(f"{len(eps)} noise rates for {len(profile)} contributions")
    return ContributionIndices(tuple((1.0 - e) * v for v, e in zip(profile, eps)), Mechanism.LP)


def index_loo(
    spec: GameSpec,
    s: Union[StrategyProfile, Sequence[int]],
    accuracy: Optional[CachedAccuracy] = None,
) -> ContributionIndices:
    profile = as_profile(s)
    acc = accuracy if accuracy is not None else CachedAccuracy(spec)
    full = acc(profile)
    indices: List[float] = []
    for n, v in enumerate(profile):
        if v == 0:
            indices.append(0.0)
            continue
        without = profile[:n] + (0,) + profile[n + 1:]
        indices.append(full - acc(without))
    return ContributionIndices(tuple(indices), Mechanism.LOO)


def index_sv(
    spec: GameSpec,
    s: Union[StrategyProfile, Sequence[int]],
    accuracy: Optional[CachedAccuracy] = None,
) -> ContributionIndices:
    """Exact Shapley value by enumerating all 2^(N-1) coalitions per client."""
    profile = as_profile(s)
    n_clients = len(profile)
    if n_clients > spec.coalition_cap:
        raise CapacityError(n_clients, spec.coalition_cap)
    acc = accuracy if accuracy is not None else CachedAccuracy(spec)

    # value of every coalition, indexed by member bitmask
    values = [
        acc(tuple(v if mask >> i & 1 else 0 for i, v in enumerate(profile)))
        for mask in range(1 << n_clients)
    ]
    weights = [1.0 / (n_clients * math.comb(n_clients - 1, k)) for k in range(n_clients)]

    indices: List[float] = []
    for i in range(n_clients):
        others = [j for j in range(n_clients) if j != i]
        bit = 1 << i
        total = 0.0
        for k in range(n_clients):
            for members in combinations(others, k):
                mask = 0
                for j in members:
                    mask |= 1 << j
                total += weights[k] * (values[mask | bit] - values[mask])
        indices.append(total)
    return ContributionIndices(tuple(indices), Mechanism.SV)


def shares(indices: ContributionIndices) -> ProfitShares:
    raw = indices.indices
    if not all(math.isfinite(v) for v in raw):
        raise ContractViolation(f"non-finite contribution index in {raw}")
    clipped = [v if v > 0.0 else 0.0 for v in raw]
    total = sum(clipped)
    if total <= FALLBACK_THRESHOLD:
        logger.debug("{} indices {} sum to {}; splitting equally", indices.mechanism.value, raw, total)
        return ProfitShares(tuple([1.0 / len(raw)] * len(raw)), fallback_used=True)
    return ProfitShares(tuple(v / total for v in clipped))


def compute_indices(
    spec: GameSpec,
    s: Union[StrategyProfile, Sequence[int]],
    accuracy: Optional[CachedAccuracy] = None,
) -> ContributionIndices:
    mechanism = spec.mechanism
    if mechanism == Mechanism.EG:
        return index_eg(spec.n_clients)
    if mechanism == Mechanism.LP:
        return index_lp(s, spec.epsilons)
    if mechanism == Mechanism.LOO:
        return index_loo(spec, s, accuracy)
    return index_sv(spec, s, accuracy)


def profit_shares(
    spec: GameSpec,
    s: Union[StrategyProfile, Profile],
    accuracy: Optional[CachedAccuracy] = None,
) -> Tuple[ContributionIndices, ProfitShares]:
    """Raw indices (kept for diagnostics) and the normalized shares of the game's mechanism."""
    indices = compute_indices(spec, s, accuracy)
    return indices, shares(indices)
