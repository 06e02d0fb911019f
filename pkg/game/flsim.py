"""
Desk-scale federated averaging with label-flip noise on synthetic Gaussian blobs.

Each client owns a pool of D_n labelled points, trains on a random subset of s_n of
them whose labels were flipped at rate eps_n, and runs `local_epochs` of minibatch
SGD on a linear softmax classifier per round. The server aggregates with weights
s_n / sum(s) and applies the global learning rate. Accuracy is measured on a clean
held-out test set after every round.

All randomness comes from Philox streams keyed by (seed, purpose, ids...), so any
run can be replayed bit-exactly and runs never share a stream.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.stats import spearmanr

from .errors import ContractViolation, ImpossibleFlipError
from .fit import AccuracySample

if TYPE_CHECKING:
    from .model import GameSpec

PURPOSES = {"centers": 0, "pool": 1, "test": 2, "subset": 3, "flip": 4, "shuffle": 5}


class _Settings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class SyntheticTask(_Settings):
    """C Gaussian blobs in `input_dim` dimensions; centers ~ N(0, center_scale^2)."""
    num_classes: int = Field(default=4, ge=1)
    input_dim: int = Field(default=8, ge=1)
    spread: float = Field(default=1.0, gt=0.0)
    center_scale: float = Field(default=1.5, gt=0.0)
    test_size: int = Field(default=1000, ge=1)


class SimConfig(_Settings):
    rounds: int = Field(default=20, ge=1)
    local_epochs: int = Field(default=5, ge=1)
    batch_size: int = Field(default=64, ge=1)
    local_lr: float = Field(default=0.1, gt=0.0)
    global_lr: float = Field(default=1.0, gt=0.0)
    seed: Optional[int] = None


class FlsimPoint(_Settings):
    s: Tuple[int, ...]
    eps: Tuple[float, ...]

    @model_validator(mode="after")
    def _check(self) -> "FlsimPoint":
        if len(self.s) != len(self.eps):
            raise ValueError(f"{len(self.eps)} noise rates for {len(self.s)} contributions")
        if any(v < 0 for v in self.s):
            raise ValueError("contributions must be non-negative")
        if any(not 0.0 <= e <= 1.0 for e in self.eps):
            raise ValueError("noise rates must lie in [0, 1]")
        return self


class FlsimSettings(_Settings):
    """The `flsim:` config section.

    Grid points come from `points` plus two generated families:
      fractions     every client contributes round(f * D_n) at its own eps_n
      noise_levels  every client contributes D_n at a uniform eps
    With none of the three given, fractions 0.1, 0.2, ..., 1.0 are used.
    """
    task: SyntheticTask = SyntheticTask()
    sim: SimConfig = SimConfig()
    repeats: int = Field(default=3, ge=1)
    points: Tuple[FlsimPoint, ...] = ()
    fractions: Tuple[float, ...] = ()
    noise_levels: Tuple[float, ...] = ()
    n_jobs: int = 1

    @model_validator(mode="after")
    def _check(self) -> "FlsimSettings":
        if any(not 0.0 < f <= 1.0 for f in self.fractions):
            raise ValueError("fractions must lie in (0, 1]")
        if any(not 0.0 <= e <= 1.0 for e in self.noise_levels):
            raise ValueError("noise_levels must lie in [0, 1]")
        return self


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray
    y: np.ndarray

    def __len__(self) -> int:
        return int(self.y.shape[0])

    def subset(self, idx: np.ndarray) -> "Dataset":
        return Dataset(self.x[idx], self.y[idx])


@dataclass(frozen=True)
class SimClient:
    dataset: Dataset
    s: int
    epsilon: float


@dataclass(frozen=True)
class FedAvgRun:
    trajectory: Tuple[float, ...]

    @property
    def final(self) -> float:
        return self.trajectory[-1]

    @property
    def peak_drop(self) -> float:
        """Peak accuracy minus final accuracy (>= 0)."""
        return max(self.trajectory) - self.trajectory[-1]


@dataclass(frozen=True)
class GridRun:
    point: FlsimPoint
    runs: Tuple[FedAvgRun, ...]

    @property
    def mean_trajectory(self) -> Tuple[float, ...]:
        return tuple(float(v) for v in np.mean([r.trajectory for r in self.runs], axis=0))

    @property
    def accuracy(self) -> float:
        return float(np.mean([r.final for r in self.runs]))


@dataclass(frozen=True)
class TrendStatistics:
    spearman: float
    concave_fraction: float
    points: int


def stream(seed: int, purpose: str, *ids: int) -> np.random.Generator:
    """Independent Philox generator for one (seed, purpose, ids) key."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, PURPOSES[purpose], *ids])))


def class_centers(task: SyntheticTask, seed: int) -> np.ndarray:
    return task.center_scale * stream(seed, "centers").standard_normal((task.num_classes, task.input_dim))


def sample_points(task: SyntheticTask, centers: np.ndarray, n: int, rng: np.random.Generator) -> Dataset:
    y = rng.integers(0, task.num_classes, size=n)
    x = centers[y] + task.spread * rng.standard_normal((n, task.input_dim))
    return Dataset(x, y)


def holdout_set(task: SyntheticTask, seed: int) -> Dataset:
    return sample_points(task, class_centers(task, seed), task.test_size, stream(seed, "test"))


def client_pool(task: SyntheticTask, seed: int, client: int, capacity: int) -> Dataset:
    return sample_points(task, class_centers(task, seed), capacity, stream(seed, "pool", client))


def flip_labels(
    dataset: Dataset,
    epsilon: float,
    num_classes: int,
    seed: Union[int, np.random.Generator],
) -> Dataset:
    """Replace each label, with probability epsilon, by a uniformly chosen different class."""
    if not 0.0 <= epsilon <= 1.0:
        raise ContractViolation(f"flip rate {epsilon} outside [0, 1]")
    if epsilon == 0.0:
        return dataset
    if num_classes < 2:
        raise ImpossibleFlipError(f"cannot flip labels with {num_classes} class(es) at rate {epsilon}")
    rng = seed if isinstance(seed, np.random.Generator) else stream(seed, "flip")
    n = len(dataset)
    flip = rng.random(n) < epsilon
    offset = rng.integers(1, num_classes, size=n)
    y = np.where(flip, (dataset.y + offset) % num_classes, dataset.y)
    return Dataset(dataset.x, y)


def _augment(x: np.ndarray) -> np.ndarray:
    return np.hstack([x, np.ones((x.shape[0], 1))])


def init_weights(task: SyntheticTask) -> np.ndarray:
    return np.zeros((task.input_dim + 1, task.num_classes))


def predict_labels(weights: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.argmax(_augment(x) @ weights, axis=1)


def accuracy(weights: np.ndarray, dataset: Dataset) -> float:
    return float(np.mean(predict_labels(weights, dataset.x) == dataset.y))


def local_train(
    weights: np.ndarray,
    dataset: Dataset,
    config: SimConfig,
    rng: np.random.Generator,
    num_classes: Optional[int] = None,
) -> np.ndarray:
    """local_epochs of minibatch SGD on softmax cross-entropy; returns new weights."""
    w = weights.copy()
    n = len(dataset)
    if n == 0:
        return w
    classes = num_classes or w.shape[1]
    x = _augment(dataset.x)
    onehot = np.eye(classes)[dataset.y]
    for _ in range(config.local_epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            logits = x[idx] @ w
            logits -= logits.max(axis=1, keepdims=True)
            p = np.exp(logits)
            p /= p.sum(axis=1, keepdims=True)
            w -= config.local_lr * (x[idx].T @ (p - onehot[idx])) / len(idx)
    return w


def aggregation_weights(s: Sequence[int]) -> Tuple[Fraction, ...]:
    """s_n / sum(s) as exact fractions; they sum to exactly 1."""
    total = sum(s)
    if total <= 0:
        raise ContractViolation("aggregation needs at least one client with s_n > 0")
    return tuple(Fraction(int(v), total) for v in s)


def aggregate(global_weights: np.ndarray, local: Dict[int, np.ndarray], s: Sequence[int], global_lr: float) -> np.ndarray:
    shares = aggregation_weights(s)
    averaged = sum(float(shares[n]) * w for n, w in sorted(local.items()))
    if global_lr == 1.0:
        return averaged
    return global_weights + global_lr * (averaged - global_weights)


def prepare_clients(
    task: SyntheticTask,
    pools: Sequence[Dataset],
    s: Sequence[int],
    eps: Sequence[float],
    seed: int,
    repeat: int = 0,
) -> List[SimClient]:
    """Draw each client's s_n-point subset without replacement and flip its labels."""
    clients = []
    for n, (pool, v, e) in enumerate(zip(pools, s, eps)):
        if v > len(pool):
            raise ContractViolation(f"client {n + 1}: s={v} exceeds pool size {len(pool)}")
        idx = np.sort(stream(seed, "subset", n, repeat).choice(len(pool), size=v, replace=False))
        subset = flip_labels(pool.subset(idx), e, task.num_classes, stream(seed, "flip", n, repeat))
        clients.append(SimClient(subset, v, e))
    return clients


def train_fedavg(
    task: SyntheticTask,
    clients: Sequence[SimClient],
    config: SimConfig,
    repeat: int = 0,
) -> FedAvgRun:
    if config.seed is None:
        raise ContractViolation("SimConfig.seed is required")
    seed = config.seed
    test = holdout_set(task, seed)
    weights = init_weights(task)
    s = [c.s for c in clients]
    if sum(s) == 0:
        baseline = accuracy(weights, test)
        return FedAvgRun(tuple([baseline] * config.rounds))

    trajectory = []
    for r in range(config.rounds):
        local = {
            n: local_train(weights, c.dataset, config, stream(seed, "shuffle", n, repeat, r), task.num_classes)
            for n, c in enumerate(clients)
            if c.s > 0
        }
        weights = aggregate(weights, local, s, config.global_lr)
        trajectory.append(accuracy(weights, test))
    return FedAvgRun(tuple(trajectory))


def _run_point(
    task: SyntheticTask,
    config: SimConfig,
    capacities: Sequence[int],
    point: FlsimPoint,
    repeat: int,
) -> FedAvgRun:
    pools = [client_pool(task, config.seed, n, d) for n, d in enumerate(capacities)]
    clients = prepare_clients(task, pools, point.s, point.eps, config.seed, repeat)
    return train_fedavg(task, clients, config, repeat)


def run_grid(
    task: SyntheticTask,
    points: Sequence[FlsimPoint],
    config: SimConfig,
    capacities: Optional[Sequence[int]] = None,
    repeats: int = 3,
    n_jobs: int = 1,
    progress: bool = False,
) -> List[GridRun]:
    """train_fedavg for every (point, repeat); results come back in grid order."""
    if not points:
        raise ContractViolation("flsim grid is empty")
    if config.seed is None:
        raise ContractViolation("SimConfig.seed is required")
    width = len(points[0].s)
    if any(len(p.s) != width for p in points):
        raise ContractViolation("all grid points need the same number of clients")
    caps = tuple(capacities) if capacities is not None else tuple(max(p.s[n] for p in points) for n in range(width))

    jobs = [(i, r) for i in range(len(points)) for r in range(repeats)]
    if progress:
        from tqdm import tqdm

        jobs = tqdm(jobs, desc="flsim", unit="run")
    runs = Parallel(n_jobs=n_jobs)(delayed(_run_point)(task, config, caps, points[i], r) for i, r in jobs)

    grid = [
        GridRun(point, tuple(runs[i * repeats:(i + 1) * repeats]))
        for i, point in enumerate(points)
    ]
    logger.info("flsim: {} grid points x {} repeats, {} rounds each", len(points), repeats, config.rounds)
    return grid


def samples_from_grid(grid: Sequence[GridRun]) -> List[AccuracySample]:
    return [AccuracySample(tuple(g.point.s), tuple(g.point.eps), g.accuracy) for g in grid]


def generate_samples(
    task: SyntheticTask,
    points: Sequence[FlsimPoint],
    config: SimConfig,
    capacities: Optional[Sequence[int]] = None,
    repeats: int = 3,
    n_jobs: int = 1,
) -> List[AccuracySample]:
    """One sample per grid point: final-round accuracy averaged over repeats."""
    return samples_from_grid(run_grid(task, points, config, capacities, repeats, n_jobs))


def trend_statistics(x: Sequence[float], y: Sequence[float]) -> TrendStatistics:
    """Spearman correlation of y on x and the share of interior points with a non-positive second difference."""
    if len(x) != len(y):
        raise ContractViolation(f"{len(x)} positions for {len(y)} values")
    order = np.argsort(np.asarray(x, dtype=float), kind="stable")
    xs = np.asarray(x, dtype=float)[order]
    ys = np.asarray(y, dtype=float)[order]
    rho = float(spearmanr(xs, ys).correlation) if len(xs) >= 2 else float("nan")
    if len(xs) < 3:
        return TrendStatistics(rho, float("nan"), len(xs))
    slopes = np.diff(ys) / np.diff(xs)
    second = np.diff(slopes)
    return TrendStatistics(rho, float(np.mean(second <= 0.0)), len(xs))


GRID_FAMILIES = ("points", "fractions", "noise_levels")


def grid_families(
    settings: FlsimSettings,
    capacities: Sequence[int],
    epsilons: Sequence[float],
) -> Dict[str, List[FlsimPoint]]:
    """Grid points per family, in GRID_FAMILIES order."""
    fractions = settings.fractions
    if not settings.points and not fractions and not settings.noise_levels:
        fractions = tuple(round(0.1 * k, 1) for k in range(1, 11))
    families = {
        "points": list(settings.points),
        "fractions": [FlsimPoint(s=tuple(int(round(f * d)) for d in capacities), eps=tuple(epsilons)) for f in fractions],
        "noise_levels": [FlsimPoint(s=tuple(capacities), eps=tuple(e for _ in capacities)) for e in settings.noise_levels],
    }
    for p in families["points"]:
        if len(p.s) != len(capacities):
            raise ContractViolation(f"flsim point {p.s} has {len(p.s)} entries for {len(capacities)} clients")
        for n, (v, d) in enumerate(zip(p.s, capacities)):
            if v > d:
                raise ContractViolation(f"flsim point {p.s}: s_{n + 1}={v} exceeds capacity {d}")
    return families


def grid_points(settings: FlsimSettings, capacities: Sequence[int], epsilons: Sequence[float]) -> List[FlsimPoint]:
    families = grid_families(settings, capacities, epsilons)
    return [p for name in GRID_FAMILIES for p in families[name]]


def settings_for(spec: "GameSpec") -> FlsimSettings:
    """The game's flsim section with the simulation seed defaulted to the game seed."""
    settings = spec.flsim or FlsimSettings()
    if settings.sim.seed is None:
        settings = settings.model_copy(update={"sim": settings.sim.model_copy(update={"seed": spec.seed})})
    return settings


def retrain_accuracy(spec: "GameSpec", profile: Sequence[int], repeats: Optional[int] = None) -> float:
    """Accuracy that federated training actually reaches at a contribution profile."""
    settings = settings_for(spec)
    point = FlsimPoint(s=tuple(int(v) for v in profile), eps=spec.epsilons)
    grid = run_grid(
        settings.task, [point], settings.sim, spec.capacities,
        repeats or settings.repeats, settings.n_jobs,
    )
    return grid[0].accuracy
