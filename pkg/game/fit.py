"""
Curve fitting of the surrogate accuracy model

    A(s, eps) = a1*log(a2*S + a3) + a4*S + a5 - gamma * sum_n eps_n s_n / S,   S = sum_n s_n

in two stages: clean samples (all eps = 0) determine a1..a5, then gamma is the
closed-form weighted least-squares slope of the residuals on the noise regressor.

Stage one searches (a2, a3) on a logarithmic grid that is refined around the best
cell; for each cell (a1, a4, a5) come from an exact weighted linear least-squares
solve. Ties go to the lexicographically smallest (a2, a3). Samples are put in a
canonical order first, so the result does not depend on input order.

Samples with S = 0 predict the configured baseline and are left out of both stages.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from .errors import (
    ConditioningError,
    ContractViolation,
    DegenerateRegressorError,
    SampleFormatError,
    UnderdeterminedFitError,
)
from .results import write_csv

MIN_DISTINCT_TOTALS = 5
DEFAULT_BASELINE = 0.1


@dataclass(frozen=True)
class AccuracySample:
    s: Tuple[int, ...]
    eps: Tuple[float, ...]
    observed: float
    weight: float = 1.0

    def __post_init__(self):
        if len(self.s) != len(self.eps):
            raise ContractViolation(f"{len(self.eps)} noise rates for {len(self.s)} contributions")
        if not 0.0 <= self.observed <= 1.0:
            raise ContractViolation(f"observed accuracy {self.observed} outside [0, 1]")
        if not self.weight > 0.0:
            raise ContractViolation(f"sample weight must be positive, got {self.weight}")
        if any(v < 0 for v in self.s):
            raise ContractViolation(f"negative contribution in {self.s}")

    @property
    def total(self) -> int:
        return sum(self.s)

    @property
    def noise_term(self) -> float:
        """sum_n eps_n s_n / S (0 when S = 0)."""
        total = self.total
        if total == 0:
            return 0.0
        return sum(e * v for e, v in zip(self.eps, self.s)) / total

    @property
    def is_clean(self) -> bool:
        return all(e == 0.0 for e in self.eps)


@dataclass(frozen=True)
class FitBounds:
    alpha2: Tuple[float, float] = (1e-8, 10.0)
    alpha3: Tuple[float, float] = (1e-6, 1e3)
    grid_points: int = 17
    min_levels: int = 3
    max_levels: int = 40
    rel_tol: float = 1e-10

    def __post_init__(self):
        for name in ("alpha2", "alpha3"):
            lo, hi = getattr(self, name)
            if not 0.0 < lo < hi:
                raise ContractViolation(f"{name} bounds must satisfy 0 < lo < hi, got {(lo, hi)}")
        if self.grid_points < 3 or self.grid_points % 2 == 0:
            raise ContractViolation(f"grid_points must be odd and >= 3, got {self.grid_points}")


@dataclass(frozen=True)
class FitResult:
    alpha: Tuple[float, float, float, float, float]
    gamma: float
    rmse: float
    iterations: int
    converged: bool
    n_samples: int = 0
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def to_accuracy_section(self, baseline: float = DEFAULT_BASELINE) -> Dict[str, Any]:
        """Fragment usable verbatim as the `accuracy:` section of a game config."""
        return {
            "variant": "surrogate",
            "alpha": [float(a) for a in self.alpha],
            "gamma": float(self.gamma),
            "baseline": float(baseline),
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": [float(a) for a in self.alpha],
            "gamma": float(self.gamma),
            "rmse": float(self.rmse),
            "iterations": self.iterations,
            "converged": self.converged,
            "n_samples": self.n_samples,
            "diagnostics": dict(self.diagnostics),
        }


def _canonical(samples: Sequence[AccuracySample]) -> List[AccuracySample]:
    return sorted(samples, key=lambda x: (x.s, x.eps, x.observed, x.weight))


def _clean_surface(alpha: Sequence[float], totals: np.ndarray) -> np.ndarray:
    a1, a2, a3, a4, a5 = alpha
    return a1 * np.log(a2 * totals + a3) + a4 * totals + a5


def predict(
    fit: FitResult,
    s: Sequence[int],
    eps: Sequence[float],
    baseline: float = DEFAULT_BASELINE,
) -> float:
    """Unclamped fitted accuracy at (s, eps)."""
    total = sum(s)
    if total == 0:
        return baseline
    clean = float(_clean_surface(fit.alpha, np.array([float(total)]))[0])
    return clean - fit.gamma * sum(e * v for e, v in zip(eps, s)) / total


def weighted_rmse(
    fit: FitResult,
    samples: Sequence[AccuracySample],
    baseline: float = DEFAULT_BASELINE,
) -> float:
    if not samples:
        return 0.0
    w = np.array([x.weight for x in samples])
    r = np.array([predict(fit, x.s, x.eps, baseline) - x.observed for x in samples])
    return float(math.sqrt(float(np.sum(w * r * r)) / float(np.sum(w))))


class _LinearStage:
    """Exact weighted least squares for (a1, a4, a5) at fixed (a2, a3)."""

    def __init__(self, totals: np.ndarray, observed: np.ndarray, weights: np.ndarray):
        self.x = totals
        self.sw = np.sqrt(weights)
        self.y = observed * self.sw

    def solve(self, a2: float, a3: float) -> Optional[Tuple[float, Tuple[float, float, float]]]:
        design = np.column_stack([np.log(a2 * self.x + a3), self.x, np.ones_like(self.x)])
        weighted = design * self.sw[:, None]
        norms = np.linalg.norm(weighted, axis=0)
        if np.any(norms == 0.0):
            return None
        coef, _, rank, _ = np.linalg.lstsq(weighted / norms, self.y, rcond=None)
        if rank < 3:
            return None
        coef = coef / norms
        resid = weighted @ coef - self.y
        return float(resid @ resid), (float(coef[0]), float(coef[1]), float(coef[2]))


def _axes(centre, half, log_lo, log_hi, points):
    """Log-spaced axes around centre, clipped to the bounds; the middle entry is centre itself."""
    offsets = np.linspace(-1.0, 1.0, points)
    axes = []
    for k in range(2):
        axis = np.clip(centre[k] + half[k] * offsets, log_lo[k], log_hi[k])
        axis[points // 2] = centre[k]
        axes.append(np.unique(10.0 ** axis))
    return axes


def fit_clean(samples: Sequence[AccuracySample], bounds: Optional[FitBounds] = None) -> FitResult:
    """Fit a1..a5 on clean samples; gamma of the result is 0."""
    bounds = bounds or FitBounds()
    if any(not x.is_clean for x in samples):
        raise ContractViolation("fit_clean needs samples with all eps = 0")
    used = [x for x in _canonical(samples) if x.total > 0]
    distinct = len({x.total for x in used})
    if distinct < MIN_DISTINCT_TOTALS:
        raise UnderdeterminedFitError(
            f"need samples at >= {MIN_DISTINCT_TOTALS} distinct total contributions, got {distinct}"
        )
    stage = _LinearStage(
        np.array([float(x.total) for x in used]),
        np.array([x.observed for x in used]),
        np.array([x.weight for x in used]),
    )

    log_lo = np.log10([bounds.alpha2[0], bounds.alpha3[0]])
    log_hi = np.log10([bounds.alpha2[1], bounds.alpha3[1]])
    centre = (log_lo + log_hi) / 2.0
    half = (log_hi - log_lo) / 2.0
    best = None
    previous = None
    converged = False
    levels = 0
    skipped = 0
    for level in range(bounds.max_levels):
        levels = level + 1
        axis2, axis3 = _axes(centre, half, log_lo, log_hi, bounds.grid_points)
        level_best = None
        for a2 in axis2:
            for a3 in axis3:
                solved = stage.solve(float(a2), float(a3))
                if solved is None:
                    skipped += 1
                    continue
                objective, linear = solved
                if level_best is None or objective < level_best[0]:
                    level_best = (objective, float(a2), float(a3), linear)
        if level_best is None:
            if best is None:
                raise ConditioningError(
                    "every inner least-squares system was rank deficient",
                    {"samples": len(used), "distinct_totals": distinct, "alpha2": bounds.alpha2, "alpha3": bounds.alpha3},
                )
            break
        if best is None or level_best[0] <= best[0]:
            best = level_best
        logger.debug("fit level {}: objective {:.6g} at alpha2={:.6g} alpha3={:.6g}", levels, best[0], best[1], best[2])

        if previous is not None and levels >= bounds.min_levels:
            decrease = (previous - best[0]) / previous if previous > 0 else 0.0
            if decrease < bounds.rel_tol:
                converged = True
                break
        previous = best[0]

        # zoom to one grid spacing around the best cell
        half = 2.0 * half / (bounds.grid_points - 1)
        centre = np.log10([best[1], best[2]])

    if skipped:
        logger.debug("fit skipped {} rank-deficient grid cells", skipped)
    objective, a2, a3, (a1, a4, a5) = best
    partial = FitResult((a1, a2, a3, a4, a5), 0.0, 0.0, levels, converged)
    rmse = weighted_rmse(partial, used)
    return FitResult(
        (a1, a2, a3, a4, a5), 0.0, rmse, levels, converged, len(used),
        {"objective": objective, "skipped_cells": skipped},
    )


def fit_gamma(
    samples: Sequence[AccuracySample],
    alpha: Sequence[float],
) -> float:
    """gamma = sum w z r / sum w z^2 with z the noise term and r = A(s,0) - observed; clamped at 0."""
    used = [x for x in _canonical(samples) if x.total > 0]
    z = np.array([x.noise_term for x in used])
    w = np.array([x.weight for x in used])
    denominator = float(np.sum(w * z * z))
    if denominator == 0.0:
        raise DegenerateRegressorError("no sample carries label noise; gamma is not identifiable")
    totals = np.array([float(x.total) for x in used])
    r = _clean_surface(alpha, totals) - np.array([x.observed for x in used])
    gamma = float(np.sum(w * z * r)) / denominator
    if gamma < 0.0:
        logger.warning("fitted gamma {:.6g} < 0 (noise appears to help); clamped to 0", gamma)
        gamma = 0.0
    return gamma


def fit_accuracy(
    samples: Sequence[AccuracySample],
    bounds: Optional[FitBounds] = None,
    baseline: float = DEFAULT_BASELINE,
) -> FitResult:
    """Both stages; gamma is 0 when no sample carries noise. rmse is over all samples."""
    ordered = _canonical(samples)
    clean = fit_clean([x for x in ordered if x.is_clean], bounds)
    gamma = 0.0
    if any(x.noise_term > 0.0 for x in ordered):
        gamma = fit_gamma(ordered, clean.alpha)
    result = FitResult(clean.alpha, gamma, 0.0, clean.iterations, clean.converged)
    rmse = weighted_rmse(result, ordered, baseline)
    logger.info("fit: alpha={} gamma={:.6g} rmse={:.3g} over {} samples", clean.alpha, gamma, rmse, len(ordered))
    return FitResult(clean.alpha, gamma, rmse, clean.iterations, clean.converged, len(ordered), clean.diagnostics)


def sample_header(n_clients: int) -> List[str]:
    return (
        [f"s_{i}" for i in range(1, n_clients + 1)]
        + [f"eps_{i}" for i in range(1, n_clients + 1)]
        + ["accuracy", "weight"]
    )


def sample_rows(samples: Sequence[AccuracySample]) -> List[List[Any]]:
    return [list(x.s) + [float(e) for e in x.eps] + [float(x.observed), float(x.weight)] for x in samples]


def write_samples(path: str, samples: Sequence[AccuracySample]) -> str:
    if not samples:
        raise ContractViolation("no samples to write")
    return write_csv(path, sample_header(len(samples[0].s)), sample_rows(samples))


def _number(raw: str, column: str, line: int, kind=float):
    try:
        value = kind(raw)
    except (TypeError, ValueError):
        raise SampleFormatError(f"line {line}: {raw!r} is not a number", column)
    if kind is float and not math.isfinite(value):
        raise SampleFormatError(f"line {line}: non-finite value {raw!r}", column)
    return value


def read_samples(path: str) -> List[AccuracySample]:
    """Read the delimited sample file: s_1..s_N, eps_1..eps_N, accuracy[, weight]."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise SampleFormatError(f"cannot read {path}: {exc}")
    try:
        return _parse_samples(path, rows)
    except csv.Error as exc:
        raise SampleFormatError(f"{path}: {exc}")


def _parse_samples(path: str, lines: List[str]) -> List[AccuracySample]:
    reader = csv.DictReader(lines)
    header = [h.strip() for h in (reader.fieldnames or [])]
    if not header:
        raise SampleFormatError(f"{path} is empty")
    reader.fieldnames = header
    n_clients = sum(1 for h in header if h.startswith("s_") and h[2:].isdigit())
    if n_clients == 0:
        raise SampleFormatError("no contribution columns", "s_1")
    required = (
        [f"s_{i}" for i in range(1, n_clients + 1)]
        + [f"eps_{i}" for i in range(1, n_clients + 1)]
        + ["accuracy"]
    )
    for column in required:
        if column not in header:
            raise SampleFormatError("missing column", column)
    has_weight = "weight" in header

    samples = []
    for line, row in enumerate(reader, start=2):
        s = tuple(_number(row[f"s_{i}"], f"s_{i}", line, int) for i in range(1, n_clients + 1))
        eps = tuple(_number(row[f"eps_{i}"], f"eps_{i}", line) for i in range(1, n_clients + 1))
        observed = _number(row["accuracy"], "accuracy", line)
        weight = _number(row["weight"], "weight", line) if has_weight and row["weight"] not in ("", None) else 1.0
        if not 0.0 <= observed <= 1.0:
            raise SampleFormatError(f"line {line}: accuracy {observed} outside [0, 1]", "accuracy")
        if weight <= 0.0:
            raise SampleFormatError(f"line {line}: weight must be positive", "weight")
        for i, (v, e) in enumerate(zip(s, eps), start=1):
            if v < 0:
                raise SampleFormatError(f"line {line}: negative contribution", f"s_{i}")
            if not 0.0 <= e <= 1.0:
                raise SampleFormatError(f"line {line}: noise rate outside [0, 1]", f"eps_{i}")
        samples.append(AccuracySample(s, eps, observed, weight))
    logger.debug("read {} samples for {} clients from {}", len(samples), n_clients, path)
    return samples
