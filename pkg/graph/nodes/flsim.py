"""
Node: flsim_node

Runs the federated simulator over the grid in the config's `flsim:` section and
writes the fit-ready samples.csv, per-round trajectories.csv (mean over repeats)
and a summary with the accuracy-vs-data and accuracy-vs-noise trend statistics.
"""
from typing import Any, Dict, List, Optional, Sequence

from game.fit import sample_header, sample_rows
from game.flsim import GRID_FAMILIES, GridRun, grid_families, run_grid, samples_from_grid, settings_for, trend_statistics
from game.model import GameSpec

from ..state import RunState
from .common import EXIT_OK, csv_artifact, finish, json_artifact, show_progress, timed


def trajectory_rows(grid: Sequence[GridRun], families: Sequence[str]) -> List[List[Any]]:
    rows = []
    for i, (run, family) in enumerate(zip(grid, families)):
        for r, acc in enumerate(run.mean_trajectory, start=1):
            rows.append([i, family, r, acc] + list(run.point.s) + list(run.point.eps))
    return rows


def _trend(x: Sequence[float], y: Sequence[float]) -> Optional[Dict[str, Any]]:
    if len(x) < 2:
        return None
    t = trend_statistics(x, y)
    return {"spearman": t.spearman, "concave_fraction": t.concave_fraction, "points": t.points}


@timed("flsim")
def flsim_node(state: RunState) -> RunState:
    spec: GameSpec = state["spec"]
    settings = settings_for(spec)
    families = grid_families(settings, spec.capacities, spec.epsilons)
    points = [p for name in GRID_FAMILIES for p in families[name]]
    labels = [name for name in GRID_FAMILIES for _ in families[name]]

    grid = run_grid(
        settings.task, points, settings.sim, spec.capacities,
        settings.repeats, settings.n_jobs, progress=show_progress(state),
    )
    samples = samples_from_grid(grid)

    by_family = {name: [g for g, label in zip(grid, labels) if label == name] for name in GRID_FAMILIES}
    data_trend = _trend([sum(g.point.s) for g in by_family["fractions"]], [g.accuracy for g in by_family["fractions"]])
    noise_trend = _trend([g.point.eps[0] for g in by_family["noise_levels"]], [g.accuracy for g in by_family["noise_levels"]])

    n = spec.n_clients
    traj_header = ["point", "family", "round", "accuracy"] + [f"s_{i}" for i in range(1, n + 1)] + [f"eps_{i}" for i in range(1, n + 1)]
    summary = {
        "seed": settings.sim.seed,
        "rounds": settings.sim.rounds,
        "repeats": settings.repeats,
        "points": len(points),
        "data_trend": data_trend,
        "noise_trend": noise_trend,
        "peak_drop": [max(r.peak_drop for r in g.runs) for g in grid],
        "accuracy": [g.accuracy for g in grid],
    }
    lines = [f"flsim: {len(points)} grid points x {settings.repeats} repeats, {settings.sim.rounds} rounds"]
    if data_trend:
        lines.append(f"accuracy vs data: spearman {data_trend['spearman']:.3f}, concave fraction {data_trend['concave_fraction']:.2f}")
    if noise_trend:
        lines.append(f"accuracy vs noise: spearman {noise_trend['spearman']:.3f}")
    return finish(
        state,
        "ok",
        EXIT_OK,
        [
            csv_artifact("samples.csv", sample_header(n), sample_rows(samples)),
            csv_artifact("trajectories.csv", traj_header, trajectory_rows(grid, labels)),
            json_artifact("summary.json", summary),
        ],
        lines,
    )
