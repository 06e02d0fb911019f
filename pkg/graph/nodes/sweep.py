"""
Node: sweep_node

Re-solves the game for each value of --param (epsilon | mu | capacity) applied to
--clients (1-based, default all). sweep.csv has one row per value per client; a
point that failed carries its error message and empty equilibrium columns.
With --retrain each equilibrium profile is also trained with flsim.

Exit 2 when any point failed or did not converge.
"""
from typing import Any, Dict, List, Optional

from tqdm import tqdm

from game.flsim import retrain_accuracy
from game.model import GameSpec
from game.solver import SWEEP_PARAMETERS, SweepPoint, sweep

from ..state import RunState
from .common import EXIT_NONCONVERGED, EXIT_OK, csv_artifact, finish, json_artifact, option, show_progress, timed, usage_error

HEADER = [
    "parameter", "value", "client", "swept", "s_star", "payoff", "share", "index",
    "accuracy", "converged", "is_nash", "iterations", "retrained_accuracy", "error",
]


def point_rows(spec: GameSpec, point: SweepPoint, retrained: Optional[float]) -> List[List[Any]]:
    rows = []
    for n in range(spec.n_clients):
        client = n + 1
        swept = client in point.clients
        if point.report is None:
            rows.append([point.parameter, point.value, client, swept] + [None] * 8 + [None, point.error])
            continue
        r = point.report
        rows.append([
            point.parameter, point.value, client, swept, r.final[n], r.payoffs[n], r.shares[n], r.indices[n],
            r.accuracy, r.converged, r.verdict.is_nash, r.iterations, retrained, None,
        ])
    return rows


def point_summary(point: SweepPoint, retrained: Optional[float]) -> Dict[str, Any]:
    doc: Dict[str, Any] = {"value": point.value, "error": point.error}
    if point.report is not None:
        r = point.report
        doc.update({
            "final": list(r.final),
            "converged": r.converged,
            "iterations": r.iterations,
            "is_nash": r.verdict.is_nash,
            "accuracy": r.accuracy,
            "shares": list(r.shares),
            "payoffs": list(r.payoffs),
            "retrained_accuracy": retrained,
        })
    return doc


@timed("sweep")
def sweep_node(state: RunState) -> RunState:
    spec: GameSpec = state["spec"]
    parameter = option(state, "param")
    values = option(state, "values")
    if parameter not in SWEEP_PARAMETERS:
        return usage_error(state, f"sweep needs --param in {SWEEP_PARAMETERS}")
    if not values:
        return usage_error(state, "sweep needs --values")
    clients = tuple(option(state, "clients") or range(1, spec.n_clients + 1))

    iterable = tqdm(values, desc=f"sweep {parameter}", unit="point") if show_progress(state) else values
    points = sweep(spec, parameter, clients, iterable)

    retrain = bool(option(state, "retrain", False))
    rows, docs = [], []
    for point in points:
        retrained = None
        if retrain and point.report is not None:
            retrained = retrain_accuracy(spec, point.report.final)
        rows.extend(point_rows(spec, point, retrained))
        docs.append(point_summary(point, retrained))

    bad = [p.value for p in points if p.report is None or not p.report.converged]
    lines = [f"sweep {parameter} over {list(values)} for clients {list(clients)}"]
    for point in points:
        if point.report is None:
            lines.append(f"  {parameter}={point.value}: failed ({point.error})")
        else:
            lines.append(
                f"  {parameter}={point.value}: s*={list(point.report.final)}"
                + ("" if point.report.converged else " (not converged)")
            )
    summary = {
        "parameter": parameter,
        "clients": list(clients),
        "values": list(values),
        "mechanism": spec.mechanism.value,
        "seed": spec.seed,
        "points": docs,
    }
    return finish(
        state,
        "nonconverged" if bad else "ok",
        EXIT_NONCONVERGED if bad else EXIT_OK,
        [csv_artifact("sweep.csv", HEADER, rows), json_artifact("summary.json", summary)],
        lines,
        failed_values=bad,
    )
