"""
Node: compare_node

Solves the same game under each mechanism (EG, LP, LOO, SV unless --mechanisms
narrows it) and tabulates equilibrium contribution and accuracy per mechanism.
Exit 2 when any mechanism's dynamics did not converge.
"""
from game.flsim import retrain_accuracy
from game.model import GameSpec, Mechanism
from game.solver import compare_mechanisms

from ..state import RunState
from .common import EXIT_NONCONVERGED, EXIT_OK, csv_artifact, finish, json_artifact, option, timed


@timed("compare")
def compare_node(state: RunState) -> RunState:
    spec: GameSpec = state["spec"]
    mechanisms = [Mechanism(m) for m in option(state, "mechanisms", [])] or None
    outcomes = compare_mechanisms(spec, mechanisms)
    retrain = bool(option(state, "retrain", False))

    n = spec.n_clients
    header = (
        ["mechanism", "total", "accuracy", "converged", "is_nash", "iterations"]
        + [f"s_{i}" for i in range(1, n + 1)]
        + ["retrained_accuracy"]
    )
    rows, docs, lines = [], {}, []
    for mechanism, report in outcomes:
        retrained = retrain_accuracy(spec, report.final) if retrain else None
        rows.append(
            [mechanism.value, sum(report.final), report.accuracy, report.converged, report.verdict.is_nash, report.iterations]
            + list(report.final)
            + [retrained]
        )
        doc = report.to_dict()
        doc["retrained_accuracy"] = retrained
        docs[mechanism.value] = doc
        lines.append(
            f"{mechanism.value:>3}: s*={list(report.final)} total={sum(report.final)} accuracy={report.accuracy:.4f}"
            + ("" if report.converged else " (not converged)")
        )
    best = max(outcomes, key=lambda o: o[1].accuracy)[0]
    lines.append(f"highest equilibrium accuracy: {best.value}")
    bad = [m.value for m, r in outcomes if not r.converged]
    return finish(
        state,
        "nonconverged" if bad else "ok",
        EXIT_NONCONVERGED if bad else EXIT_OK,
        [
            csv_artifact("comparison.csv", header, rows),
            json_artifact("summary.json", {"seed": spec.seed, "mechanisms": docs, "best": best.value}),
        ],
        lines,
    )
