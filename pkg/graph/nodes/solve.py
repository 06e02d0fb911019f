"""
Node: solve_node

Runs best-response dynamics on the loaded game and emits
  summary.json     the EquilibriumReport (round-trips through EquilibriumReport.from_dict)
  trajectory.csv   iteration, s_1..s_N, u_1..u_N, accuracy
  allocation.csv   one row per client at the final profile

Exit 0 on a converged Nash equilibrium, 2 otherwise.
"""
from typing import Any, Dict, List

from game.model import GameSpec
from game.solver import EquilibriumReport, solve

from ..state import RunState
from .common import EXIT_NONCONVERGED, EXIT_OK, csv_artifact, finish, json_artifact, timed


def trajectory_table(spec: GameSpec, report: EquilibriumReport):
    n = spec.n_clients
    header = ["iteration"] + [f"s_{i}" for i in range(1, n + 1)] + [f"u_{i}" for i in range(1, n + 1)] + ["accuracy"]
    rows = [
        [t] + list(profile) + list(payoffs) + [acc]
        for t, (profile, payoffs, acc) in enumerate(
            zip(report.trajectory, report.trajectory_payoffs, report.trajectory_accuracy)
        )
    ]
    return header, rows


def allocation_table(spec: GameSpec, report: EquilibriumReport):
    header = ["client", "epsilon", "mu", "capacity", "s", "index", "share", "payoff"]
    rows = [
        [c.id, c.epsilon, c.privacy_sensitivity, c.capacity, report.final[n], report.indices[n], report.shares[n], report.payoffs[n]]
        for n, c in enumerate(spec.clients)
    ]
    return header, rows


def summary_document(spec: GameSpec, report: EquilibriumReport) -> Dict[str, Any]:
    doc = report.to_dict()
    doc["seed"] = spec.seed
    doc["scheme"] = spec.solver.scheme.value
    return doc


def report_lines(report: EquilibriumReport) -> List[str]:
    v = report.verdict
    lines = [
        f"mechanism {report.mechanism.value}: "
        + (f"converged after {report.iterations} iterations" if report.converged else f"not converged after {report.iterations} iterations"),
        f"s* = {list(report.final)}  (total {sum(report.final)})",
        f"accuracy {report.accuracy:.6f}",
        "shares " + ", ".join(f"{g:.4f}" for g in report.shares),
        "payoffs " + ", ".join(f"{u:.6g}" for u in report.payoffs),
    ]
    if v.is_nash:
        lines.append(f"Nash equilibrium on the search grid (worst gain {v.gain:.3g})")
    else:
        lines.append(f"not a Nash equilibrium: client {v.client} gains {v.gain:.6g} by moving to {v.deviation}")
    return lines


@timed("solve")
def solve_node(state: RunState) -> RunState:
    spec: GameSpec = state["spec"]
    report = solve(spec)
    t_header, t_rows = trajectory_table(spec, report)
    a_header, a_rows = allocation_table(spec, report)
    ok = report.converged and report.verdict.is_nash
    return finish(
        state,
        "ok" if ok else "nonconverged",
        EXIT_OK if ok else EXIT_NONCONVERGED,
        [
            json_artifact("summary.json", summary_document(spec, report)),
            csv_artifact("trajectory.csv", t_header, t_rows),
            csv_artifact("allocation.csv", a_header, a_rows),
        ],
        report_lines(report),
    )
