"""Node: check_node. Audits the loaded game against the structural assumptions; always exits 0."""
from game.assumptions import check_assumptions
from game.model import GameSpec

from ..state import RunState
from .common import EXIT_OK, finish, json_artifact, option, timed


@timed("check")
def check_node(state: RunState) -> RunState:
    spec: GameSpec = state["spec"]
    report = check_assumptions(spec, samples=int(option(state, "check_samples", 50)), seed=spec.seed)
    lines = [f"assumption audit over {report.samples} random profiles (seed {report.seed})"]
    for c in report.checks:
        mark = "ok" if c.passed else f"{c.violations} violations, worst {c.worst:.3g}"
        lines.append(f"  {c.name:<17} {c.checked:>6} checks  {mark}")
    return finish(state, "ok", EXIT_OK, [json_artifact("assumptions.json", report.to_dict())], lines, passed=report.passed)
