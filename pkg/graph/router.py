"""
Node: router_node

Purpose
- Check the requested subcommand and decide where the run starts.

Behavior
- Unknown subcommand -> usage error, straight to report.
- fit without --config -> fit node directly (the config only supplies the baseline).
- Every other subcommand needs --config and goes through load_config first.
"""
from .nodes.common import usage_error
from .state import RunState

COMMANDS = ("solve", "sweep", "compare", "fit", "flsim", "verify", "check")


def router_node(state: RunState) -> RunState:
    command = state.get("command") or ""
    state.setdefault("timings", {})
    state.setdefault("artifacts", [])
    if command not in COMMANDS:
        return usage_error(state, f"unknown subcommand {command!r}; expected one of {', '.join(COMMANDS)}")
    if state.get("config_path"):
        state["next_action"] = "load_config"
    elif command == "fit":
        state["next_action"] = "fit"
    else:
        return usage_error(state, f"{command} needs --config")
    return state
