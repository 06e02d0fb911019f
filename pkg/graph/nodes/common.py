"""Helpers shared by the subcommand nodes: result records, artifacts and timing."""
import functools
import time
from typing import Any, Callable, Dict, List, Optional, Sequence

from loguru import logger
from pydantic import ValidationError

from game.errors import ConfigError, GameError

from ..state import RunState

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NONCONVERGED = 2


def usage_error(state: RunState, message: str) -> RunState:
    state["last_result"] = {"status": "error", "message": message, "exit_code": EXIT_ERROR}
    state["next_action"] = "report"
    return state


def fail(state: RunState, exc: Exception) -> RunState:
    """Turn a library error into an error record and route to report."""
    result: Dict[str, Any] = {"status": "error", "message": str(exc), "exit_code": EXIT_ERROR, "error": type(exc).__name__}
    if isinstance(exc, ConfigError):
        result["problems"] = exc.problems
    column = getattr(exc, "column", None)
    if column:
        result["column"] = column
    state["last_result"] = result
    state["next_action"] = "report"
    return state


def finish(
    state: RunState,
    status: str,
    exit_code: int,
    artifacts: List[Dict[str, Any]],
    summary: Sequence[str],
    **extra: Any,
) -> RunState:
    state["last_result"] = {"status": status, "exit_code": exit_code, **extra}
    state["artifacts"] = list(state.get("artifacts") or []) + artifacts
    state["summary"] = list(summary)
    state["next_action"] = "report"
    return state


def csv_artifact(name: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Dict[str, Any]:
    return {"name": name, "kind": "csv", "header": list(header), "rows": [list(r) for r in rows]}


def json_artifact(name: str, data: Any) -> Dict[str, Any]:
    return {"name": name, "kind": "json", "data": data}


def yaml_artifact(name: str, data: Any) -> Dict[str, Any]:
    return {"name": name, "kind": "yaml", "data": data}


def show_progress(state: RunState) -> bool:
    return (state.get("verbosity") or "info") == "debug"


def option(state: RunState, key: str, default: Optional[Any] = None) -> Any:
    value = (state.get("options") or {}).get(key)
    return default if value is None else value


def timed(stage: str) -> Callable[[Callable[[RunState], RunState]], Callable[[RunState], RunState]]:
    """Record the node's wall-clock time under state['timings'][stage]; library errors become error records."""

    def wrap(node: Callable[[RunState], RunState]) -> Callable[[RunState], RunState]:
        @functools.wraps(node)
        def run(state: RunState) -> RunState:
            started = time.perf_counter()
            try:
                state = node(state)
            except (GameError, ValidationError) as exc:
                logger.debug("{} failed: {!r}", stage, exc)
                state = fail(state, exc)
            timings = dict(state.get("timings") or {})
            timings[stage] = time.perf_counter() - started
            state["timings"] = timings
            return state

        return run

    return wrap
