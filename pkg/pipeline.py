"""Pipeline entrypoint

Thin layer re-exporting the compiled LangGraph pipeline defined under `graph/`
(router -> load_config -> subcommand node -> report). `cli.py` and the LangGraph
dev UI (`langgraph.json`) both start here. For direct programmatic use:

    from pipeline import invoke_pipeline
    state = invoke_pipeline("solve", config_path="configs/quality_sweep.yaml", out_dir="out/solve")
    print(state["exit_code"])
"""
from typing import Any, Dict, Optional

from graph.build import main_graph as main_pipeline

__all__ = ["main_pipeline", "invoke_pipeline"]


def invoke_pipeline(
    command: str,
    config_path: Optional[str] = None,
    out_dir: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
    options: Optional[Dict[str, Any]] = None,
    verbosity: str = "info",
) -> Dict[str, Any]:
    """Run one subcommand through the graph; returns the final state (exit_code, last_result, ...)."""
    state = {
        "command": command,
        "config_path": config_path,
        "out_dir": out_dir,
        "overrides": dict(overrides or {}),
        "options": dict(options or {}),
        "verbosity": verbosity,
        "timings": {},
        "artifacts": [],
    }
    return main_pipeline.invoke(state)
