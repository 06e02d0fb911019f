"""
Node: report_node

Terminal node of every run. Writes the artifacts collected by the subcommand node
into the output directory (atomically), adds the one manifest.json, prints the
console summary and sets `exit_code`. It never raises: a write failure becomes
exit 1.
"""
import os
import time

from loguru import logger

import game
from game.results import RunManifest, write_csv, write_json, write_manifest, write_yaml
from utils.pretty_print import print_error, print_summary

from ..state import RunState
from .common import EXIT_ERROR

WRITERS = {
    "csv": lambda path, a: write_csv(path, a["header"], a["rows"]),
    "json": lambda path, a: write_json(path, a["data"]),
    "yaml": lambda path, a: write_yaml(path, a["data"]),
}


def report_node(state: RunState) -> RunState:
    started = time.perf_counter()
    result = state.get("last_result") or {"status": "error", "message": "no result", "exit_code": EXIT_ERROR}
    exit_code = int(result.get("exit_code", EXIT_ERROR))
    out_dir = state.get("out_dir")
    files = []

    if result.get("status") == "error":
        print_error(result)
    else:
        print_summary(state.get("command") or "", state.get("summary") or [])

    if out_dir:
        try:
            for artifact in state.get("artifacts") or []:
                path = os.path.join(out_dir, artifact["name"])
                WRITERS[artifact["kind"]](path, artifact)
                files.append(artifact["name"])
            timings = dict(state.get("timings") or {})
            timings["report"] = time.perf_counter() - started
            spec = state.get("spec")
            write_manifest(RunManifest(
                subcommand=state.get("command") or "",
                config_path=state.get("config_path"),
                output_dir=out_dir,
                seed=spec.seed if spec is not None else None,
                version=game.__version__,
                timings=timings,
                files=files,
                exit_code=exit_code,
            ))
            logger.info("wrote {} files to {}", len(files) + 1, out_dir)
        except OSError as exc:
            logger.error("could not write results to {}: {}", out_dir, exc)
            exit_code = EXIT_ERROR

    state["exit_code"] = exit_code
    state["next_action"] = "end"
    return state
