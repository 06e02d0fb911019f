"""
Node: load_config_node

Reads the YAML config, merges the flag overrides and validates the result into a
GameSpec. Schema problems come back as one error record (exit 1) listing every
offending key path with its line.
"""
from loguru import logger

from game.config import load_config

from ..state import RunState
from .common import timed


@timed("load_config")
def load_config_node(state: RunState) -> RunState:
    path = state["config_path"]
    spec = load_config(path, state.get("overrides") or {})
    logger.info("config {}: {} clients, mechanism {}, seed {}", path, spec.n_clients, spec.mechanism.value, spec.seed)
    state["spec"] = spec
    state["next_action"] = state["command"]
    return state
