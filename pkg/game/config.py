"""
YAML game configs.

load_config reads a YAML document, applies command-line overrides and validates the
merged document into a GameSpec. Every schema problem becomes one entry of a
ConfigError, with the key path (``clients[2].epsilon``) and the 1-based YAML line.
"""

import os
from typing import Any, Dict, List, Optional, Tuple, Union

import yaml
from loguru import logger
from pydantic import ValidationError

from .errors import ConfigError, LocatedValueError
from .model import GameSpec

LineMap = Dict[Tuple[Union[str, int], ...], int]

SOLVER_OVERRIDES = ("scheme", "grid_step", "include_zero", "tau", "max_iters", "initial")


def _walk(node: yaml.Node, prefix: Tuple[Union[str, int], ...], lines: LineMap) -> None:
    lines[prefix] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            key = key_node.value
            _walk(value_node, prefix + (key,), lines)
            lines[prefix + (key,)] = key_node.start_mark.line + 1
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            _walk(item, prefix + (i,), lines)


def line_map(text: str) -> LineMap:
    """Line number of every key and list item, keyed by its path tuple."""
    lines: LineMap = {}
    node = yaml.compose(text, Loader=yaml.SafeLoader)
    if node is not None:
        _walk(node, (), lines)
    return lines


def format_path(loc: Tuple[Union[str, int], ...]) -> str:
    out = ""
    for part in loc:
        if isinstance(part, int):
            out += f"[{part}]"
        else:
            out += f".{part}" if out else str(part)
    return out


def _line_for(loc: Tuple[Union[str, int], ...], lines: LineMap) -> Optional[int]:
    for end in range(len(loc), -1, -1):
        if loc[:end] in lines:
            return lines[loc[:end]]
    return None


def load_document(path: str) -> Tuple[Dict[str, Any], LineMap]:
    if not os.path.isfile(path):
        raise ConfigError([{"path": None, "line": None, "message": "file not found"}], path)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = yaml.safe_load(text)
        lines = line_map(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError([{"path": None, "line": line, "message": f"invalid YAML: {getattr(exc, 'problem', exc)}"}], path)
    if not isinstance(data, dict):
        raise ConfigError([{"path": None, "line": 1, "message": "top level must be a mapping"}], path)
    return data, lines


def apply_overrides(data: Dict[str, Any], overrides: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Merge flag overrides (None means 'not given') into a config document."""
    merged = dict(data)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in SOLVER_OVERRIDES:
            solver = dict(merged.get("solver") or {})
            solver[key] = value
            merged["solver"] = solver
        else:
            merged[key] = value
    return merged


def validate_document(data: Dict[str, Any], lines: Optional[LineMap] = None, source: Optional[str] = None) -> GameSpec:
    try:
        return GameSpec.model_validate(data)
    except ValidationError as exc:
        problems: List[Dict[str, Any]] = []
        for err in exc.errors():
            loc = tuple(err.get("loc", ()))
            cause = (err.get("ctx") or {}).get("error")
            if isinstance(cause, LocatedValueError):
                loc = loc + cause.loc
            problems.append({
                "path": format_path(loc) or None,
                "line": _line_for(loc, lines or {}),
                "message": err.get("msg", "invalid value"),
            })
        raise ConfigError(problems, source)


def load_config(path: str, overrides: Optional[Dict[str, Any]] = None) -> GameSpec:
    data, lines = load_document(path)
    spec = validate_document(apply_overrides(data, overrides), lines, path)
    logger.debug("loaded {}: {} clients, mechanism {}", path, spec.n_clients, spec.mechanism.value)
    return spec
