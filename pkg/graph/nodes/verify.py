"""
Node: verify_node

Checks a contribution profile for profitable unilateral deviations on the solver's
search grid and writes verdict.json.

Profile sources (first match wins)
- --profile 3,0,5
- --profile-file pointing at a solve summary.json ("final"), a verdict.json
  ("profile"), an allocation.csv ("s" column) or a plain comma/space separated list.

Exit 0 when the profile is a Nash equilibrium, 2 otherwise.
"""
import csv
import json
import re
from typing import Any, Iterable, List

from game.errors import ContractViolation
from game.model import GameSpec
from game.solver import verify_nash

from ..state import RunState
from .common import EXIT_NONCONVERGED, EXIT_OK, finish, json_artifact, option, timed, usage_error


def read_profile_file(path: str) -> List[int]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise ContractViolation(f"cannot read profile file {path}: {exc}")
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ContractViolation(f"{path} is not valid JSON: {exc}")
        for key in ("final", "profile"):
            if isinstance(data, dict) and key in data:
                return _integers(path, data[key])
        raise ContractViolation(f"{path} has neither 'final' nor 'profile'")
    first = stripped.splitlines()[0] if stripped else ""
    if re.search(r"[A-Za-z]", first):
        rows = list(csv.DictReader(stripped.splitlines()))
        if not rows or "s" not in rows[0]:
            raise ContractViolation(f"{path} has no 's' column")
        return _integers(path, [r["s"] for r in rows])
    return _integers(path, [v for v in re.split(r"[,\s]+", stripped) if v])


def _integers(path: str, values: Iterable[Any]) -> List[int]:
    try:
        return [int(v) for v in values]
    except (TypeError, ValueError):
        raise ContractViolation(f"{path} is not a list of integers")


@timed("verify")
def verify_node(state: RunState) -> RunState:
    spec: GameSpec = state["spec"]
    profile = option(state, "profile")
    if profile is None and option(state, "profile_file"):
        profile = read_profile_file(option(state, "profile_file"))
    if profile is None:
        return usage_error(state, "verify needs --profile or --profile-file")

    verdict = verify_nash(spec, profile, option(state, "tolerance"))
    doc = {
        "profile": list(profile),
        "is_nash": verdict.is_nash,
        "gain": verdict.gain,
        "client": verdict.client,
        "deviation": verdict.deviation,
        "tolerance": verdict.tolerance,
        "mechanism": spec.mechanism.value,
    }
    if verdict.client is None:
        worst = "no alternative strategy on the search grid"
    else:
        worst = f"worst deviation: client {verdict.client} -> {verdict.deviation}, gain {verdict.gain:.6g}"
    lines = [f"profile {list(profile)} is {'' if verdict.is_nash else 'not '}a Nash equilibrium", worst]
    return finish(
        state,
        "ok" if verdict.is_nash else "not_nash",
        EXIT_OK if verdict.is_nash else EXIT_NONCONVERGED,
        [json_artifact("verdict.json", doc)],
        lines,
    )
