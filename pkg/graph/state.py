from typing import Any, Dict, List, Optional, TypedDict


class RunState(TypedDict, total=False):
    command: str  # solve | sweep | compare | fit | flsim | verify | check
    config_path: Optional[str]
    out_dir: Optional[str]
    overrides: Dict[str, Any]  # --seed/--mechanism/--scheme/--grid-step/--include-zero
    options: Dict[str, Any]  # subcommand flags (param, clients, values, samples, profile, ...)
    verbosity: str
    spec: Any  # game.GameSpec once load_config succeeded
    next_action: str
    last_result: Dict[str, Any]
    artifacts: List[Dict[str, Any]]
    summary: List[str]
    timings: Dict[str, float]
    exit_code: int
