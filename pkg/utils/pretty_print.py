import sys
from typing import Any, Dict, Sequence


def print_summary(command: str, lines: Sequence[str], indent: bool = False) -> None:
    if not lines:
        return
    print(f"[{command}]")
    prefix = "\t" if indent else ""
    for line in lines:
        print(prefix + line)


def print_error(result: Dict[str, Any]) -> None:
    print(f"error: {result.get('message', 'failed')}", file=sys.stderr)
    # one line per config problem, already carrying path and line
    for p in result.get("problems") or []:
        where = p.get("path") or "(root)"
        if p.get("line"):
            where += f" (line {p['line']})"
        print(f"  {where}: {p.get('message')}", file=sys.stderr)
