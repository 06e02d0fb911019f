"""
Error hierarchy for the contribution-game toolkit.

Library code raises these; pipeline nodes catch `GameError` and turn it into a
`{"status": "error", ...}` result so the report node can set the exit code.
"""

from typing import Any, Dict, List, Optional, Tuple, Union


class GameError(Exception):
    """Base class for every failure raised by the `game` package."""


class ModelDomainError(GameError, ValueError):
    """A model parameter (or a derived quantity such as a log argument) is out of domain."""

    def __init__(self, parameter: str, message: str):
        self.parameter = parameter
        super().__init__(f"{parameter}: {message}")


class ContractViolation(GameError, ValueError):
    """An argument breaks an operation's precondition (e.g. s_n above capacity)."""


class CapacityError(GameError):
    """Exact coalition enumeration refused because N exceeds the configured cap."""

    def __init__(self, n_clients: int, cap: int):
        self.n_clients = n_clients
        self.cap = cap
        super().__init__(
            f"Shapley enumeration needs N <= coalition_cap={cap}, got N={n_clients}"
        )


class ConfigError(GameError):
    """Config file could not be parsed or failed schema validation.

    `problems` holds one dict per issue: {"path": "clients[2].epsilon", "line": 14, "message": "..."}.
    """

    def __init__(self, problems: List[Dict[str, Any]], source: Optional[str] = None):
        self.problems = problems
        self.source = source
        lines = []
        for p in problems:
            where = p.get("path") or "(root)"
            if p.get("line"):
                where = f"{where} (line {p['line']})"
            lines.append(f"{where}: {p.get('message')}")
        prefix = f"{source}: " if source else ""
        super().__init__(prefix + "; ".join(lines))


class SampleFormatError(GameError, ValueError):
    """Accuracy-sample file is malformed; `column` names the offending column when known."""

    def __init__(self, message: str, column: Optional[str] = None):
        self.column = column
        super().__init__(f"{column}: {message}" if column else message)


class UnderdeterminedFitError(GameError, ValueError):
    """Not enough (distinct) samples to determine the fitted parameters."""


class ConditioningError(GameError):
    """Every inner least-squares system of the fit was rank deficient."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class DegenerateRegressorError(GameError, ValueError):
    """The noise regressor is identically zero, so gamma cannot be estimated."""


class ImpossibleFlipError(GameError, ValueError):
    """Label flipping requested on a task with a single class."""


class LocatedValueError(ValueError):
    """A cross-field check failed; `loc` is the key path of the offending value, e.g. ("solver", "initial", 2).

    Raised inside pydantic validators, so it reaches callers wrapped in a ValidationError.
    """

    def __init__(self, loc: Tuple[Union[str, int], ...], message: str):
        self.loc = tuple(loc)
        super().__init__(message)
