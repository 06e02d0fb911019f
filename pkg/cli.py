"""Command-line front end: `python cli.py <subcommand> [flags]`.

Exit status: 0 success, 1 usage or config error, 2 non-convergence (solve, sweep,
compare) or a profile that is not an equilibrium (verify).
Verbosity comes from FEDGAME_VERBOSITY (quiet | info | debug), optionally via .env.
"""
import argparse
import sys
from typing import Any, Dict, List, Optional

from pipeline import invoke_pipeline
from utils import _sanitize_path, configure_logging, get_settings

SUBCOMMANDS = {
    "solve": "solve the game with best-response dynamics",
    "sweep": "re-solve the game along one parameter",
    "compare": "solve the game under each allocation mechanism",
    "fit": "fit the surrogate accuracy model to a sample file",
    "flsim": "generate accuracy samples with the federated simulator",
    "verify": "check a profile for profitable unilateral deviations",
    "check": "audit the game against the structural assumptions",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _str_list(text: str) -> List[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fedgame", description="Data-contribution game for cross-silo federated learning")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--config", help="YAML game config")
    common.add_argument("--out", help="output directory (default results/<subcommand>)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--mechanism", choices=["EG", "LP", "LOO", "SV"], help="override the allocation mechanism")
    common.add_argument("--scheme", choices=["jacobi", "gauss_seidel"], help="best-response update scheme")
    common.add_argument("--grid-step", type=int, help="stride of the best-response search grid")
    common.add_argument("--include-zero", dest="include_zero", action="store_true", default=None,
                        help="include s_n = 0 in the search grid")
    common.add_argument("--no-zero", dest="include_zero", action="store_false",
                        help="search {step, 2*step, ..., D_n} only")

    parsers = {name: sub.add_parser(name, parents=[common], help=text) for name, text in SUBCOMMANDS.items()}

    p = parsers["sweep"]
    p.add_argument("--param", required=True, choices=["epsilon", "mu", "capacity"])
    p.add_argument("--clients", type=_int_list, help="1-based client ids to sweep (default all)")
    p.add_argument("--values", type=_float_list, required=True, help="comma-separated parameter values")
    p.add_argument("--retrain", action="store_true", help="train flsim at each equilibrium profile")

    p = parsers["compare"]
    p.add_argument("--mechanisms", type=_str_list, help="subset of EG,LP,LOO,SV")
    p.add_argument("--retrain", action="store_true", help="train flsim at each equilibrium profile")

    parsers["fit"].add_argument("--samples", required=True, help="sample file (s_1..s_N, eps_1..eps_N, accuracy[, weight])")

    p = parsers["verify"]
    p.add_argument("--profile", type=_int_list, help="contribution profile, e.g. 120,80,0")
    p.add_argument("--profile-file", help="summary.json, verdict.json, allocation.csv or a plain list")
    p.add_argument("--tolerance", type=float, help="gain tolerance (default solver.tolerance)")

    parsers["check"].add_argument("--check-samples", type=int, default=50, help="number of random profiles")
    return parser


def state_inputs(args: argparse.Namespace) -> Dict[str, Any]:
    overrides = {
        "seed": args.seed,
        "mechanism": args.mechanism,
        "scheme": args.scheme,
        "grid_step": args.grid_step,
        "include_zero": args.include_zero,
    }
    options = {
        key: getattr(args, key)
        for key in ("param", "clients", "values", "retrain", "mechanisms", "samples",
                    "profile", "profile_file", "tolerance", "check_samples")
        if getattr(args, key, None) is not None
    }
    for key in ("samples", "profile_file"):
        if key in options:
            options[key] = _sanitize_path(options[key])
    return {
        "command": args.command,
        "config_path": _sanitize_path(args.config) if args.config else None,
        "out_dir": _sanitize_path(args.out or f"results/{args.command}"),
        "overrides": overrides,
        "options": options,
    }


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    verbosity = get_settings().verbosity
    configure_logging(verbosity)
    state = invoke_pipeline(verbosity=verbosity, **state_inputs(args))
    return int(state.get("exit_code", 1))


if __name__ == "__main__":
    sys.exit(main())
