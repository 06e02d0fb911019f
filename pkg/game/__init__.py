"""
Data-contribution game toolkit for cross-silo federated learning.

model        payoffs, accuracy/profit/privacy models, GameSpec
mechanisms   EG, LP, LOO and SV contribution indices and profit shares
solver       best-response dynamics, Nash verification, sweeps
assumptions  finite-difference audit of the structural assumptions
fit          two-stage surrogate-accuracy curve fitting
flsim        numpy FedAvg simulator with label-flip noise
config       YAML loading with path/line error reporting
results      atomic CSV/JSON/YAML writers and the run manifest
"""

from .assumptions import AssumptionReport, check_assumptions
from .config import apply_overrides, load_config, load_document, validate_document
from .errors import (
    CapacityError,
    ConditioningError,
    ConfigError,
    ContractViolation,
    DegenerateRegressorError,
    GameError,
    ImpossibleFlipError,
    ModelDomainError,
    SampleFormatError,
    UnderdeterminedFitError,
)
from .fit import AccuracySample, FitBounds, FitResult, fit_accuracy, fit_clean, fit_gamma, predict, read_samples, write_samples
from .flsim import (
    FlsimSettings,
    SimConfig,
    SyntheticTask,
    flip_labels,
    generate_samples,
    retrain_accuracy,
    train_fedavg,
    trend_statistics,
)
from .mechanisms import ContributionIndices, ProfitShares, compute_indices, index_eg, index_lp, index_loo, index_sv, profit_shares, shares
from .model import (
    AccuracyModel,
    CachedAccuracy,
    ClientProfile,
    GameSpec,
    Mechanism,
    PrivacyCostModel,
    ProfitModel,
    SolverSettings,
    StrategyProfile,
    UpdateScheme,
    eval_accuracy,
    eval_payoff,
    eval_privacy_cost,
    eval_profit,
    payoff_breakdown,
)
from .solver import EquilibriumReport, NashVerdict, best_response, compare_mechanisms, search_grid, solve, sweep, verify_nash

__version__ = "0.1.0"

__all__ = [
    "AccuracyModel", "AccuracySample", "AssumptionReport", "CachedAccuracy", "CapacityError",
    "ClientProfile", "ConditioningError", "ConfigError", "ContractViolation", "ContributionIndices",
    "DegenerateRegressorError", "EquilibriumReport", "FitBounds", "FitResult", "FlsimSettings",
    "GameError", "GameSpec", "ImpossibleFlipError", "Mechanism", "ModelDomainError", "NashVerdict",
    "PrivacyCostModel", "ProfitModel", "ProfitShares", "SampleFormatError", "SimConfig",
    "SolverSettings", "StrategyProfile", "SyntheticTask", "UnderdeterminedFitError", "UpdateScheme",
    "apply_overrides", "best_response", "check_assumptions", "compare_mechanisms", "compute_indices",
    "eval_accuracy", "eval_payoff", "eval_privacy_cost", "eval_profit", "fit_accuracy", "fit_clean",
    "fit_gamma", "flip_labels", "generate_samples", "index_eg", "index_loo", "index_lp", "index_sv",
    "load_config", "load_document", "payoff_breakdown", "predict", "profit_shares", "read_samples",
    "retrain_accuracy", "search_grid", "shares", "solve", "sweep", "train_fedavg", "trend_statistics",
    "validate_document", "verify_nash", "write_samples",
]
