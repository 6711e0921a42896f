from .geometry import NetworkGeometry, SegmentPlan, segment_plan
from .antenna import AntennaPattern
from .link import LinkBudget, SnrModel
from .traffic import DataBudget
from .allocation import PowerAllocation, Scheme, SCHEME_ORDER
from .schemes import OperatingPoint, SchemeOutcome, SchemeResult, evaluate_schemes
from .limits import LimitConstants, LimitForm
from .montecarlo import MonteCarloSummary, VelocityErrorModel, run_montecarlo
from .errors import (
    RailPowerError,
    DomainError,
    DegenerateInputError,
    ModeMismatchError,
    ConvergenceError,
    ConfigError
)

__all__ = [
    "NetworkGeometry",
    "SegmentPlan",
    "segment_plan",
    "AntennaPattern",
    "LinkBudget",
    "SnrModel",
    "DataBudget",
    "PowerAllocation",
    "Scheme",
    "SCHEME_ORDER",
    "OperatingPoint",
    "SchemeOutcome",
    "SchemeResult",
    "evaluate_schemes",
    "LimitConstants",
    "LimitForm",
    "MonteCarloSummary",
    "VelocityErrorModel",
    "run_montecarlo",
    "RailPowerError",
    "DomainError",
    "DegenerateInputError",
    "ModeMismatchError",
    "ConvergenceError",
    "ConfigError"
]
