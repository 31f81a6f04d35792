"""Word-of-mouth marketing dynamics (SIPNS model): simulation, campaign profit,
parameter studies and profit maximization."""

from ._accel import BACKEND
from .analysis import (
    EXPECTED_DIRECTIONS,
    SteadyStateResult,
    SweepReport,
    ThresholdResult,
    monotonicity_check,
    steady_state,
    sweep,
    threshold_search,
)
from .errors import (
    EvaluationError,
    NegativityError,
    NonConvergenceError,
    ParameterDomainError,
    SIPNSError,
    SolverError,
)
from .model import Derivative, MarketState, ModelParams, Scenario, equilibrium, jacobian, vector_field
from .optimize import ControlSpec, OptimResult, maximize_profit, sensitivity
from .solver import Trajectory, integrate, profit

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ControlSpec",
    "Derivative",
    "EXPECTED_DIRECTIONS",
    "EvaluationError",
    "MarketState",
    "ModelParams",
    "NegativityError",
    "NonConvergenceError",
    "OptimResult",
    "ParameterDomainError",
    "SIPNSError",
    "Scenario",
    "SolverError",
    "SteadyStateResult",
    "SweepReport",
    "ThresholdResult",
    "Trajectory",
    "equilibrium",
    "integrate",
    "jacobian",
    "maximize_profit",
    "monotonicity_check",
    "profit",
    "sensitivity",
    "steady_state",
    "sweep",
    "threshold_search",
    "vector_field",
]
