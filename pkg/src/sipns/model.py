"""SIPNS data model, vector field, Jacobian and closed-form interior equilibrium."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .errors import EvaluationError, ParameterDomainError, StateDomainError
from .kernels import NEG_TOL, PARAM_NAMES

STATE_NAMES = ("S", "I", "P", "N")

# fields that may be zero; everything else must be strictly positive
NONNEGATIVE = frozenset({"mu", "delta_I", "delta_P"})


@dataclass(frozen=True)
class ModelParams:
    """The ten rate constants of the word-of-mouth model.

    ``mu`` is the entrance rate; ``delta_*`` exit rates; ``beta_*`` infection
    forces; ``alpha_*`` comment rates; ``gamma_*`` viscosity rates.
    """

    mu: float
    delta_I: float
    delta_P: float
    delta_N: float
    beta_P: float
    beta_N: float
    alpha_P: float
    alpha_N: float
    gamma_P: float
    gamma_I: float

    def __post_init__(self):
        for name in PARAM_NAMES:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise ParameterDomainError(f"{name} must be a real number, got {value!r}")
            value = float(value)
            object.__setattr__(self, name, value)
            if not math.isfinite(value):
                raise ParameterDomainError(f"{name} must be finite, got {value}")
            if name in NONNEGATIVE:
                if value < 0.0:
                    raise ParameterDomainError(f"{name} must be >= 0, got {value}")
            elif value <= 0.0:
                raise ParameterDomainError(f"{name} must be > 0, got {value}")

    @classmethod
    def default(cls) -> ModelParams:
        return cls(
            mu=1.0,
            delta_I=0.05,
            delta_P=0.05,
            delta_N=0.1,
            beta_P=0.01,
            beta_N=0.01,
            alpha_P=0.2,
            alpha_N=0.1,
            gamma_P=0.1,
            gamma_I=0.1,
        )

    @classmethod
    def from_array(cls, values) -> ModelParams:
        return cls(**dict(zip(PARAM_NAMES, (float(v) for v in values))))

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in PARAM_NAMES], dtype=np.float64)

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def with_(self, **changes) -> ModelParams:
        return replace(self, **changes)


@dataclass(frozen=True)
class MarketState:
    """Expected counts of susceptible, infected, positive and negative individuals.

    Components in ``[-1e-9, 0)`` are integrator round-off and are clamped to 0.
    """

    S: float
    I: float
    P: float
    N: float

    def __post_init__(self):
        for name in STATE_NAMES:
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise StateDomainError(f"{name} must be finite, got {value}")
            if value < -NEG_TOL:
                raise StateDomainError(f"{name} must be >= 0, got {value}")
            object.__setattr__(self, name, max(value, 0.0))

    @classmethod
    def from_array(cls, values) -> MarketState:
        return cls(*(float(v) for v in values[:4]))

    def as_array(self) -> np.ndarray:
        return np.array([self.S, self.I, self.P, self.N], dtype=np.float64)

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in STATE_NAMES}

    @property
    def total(self) -> float:
        return self.S + self.I + self.P + self.N


@dataclass(frozen=True)
class Scenario:
    """Initial state, campaign horizon ``T`` and integrator settings."""

    initial: MarketState
    horizon: float
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not isinstance(self.initial, MarketState):
            raise ParameterDomainError("initial must be a MarketState")
        h = float(self.horizon)
        if not (math.isfinite(h) and h > 0.0):
            raise ParameterDomainError(f"horizon must be finite and > 0, got {self.horizon}")
        object.__setattr__(self, "horizon", h)
        if not 0.0 < self.rel_tol < 1.0:
            raise ParameterDomainError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if not (math.isfinite(self.abs_tol) and self.abs_tol > 0.0):
            raise ParameterDomainError(f"abs_tol must be > 0, got {self.abs_tol}")
        if isinstance(self.max_steps, bool) or int(self.max_steps) != self.max_steps or self.max_steps < 1:
            raise ParameterDomainError(f"max_steps must be a positive integer, got {self.max_steps}")
        object.__setattr__(self, "rel_tol", float(self.rel_tol))
        object.__setattr__(self, "abs_tol", float(self.abs_tol))
        object.__setattr__(self, "max_steps", int(self.max_steps))

    @classmethod
    def default(cls) -> Scenario:
        return cls(initial=MarketState(100.0, 1.0, 0.0, 0.0), horizon=100.0)

    def with_(self, **changes) -> Scenario:
        return replace(self, **changes)


@dataclass(frozen=True)
class Derivative:
    dS: float
    dI: float
    dP: float
    dN: float

    def as_array(self) -> np.ndarray:
        return np.array([self.dS, self.dI, self.dP, self.dN], dtype=np.float64)


def _augmented(state: MarketState) -> np.ndarray:
    y = np.zeros(5)
    y[:4] = state.as_array()
    return y


def vector_field(params: ModelParams, state: MarketState) -> Derivative:
    out = np.empty(5)
    kernels.rhs(params.as_array(), _augmented(state), out)
    for name, value in zip(("dS", "dI", "dP", "dN"), out[:4]):
        if not math.isfinite(value):
            raise EvaluationError(f"non-finite derivative component {name}={value}")
    return Derivative(*(float(v) for v in out[:4]))


def jacobian(params: ModelParams, state: MarketState) -> np.ndarray:
    """Analytic 4x4 Jacobian of the vector field, rows and columns in (S, I, P, N) order."""
    out = np.empty((4, 4))
    kernels.jacobian(params.as_array(), state.as_array(), out)
    return out


def equilibrium(params: ModelParams) -> MarketState:
    """Unique interior equilibrium, obtained by zeroing each equation in turn.

    S* comes from dI = dP = 0, I* from the flow balance, then P* and N*
    follow linearly from I*.
    """
    p = params
    leave_i = p.alpha_P + p.alpha_N + p.gamma_I + p.delta_I
    leave_p = p.gamma_P + p.delta_P
    s = leave_i * leave_p / (p.beta_P * p.alpha_P)
    denom = p.delta_I + p.alpha_P * p.delta_P / leave_p + p.alpha_N + p.beta_N * p.alpha_N * s / p.delta_N
    i = p.mu / denom
    pos = p.alpha_P * i / leave_p
    neg = p.alpha_N * i / p.delta_N
    values = (s, i, pos, neg)
    if not all(math.isfinite(v) for v in values):
        raise ParameterDomainError(f"equilibrium is not finite for {params}: {values}")
    return MarketState(*values)


def residual(params: ModelParams, state: MarketState) -> float:
    """Infinity norm of the vector field at ``state``."""
    return float(np.max(np.abs(vector_field(params, state).as_array())))
