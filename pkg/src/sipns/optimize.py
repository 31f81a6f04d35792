"""Profit maximization over a box of controllable rates, plus finite-difference
sensitivity of profit to every rate."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import qmc

from . import solver
from .errors import DegenerateSpecError, ParameterDomainError
from .kernels import PARAM_NAMES
from .model import ModelParams, Scenario

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

SENSITIVITY_STEP = 1e-5
SENSITIVITY_TIGHTEN = 100.0
POLL_START = 0.25
POLL_MIN = 1e-6
DEFAULT_BUDGET = 2000
DEFAULT_STARTS = 8


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float):
    """Maximize a unimodal ``f`` on ``[a, b]``.

    Returns ``(x, f(x), (lo, hi))`` where ``x`` is the best interior point
    evaluated and ``hi - lo < tol``.
    """
    lo, hi = min(a, b), max(a, b)
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo >= tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)
    if fc >= fd:
        return c, fc, (lo, hi)
    return d, fd, (lo, hi)


@dataclass(frozen=True)
class ControlSpec:
    """Which rates the marketer may move, their box, and the rest held fixed."""

    controllable: tuple[str, ...]
    lower: dict[str, float]
    upper: dict[str, float]
    fixed: ModelParams

    def __post_init__(self):
        object.__setattr__(self, "controllable", tuple(self.controllable))
        if not self.controllable:
            raise DegenerateSpecError("no controllable parameters")
        if len(set(self.controllable)) != len(self.controllable):
            raise ParameterDomainError("controllable names repeat")
        for name in self.controllable:
            if name not in PARAM_NAMES:
                raise ParameterDomainError(f"unknown parameter {name!r}")
            if name not in self.lower or name not in self.upper:
                raise ParameterDomainError(f"missing bounds for {name}")
            lo, hi = float(self.lower[name]), float(self.upper[name])
            if not lo < hi:
                raise ParameterDomainError(f"{name}: lower {lo} must be < upper {hi}")
            # both corners must be valid rates
            self.fixed.with_(**{name: lo})
            self.fixed.with_(**{name: hi})
        extra = (set(self.lower) | set(self.upper)) - set(self.controllable)
        if extra:
            raise ParameterDomainError(f"bounds given for non-controllable {sorted(extra)}")

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([float(self.lower[n]) for n in self.controllable])
        hi = np.array([float(self.upper[n]) for n in self.controllable])
        return lo, hi

    def params_at(self, unit) -> ModelParams:
        """Params at unit-box coordinates; 0 and 1 map exactly onto the bounds."""
        lo, hi = self.bounds()
        values = {}
        for k, name in enumerate(self.controllable):
            u = float(unit[k])
            if u <= 0.0:
                values[name] = lo[k]
            elif u >= 1.0:
                values[name] = hi[k]
            else:
                values[name] = lo[k] + u * (hi[k] - lo[k])
        return self.fixed.with_(**values)


@dataclass(frozen=True)
class StartTrace:
    start: int
    initial: dict[str, float]
    best: dict[str, float]
    best_profit: float
    evaluations: int
    iterations: int
    converged: bool
    incumbents: tuple[float, ...] = field(repr=False, default=())

    def to_dict(self) -> dict:
        return {
            "start": self.start,
            "initial": self.initial,
            "best": self.best,
            "best_profit": self.best_profit,
            "evaluations": self.evaluations,
            "iterations": self.iterations,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class OptimResult:
    best_params: ModelParams
    best_profit: float
    evaluations: int
    converged: bool
    traces: tuple[StartTrace, ...]

    def to_dict(self) -> dict:
        return {
            "best_params": self.best_params.as_dict(),
            "best_profit": self.best_profit,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "traces": [t.to_dict() for t in self.traces],
        }


def _compass_search(objective, u0: np.ndarray, budget: int):
    """Coordinate polling with step halving on the unit box, maximizing."""
    cache: dict[tuple, float] = {}

    def evaluate(u):
        key = tuple(u.tolist())
        if key not in cache:
            cache[key] = objective(u)
        return cache[key]

    u = np.clip(u0, 0.0, 1.0)
    best = evaluate(u)
    incumbents = [best]
    step = POLL_START
    iterations = 0
    converged = False
    while True:
        if step < POLL_MIN:
            converged = True
            break
        if len(cache) >= budget:
            break
        iterations += 1
        cand_u, cand_f = None, best
        polls = [(k, sign) for k in range(u.size) for sign in (1.0, -1.0)]
        for k, sign in polls:
            if len(cache) >= budget:
                break
            trial = u.copy()
            trial[k] = min(1.0, max(0.0, trial[k] + sign * step))
            if trial[k] == u[k]:
                continue
            f = evaluate(trial)
            if f > cand_f:
                cand_u, cand_f = trial, f
        if cand_u is not None:
            u, best = cand_u, cand_f
        else:
            step *= 0.5
        incumbents.append(best)
    return u, best, len(cache), iterations, converged, tuple(incumbents)


def maximize_profit(
    spec: ControlSpec,
    scenario: Scenario,
    starts: int = DEFAULT_STARTS,
    seed: int = 0,
    *,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
) -> OptimResult:
    """Multistart compass search for the most profitable rates in the box.

    Starts come from a seeded Latin hypercube; each start polls every
    coordinate in both directions, moves to the best improving point or
    halves its step, and stops when the step drops below ``1e-6`` of the box
    width or ``budget`` distinct evaluations are used.
    """
    if starts < 1:
        raise ParameterDomainError("starts must be positive")
    d = len(spec.controllable)
    sampler = qmc.LatinHypercube(d=d, rng=np.random.default_rng(seed))
    origins = sampler.random(starts)

    def objective(u):
        return solver.profit(spec.params_at(u), scenario)

    def run(k):
        return k, _compass_search(objective, origins[k], budget)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, range(starts)))
    else:
        outcomes = [run(k) for k in range(starts)]

    names = spec.controllable
    traces = []
    for k, (u, best, n_eval, iterations, converged, incumbents) in outcomes:
        start_p = spec.params_at(origins[k])
        best_p = spec.params_at(u)
        traces.append(
            StartTrace(
                start=k,
                initial={n: getattr(start_p, n) for n in names},
                best={n: getattr(best_p, n) for n in names},
                best_profit=float(best),
                evaluations=n_eval,
                iterations=iterations,
                converged=converged,
                incumbents=incumbents,
            )
        )
    # ties go to the lowest start index
    winner = max(traces, key=lambda tr: (tr.best_profit, -tr.start))
    return OptimResult(
        best_params=spec.fixed.with_(**winner.best),
        best_profit=winner.best_profit,
        evaluations=sum(tr.evaluations for tr in traces),
        converged=all(tr.converged for tr in traces),
        traces=tuple(traces),
    )


@dataclass(frozen=True)
class SensitivityResult:
    gradient: dict[str, float]
    steps: dict[str, float]
    one_sided: tuple[str, ...]

    def to_dict(self) -> dict:
        return {"gradient": self.gradient, "steps": self.steps, "one_sided": list(self.one_sided)}


def sensitivity(params: ModelParams, scenario: Scenario, rel_step: float = SENSITIVITY_STEP) -> SensitivityResult:
    """Central-difference gradient of profit with respect to all ten rates.

    Integrator tolerances are tightened 100x. A rate sitting at zero (allowed
    for ``mu``, ``delta_I``, ``delta_P``) gets a forward difference and is
    listed in ``one_sided``.
    """
    tight = scenario.with_(
        rel_tol=scenario.rel_tol / SENSITIVITY_TIGHTEN,
        abs_tol=scenario.abs_tol / SENSITIVITY_TIGHTEN,
    )
    base = params.as_dict()
    gradient, steps, one_sided = {}, {}, []
    f0 = None
    for name in PARAM_NAMES:
        x = base[name]
        h = rel_step * abs(x) if x != 0.0 else rel_step
        steps[name] = h
        up = solver.profit(params.with_(**{name: x + h}), tight)
        try:
            down_params = params.with_(**{name: x - h})
        except ParameterDomainError:
            down_params = None
        if down_params is None:
            if f0 is None:
                f0 = solver.profit(params, tight)
            gradient[name] = (up - f0) / h
            one_sided.append(name)
        else:
            gradient[name] = (up - solver.profit(down_params, tight)) / (2.0 * h)
    return SensitivityResult(gradient, steps, tuple(one_sided))
