"""Adaptive integration of the SIPNS dynamics with the profit integral carried
as a fifth state component, so the stepper's error control covers it too."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NegativityError, NonConvergenceError, ParameterDomainError, SolverError
from .model import MarketState, ModelParams, Scenario


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution. ``states`` has shape ``(n, 4)`` in (S, I, P, N) order;
    ``profit_running[k]`` is the accumulated profit at ``times[k]``."""

    times: np.ndarray
    states: np.ndarray
    profit_running: np.ndarray
    step_count: int
    rejected_steps: int

    def __len__(self):
        return self.times.shape[0]

    def state(self, k: int) -> MarketState:
        return MarketState.from_array(self.states[k])

    @property
    def final(self) -> MarketState:
        return self.state(-1)

    @property
    def profit(self) -> float:
        return float(self.profit_running[-1])


def _sample_grid(sample_grid, horizon: float) -> np.ndarray:
    grid = np.asarray(sample_grid, dtype=np.float64).ravel()
    if grid.size and (np.any(np.diff(grid) <= 0.0)):
        raise ParameterDomainError("sample_grid must be strictly ascending")
    if grid.size and (grid[0] < 0.0 or grid[-1] > horizon):
        raise ParameterDomainError(f"sample_grid must lie within [0, {horizon}]")
    if not grid.size or grid[0] > 0.0:
        grid = np.concatenate(([0.0], grid))
    if grid[-1] < horizon:
        grid = np.concatenate((grid, [horizon]))
    return grid


def _run(params: ModelParams, scenario: Scenario, grid, record: bool, fixed_step: float = 0.0):
    y0 = np.zeros(5)
    y0[:4] = scenario.initial.as_array()
    return kernels.dopri5(
        params.as_array(),
        y0,
        scenario.horizon,
        scenario.rel_tol,
        scenario.abs_tol,
        scenario.max_steps,
        grid,
        record,
        float(fixed_step),
    )


def integrate(
    params: ModelParams,
    scenario: Scenario,
    sample_grid=None,
    *,
    fixed_step: float = 0.0,
) -> Trajectory:
    """Integrate over ``[0, scenario.horizon]``.

    Without ``sample_grid`` the trajectory holds every accepted step. With
    one, states are reported exactly at those times (plus 0 and T, added if
    missing) via the quartic dense output. ``fixed_step`` switches off
    error control; it exists for convergence-order studies.

    Raises ``NonConvergenceError`` when ``max_steps`` is exhausted and
    ``NegativityError`` when a compartment drops below -1e-9. Both carry the
    partial trajectory.
    """
    record = sample_grid is None
    grid = np.zeros(0) if record else _sample_grid(sample_grid, scenario.horizon)
    status, y_grid, n_grid, t_rec, y_rec, n_rec, n_acc, n_rej, t_reached = _run(
        params, scenario, grid, record, fixed_step
    )
    if record:
        times, ys = t_rec[:n_rec].copy(), y_rec[:n_rec]
    else:
        times, ys = grid[:n_grid].copy(), y_grid[:n_grid]
    traj = Trajectory(
        times=times,
        states=np.maximum(ys[:, :4], 0.0),
        profit_running=ys[:, 4].copy(),
        step_count=int(n_acc),
        rejected_steps=int(n_rej),
    )
    if status == kernels.OK:
        return traj
    if status == kernels.MAX_STEPS:
        raise NonConvergenceError(
            f"max_steps={scenario.max_steps} exhausted at t={t_reached:.6g} of {scenario.horizon}",
            partial=traj,
        )
    if status == kernels.NEGATIVE:
        raise NegativityError(
            f"compartment below -{kernels.NEG_TOL:g} near t={t_reached:.6g}; tolerances too loose?",
            partial=traj,
        )
    if status == kernels.NON_FINITE:
        raise SolverError(f"non-finite state near t={t_reached:.6g}", partial=traj)
    raise SolverError(f"step size underflow at t={t_reached:.6g}", partial=traj)


def final_state(params: ModelParams, scenario: Scenario) -> tuple[MarketState, float]:
    """State and accumulated profit at ``T`` without storing the path."""
    traj = integrate(params, scenario, sample_grid=[scenario.horizon])
    return traj.final, traj.profit


def profit(params: ModelParams, scenario: Scenario) -> float:
    """Expected overall profit ``beta_P * int_0^T P(t) S(t) dt`` (unit profit per item)."""
    return final_state(params, scenario)[1]
