"""Run configuration: a single JSON document, validated against
``config_schema.json`` and then against the model's own invariants."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import jsonschema

from .analysis import default_grid, validate_grid
from .errors import SIPNSError
from .model import MarketState, ModelParams, Scenario
from .optimize import DEFAULT_BUDGET, DEFAULT_STARTS, ControlSpec


class ConfigError(SIPNSError, ValueError):
    pass


def load_schema() -> dict:
    return json.loads(resources.files("sipns").joinpath("config_schema.json").read_text())


@dataclass(frozen=True)
class SimulateBlock:
    samples: int = 500
    times: Optional[tuple[float, ...]] = None


@dataclass(frozen=True)
class ThresholdBlock:
    lower: float
    upper: float
    points: int = 33


@dataclass(frozen=True)
class SweepBlock:
    parameter: str = "mu"
    grid: Optional[tuple[float, ...]] = None
    threshold: Optional[ThresholdBlock] = None


@dataclass(frozen=True)
class OptimizeBlock:
    controllable: tuple[str, ...] = ("gamma_P",)
    lower: dict = field(default_factory=lambda: {"gamma_P": 1e-3})
    upper: dict = field(default_factory=lambda: {"gamma_P": 0.2})
    starts: int = DEFAULT_STARTS
    budget: int = DEFAULT_BUDGET


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams = field(default_factory=ModelParams.default)
    scenario: Scenario = field(default_factory=Scenario.default)
    simulate: SimulateBlock = field(default_factory=SimulateBlock)
    sweep: SweepBlock = field(default_factory=SweepBlock)
    optimize: OptimizeBlock = field(default_factory=OptimizeBlock)
    seed: int = 0
    workers: int = 1

    def sweep_grid(self) -> tuple[float, ...]:
        if self.sweep.grid is not None:
            return self.sweep.grid
        return tuple(float(v) for v in default_grid(self.params, self.sweep.parameter))

    def control_spec(self) -> ControlSpec:
        return ControlSpec(
            self.optimize.controllable, dict(self.optimize.lower), dict(self.optimize.upper), self.params
        )

    def to_dict(self) -> dict:
        sc = self.scenario
        th = self.sweep.threshold
        return {
            "params": self.params.as_dict(),
            "scenario": {
                "initial": sc.initial.as_dict(),
                "horizon": sc.horizon,
                "rel_tol": sc.rel_tol,
                "abs_tol": sc.abs_tol,
                "max_steps": sc.max_steps,
            },
            "simulate": {
                "samples": self.simulate.samples,
                "times": None if self.simulate.times is None else list(self.simulate.times),
            },
            "sweep": {
                "parameter": self.sweep.parameter,
                "grid": None if self.sweep.grid is None else list(self.sweep.grid),
                "threshold": None if th is None else {"lower": th.lower, "upper": th.upper, "points": th.points},
            },
            "optimize": {
                "controllable": list(self.optimize.controllable),
                "lower": dict(self.optimize.lower),
                "upper": dict(self.optimize.upper),
                "starts": self.optimize.starts,
                "budget": self.optimize.budget,
            },
            "seed": self.seed,
            "workers": self.workers,
        }

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def _floats(seq):
    return None if seq is None else tuple(float(v) for v in seq)


def parse_config(doc: dict) -> RunConfig:
    """Build a validated ``RunConfig``; every failure raises ``ConfigError``."""
    try:
        jsonschema.validate(doc, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None
    defaults = RunConfig()
    try:
        params = ModelParams(**{**defaults.params.as_dict(), **doc.get("params", {})})
        sc_doc = doc.get("scenario", {})
        base_sc = defaults.scenario
        initial = sc_doc.get("initial")
        scenario = Scenario(
            initial=MarketState(**initial) if initial is not None else base_sc.initial,
            horizon=sc_doc.get("horizon", base_sc.horizon),
            rel_tol=sc_doc.get("rel_tol", base_sc.rel_tol),
            abs_tol=sc_doc.get("abs_tol", base_sc.abs_tol),
            max_steps=sc_doc.get("max_steps", base_sc.max_steps),
        )
        sim_doc = doc.get("simulate", {})
        simulate = SimulateBlock(
            samples=sim_doc.get("samples", defaults.simulate.samples),
            times=_floats(sim_doc.get("times")),
        )
        sw_doc = doc.get("sweep", {})
        th_doc = sw_doc.get("threshold")
        sweep = SweepBlock(
            parameter=sw_doc.get("parameter", defaults.sweep.parameter),
            grid=_floats(sw_doc.get("grid")),
            threshold=None
            if th_doc is None
            else ThresholdBlock(float(th_doc["lower"]), float(th_doc["upper"]), th_doc.get("points", 33)),
        )
        opt_doc = doc.get("optimize", {})
        base_opt = defaults.optimize
        optimize = OptimizeBlock(
            controllable=tuple(opt_doc.get("controllable", base_opt.controllable)),
            lower={k: float(v) for k, v in opt_doc.get("lower", base_opt.lower).items()},
            upper={k: float(v) for k, v in opt_doc.get("upper", base_opt.upper).items()},
            starts=opt_doc.get("starts", base_opt.starts),
            budget=opt_doc.get("budget", base_opt.budget),
        )
        config = RunConfig(params, scenario, simulate, sweep, optimize, doc.get("seed", 0), doc.get("workers", 1))
        # semantic checks that would otherwise surface mid-run
        if "sweep" in doc:
            _check_sweep(config)
        if "optimize" in doc:
            config.control_spec()
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    return config


def _check_sweep(config: RunConfig):
    validate_grid(config.params, config.sweep.parameter, config.sweep_grid())
    th = config.sweep.threshold
    if th is not None:
        if config.sweep.parameter != "gamma_P":
            raise ConfigError("sweep.threshold only applies to parameter gamma_P")
        if not 0.0 < th.lower < th.upper:
            raise ConfigError("sweep.threshold needs 0 < lower < upper")


def load_config(path) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config(doc)
