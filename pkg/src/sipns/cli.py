"""Command-line front end.

Every subcommand takes ``--config``, ``--out``, ``--seed``, ``--label`` and
``--dump-config`` and writes its files to ``<out>/<command>-<label>/`` next
to the resolved ``config.json`` and a ``manifest.json``. Exit codes: 0
success, 1 configuration or validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from . import _accel, analysis, model, optimize, solver
from .config import ConfigError, RunConfig, load_config
from .errors import EvaluationError, SolverError

COMMANDS = ("simulate", "equilibrium", "sweep", "profit", "optimize", "sensitivity")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2


def fmt(x) -> str:
    """Shortest round-trip decimal for a float."""
    return repr(float(x))


def to_json(obj) -> str:
    return json.dumps(_plain(obj), indent=2, allow_nan=False) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def sample_times(config: RunConfig) -> np.ndarray:
    T = config.scenario.horizon
    if config.simulate.times is not None:
        return np.asarray(config.simulate.times, dtype=np.float64)
    n = config.simulate.samples
    return T * np.arange(1, n + 1) / (n + 1)


def run_simulate(config: RunConfig):
    traj = solver.integrate(config.params, config.scenario, sample_times(config))
    rows = (
        [fmt(t), *(fmt(v) for v in state), fmt(j)]
        for t, state, j in zip(traj.times, traj.states, traj.profit_running)
    )
    final = traj.final
    summary = (
        "final "
        + " ".join(f"{k}={fmt(v)}" for k, v in final.as_dict().items())
        + f"\nprofit {fmt(traj.profit)}\n"
    )
    return {"trajectory.csv": csv_text(("t", "S", "I", "P", "N", "J"), rows)}, summary


def run_equilibrium(config: RunConfig):
    eq = model.equilibrium(config.params)
    payload = {**eq.as_dict(), "residual": model.residual(config.params, eq)}
    text = to_json(payload)
    return {"equilibrium.json": text}, text


def run_sweep(config: RunConfig):
    report = analysis.sweep(
        config.params, config.sweep.parameter, config.sweep_grid(), config.scenario, workers=config.workers
    )
    rows = (
        [
            fmt(pt.value),
            *(fmt(v) for v in pt.steady.state.as_array()),
            fmt(pt.profit),
            "true" if pt.steady.converged else "false",
        ]
        for pt in report.points
    )
    verdicts = {"parameter": report.parameter, "verdicts": report.verdicts}
    expected = analysis.EXPECTED_DIRECTIONS.get(report.parameter)
    if expected:
        checks = analysis.monotonicity_check(report, expected)
        verdicts["checks"] = {
            k: {"expected": c.expected, "status": c.status, "interval": c.interval} for k, c in checks.items()
        }
    th = config.sweep.threshold
    if th is not None:
        res = analysis.threshold_search(
            config.params, config.scenario, th.lower, th.upper, points=th.points, workers=config.workers
        )
        verdicts["threshold"] = {
            "found": res.found,
            "theta": res.theta,
            "profit": res.profit,
            "bracket": res.bracket,
            "coarse_bracket": res.coarse_bracket,
            "inconclusive": res.inconclusive,
            "message": res.message,
        }
    text = to_json(verdicts)
    files = {
        "sweep.csv": csv_text(("value", "S", "I", "P", "N", "J", "converged"), rows),
        "verdicts.json": text,
    }
    return files, text


def run_profit(config: RunConfig):
    text = to_json({"profit": solver.profit(config.params, config.scenario)})
    return {"profit.json": text}, text


def run_optimize(config: RunConfig):
    res = optimize.maximize_profit(
        config.control_spec(),
        config.scenario,
        starts=config.optimize.starts,
        seed=config.seed,
        budget=config.optimize.budget,
        workers=config.workers,
    )
    text = to_json(res.to_dict())
    return {"optimize.json": text}, text


def run_sensitivity(config: RunConfig):
    text = to_json(optimize.sensitivity(config.params, config.scenario).to_dict())
    return {"sensitivity.json": text}, text


RUNNERS = {
    "simulate": run_simulate,
    "equilibrium": run_equilibrium,
    "sweep": run_sweep,
    "profit": run_profit,
    "optimize": run_optimize,
    "sensitivity": run_sensitivity,
}


def _versions() -> dict:
    out = {}
    for dist in ("artifact", "numpy", "scipy", "numba"):
        try:
            out[dist] = metadata.version(dist)
        except metadata.PackageNotFoundError:
            out[dist] = None
    return out


def write_outputs(outdir: Path, command: str, config: RunConfig, files: dict) -> Path:
    outdir.mkdir(parents=True, exist_ok=True)
    config_text = to_json(config.to_dict())
    all_files = {"config.json": config_text, **files}
    for name, text in all_files.items():
        with open(outdir / name, "w", newline="\n") as fh:
            fh.write(text)
    manifest = {
        "command": command,
        "config_sha256": config.digest(),
        "backend": _accel.BACKEND,
        "versions": _versions(),
        "files": sorted(all_files),
    }
    with open(outdir / "manifest.json", "w", newline="\n") as fh:
        fh.write(to_json(manifest))
    return outdir


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sipns", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON run configuration (defaults apply when omitted)")
        p.add_argument("--out", type=Path, default=Path("runs"), help="output root directory")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--label", help="output subdirectory label (default: UTC timestamp)")
        p.add_argument("--dump-config", action="store_true", help="print the resolved config and exit")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = dataclasses.replace(config, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.dump_config:
        sys.stdout.write(to_json(config.to_dict()))
        return EXIT_OK

    try:
        files, summary = RUNNERS[args.command](config)
    except (SolverError, EvaluationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    label = args.label or time.strftime("%Y%m%dT%H%M%SZ", time.gmtime())
    outdir = write_outputs(args.out / f"{args.command}-{label}", args.command, config, files)
    sys.stdout.write(summary)
    print(f"wrote {outdir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
