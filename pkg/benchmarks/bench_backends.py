"""Compare the numba kernels against the pure-numpy fallback.

Each backend runs in its own interpreter because the choice is fixed at
import time by ``SIPNS_PURE_NUMPY``. Timings are best-of-``--repeat`` on warm
code (the first call, which may compile, is reported separately).

    python3 benchmarks/bench_backends.py [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from sipns import _accel, solver
from sipns.analysis import default_grid, sweep
from sipns.model import ModelParams, Scenario

repeat = int(sys.argv[1])
p, sc = ModelParams.default(), Scenario.default()
grid = default_grid(p, "delta_I", points=5)
tasks = {
    "integrate (500 samples)": lambda: solver.integrate(p, sc, np.linspace(0, sc.horizon, 502)[1:-1]),
    "profit": lambda: solver.profit(p, sc),
    "sweep delta_I (5 points)": lambda: sweep(p, "delta_I", grid, sc),
}
out = {"backend": _accel.BACKEND, "first": {}, "best": {}, "profit": solver.profit(p, sc)}
for name, fn in tasks.items():
    t0 = time.perf_counter(); fn(); out["first"][name] = time.perf_counter() - t0
    runs = []
    for _ in range(repeat):
        t0 = time.perf_counter(); fn(); runs.append(time.perf_counter() - t0)
    out["best"][name] = min(runs)
print(json.dumps(out))
"""


def run_backend(pure: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("SIPNS_PURE_NUMPY", None)
    if pure:
        env["SIPNS_PURE_NUMPY"] = "1"
    proc = subprocess.run(
        [sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True, check=True
    )
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    t0 = time.perf_counter()
    fast = run_backend(False, args.repeat)
    slow = run_backend(True, args.repeat)
    print(f"{'task':<28}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    for name in fast["best"]:
        a, b = fast["best"][name], slow["best"][name]
        print(f"{name:<28}{a * 1e3:>10.2f}ms{b * 1e3:>10.2f}ms{b / a:>9.1f}x")
    first = next(iter(fast["first"]))
    print(f"first numba call (compile or cache load), {first}: {fast['first'][first]:.3f} s")
    same = fast["profit"] == slow["profit"]
    print(f"profit identical across backends: {same} ({fast['profit']!r})")
    print(f"total {time.perf_counter() - t0:.1f} s")
    return 0 if same else 1


if __name__ == "__main__":
    sys.exit(main())
