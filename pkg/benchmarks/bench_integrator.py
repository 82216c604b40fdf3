"""Time the adaptive master-equation integrator with and without numba.

Each backend runs in a fresh interpreter because the backend is chosen at
import time from TCLSQUEEZE_DISABLE_NUMBA.

    python benchmarks/bench_integrator.py [--t-max 20] [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, math, sys, time, timeit
import numpy as np
t0 = time.perf_counter()
from tclsqueeze import _kernels
from tclsqueeze.model import InitialAtomSpec, ModelParams, evolve, initial_dressed_state
from tclsqueeze.oracle import integrate_master_equation
t_max, repeat = float(sys.argv[1]), int(sys.argv[2])
params = ModelParams(0.3, 1.0, 10.0)
rho0 = initial_dressed_state(InitialAtomSpec(2 * math.pi / 3, 0.0))
grid = np.linspace(0.0, t_max, 2001)
first = integrate_master_equation(rho0, grid, params)
cold = time.perf_counter() - t0
runs = timeit.repeat(lambda: integrate_master_equation(rho0, grid, params), number=1, repeat=repeat)
json.dump({"accelerated": _kernels.ACCELERATED, "cold_s": cold, "best_s": min(runs),
           "steps": first.n_accepted,
           "max_dev": float(np.max(np.abs(first.rho - evolve(rho0, grid, params))))}, sys.stdout)
"""


def measure(disable, t_max, repeat):
    env = dict(os.environ)
    env.pop("TCLSQUEEZE_DISABLE_NUMBA", None)
    if disable:
        env["TCLSQUEEZE_DISABLE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", WORKER, str(t_max), str(repeat)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--t-max", type=float, default=20.0)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    results = {"numba": measure(False, args.t_max, args.repeat),
               "numpy": measure(True, args.t_max, max(1, args.repeat // 2))}
    print(f"{'backend':8} {'cold (s)':>9} {'best (s)':>9} {'steps':>7} {'max dev':>9}")
    for name, r in results.items():
        print(f"{name:8} {r['cold_s']:9.3f} {r['best_s']:9.4f} {r['steps']:7d} {r['max_dev']:9.1e}")
    speedup = results["numpy"]["best_s"] / results["numba"]["best_s"]
    print(f"speedup (warm): {speedup:.0f}x")


if __name__ == "__main__":
    main()
