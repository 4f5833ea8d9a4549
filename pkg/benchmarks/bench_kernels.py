"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times the hot kernels directly from both modules, then a full CIFAR-10
equilibrium solve in a subprocess per backend.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from fedmech import _pykernels as py

try:
    from fedmech import _ckernels as ck
except ImportError:
    ck = None

GRID_ARGS = (py.GEN_BOUND, 0.95, 10.0, py.POWER, 1.0, 2.5e-4, 2e5, 7e5, 0.9, 2.5e-4, 3e6,
             py.GEN_BOUND, 0.95, 10.0, 0.0)
GRID = np.linspace(0.0, 2e6, 2001)

CASES = {
    "net_utility_grid(2001)": lambda k: k.net_utility_grid(GRID, *GRID_ARGS),
    "foc_root": lambda k: k.foc_root(py.GEN_BOUND, 0.95, 10.0, py.POWER, 1.0, 2.5e-4,
                                     220.0, py.M_MAX, 1e-10),
    "shaped_root": lambda k: k.shaped_root(py.POWER, 1.0, 0.9, 2.5e-4, 2e5, 3e6,
                                           py.GEN_BOUND, 0.95, 10.0, 1e-12),
    "zero_crossing": lambda k: k.zero_crossing(py.GEN_BOUND, 0.95, 10.0, 1e-10),
}

SOLVE_SNIPPET = """
import time
from fedmech import kernels
from fedmech.equilibrium import solve
from fedmech.scenarios import build, cifar10_spec
devices, cfg = build(cifar10_spec(payoff_mode="power_nonuniform"))
t0 = time.perf_counter()
for _ in range({n}):
    solve(devices, cfg)
print(kernels.BACKEND, (time.perf_counter() - t0) / {n})
"""


def per_call(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--solves", type=int, default=5)
    args = ap.parse_args()

    if ck is None:
        print("compiled backend not built; only the Python timings are shown")
    print(f"{'kernel':<26}{'python':>14}{'cython':>14}{'speedup':>10}")
    for name, case in CASES.items():
        t_py = per_call(lambda: case(py), args.repeat)
        if ck is None:
            print(f"{name:<26}{t_py * 1e6:>12.1f}us")
            continue
        t_c = per_call(lambda: case(ck), args.repeat)
        print(f"{name:<26}{t_py * 1e6:>12.1f}us{t_c * 1e6:>12.1f}us{t_py / t_c:>9.1f}x")

    print("\nfull solve, CIFAR-10 config, 16 devices")
    for pure in ("1", ""):
        env = {**os.environ, "FEDMECH_PURE_PYTHON": pure}
        out = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET.format(n=args.solves)],
                             env=env, capture_output=True, text=True, check=True).stdout.split()
        print(f"  {out[0]:<8}{float(out[1]) * 1e3:>10.1f} ms per solve")


if __name__ == "__main__":
    main()
