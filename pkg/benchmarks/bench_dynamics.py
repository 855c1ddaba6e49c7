"""Compare the numba and numpy sampling backends on the same workload.

    python benchmarks/bench_dynamics.py [--n 64] [--steps 200] [--replicas 256]

Both backends draw identical counter-based uniforms, so the script also
checks that their final states agree bit for bit.
"""

import argparse
import time

import numpy as np

from strip6v import _kernels
from strip6v.dynamics import evolve_ensemble
from strip6v.lattice import build_path
from strip6v.params import StripParams


def run(backend, path, params, steps, replicas):
    t0 = time.perf_counter()
    states = evolve_ensemble(path, None, params, steps, replicas, seed=1, backend=backend)
    return time.perf_counter() - t0, states


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--replicas", type=int, default=256)
    args = ap.parse_args()

    params = StripParams(0.5, 0.3, 0.4, 0.2, 0.2, 0.5)
    path = build_path(args.n)
    work = args.steps * args.replicas * (args.n + 1)
    results = {}
    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    for backend in backends:
        run(backend, path, params, 1, 2)  # warm-up (jit compile)
        dt, states = run(backend, path, params, args.steps, args.replicas)
        results[backend] = states
        print(f"{backend:>6}: {dt:8.3f} s  {work / dt / 1e6:8.2f} M vertex updates/s")
    if len(results) == 2:
        same = np.array_equal(results["numpy"], results["numba"])
        print(f"identical final states: {same}")


if __name__ == "__main__":
    main()
