"""Head-to-head timing of the two time-stepping backends.

The jitted kernel advances the whole step loop in compiled code with a
cyclic Thomas solve; the numpy fallback does vectorized steps with an
FFT diagonalization.  Both integrate the identical scheme, so the only
difference is wall clock.

    python3 benchmarks/bench_solver_kernels.py --sizes 2000,20000 --steps 2000
"""

import argparse
import time

import numpy as np

from baryrom import Grid1D, SolverConfig
from baryrom.solver import Stepper, initial_profile
from baryrom._kernels import HAVE_NUMBA


def time_backend(backend, n, steps, nu, dt, repeats):
    grid = Grid1D(n, 2 * np.pi)
    cfg = SolverConfig(nu=nu, dt=dt, steps=steps)
    stepper = Stepper(cfg, grid, backend=backend)
    u0 = initial_profile(cfg, grid)
    stepper.advance(u0.copy(), u0.copy(), min(steps, 10))  # warm up / compile
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        stepper.advance(u0.copy(), u0.copy(), steps)
        samples.append(time.perf_counter() - t0)
    return float(np.median(samples))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="2000,20000")
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--nu", type=float, default=0.05)
    parser.add_argument("--dt", type=float, default=1e-3)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    sizes = [int(v) for v in args.sizes.split(",") if v]
    print(f"{'nx':>8} " + " ".join(f"{b + ' [s]':>14}" for b in backends)
          + ("   speedup" if len(backends) == 2 else ""))
    for n in sizes:
        medians = [time_backend(b, n, args.steps, args.nu, args.dt, args.repeats)
                   for b in backends]
        line = f"{n:>8} " + " ".join(f"{m:>14.4e}" for m in medians)
        if len(medians) == 2:
            line += f"   {medians[0] / medians[1]:>7.2f}x"
        print(line)
    if not HAVE_NUMBA:
        print("numba not available; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
