"""Compare the compiled and pure-Python RK4 kernels.

    python benchmarks/bench_rk4.py [--steps N] [--columns M] [--repeat R]

Both backends run on the same generator samples; the script reports the
best wall time per backend and the largest difference between their outputs.
"""

import argparse
import sys
import timeit

import numpy as np

from dirac_darboux import kernels
from dirac_darboux.dirac_core import PotentialSpec, half_grid
from dirac_darboux.pauli import SIGMA3, compose


def workload(steps: int, columns: int):
    h = 1e-3
    spec = PotentialSpec.sinusoidal({1: (0.3, 1.0, 0.0, 0.0), 3: (0.2, 2.3, 0.1, 0.05)})
    a = 1j * SIGMA3 @ (compose(spec.coefficients(half_grid(0.0, h, steps))) - 2.0 * np.eye(2))
    y0 = np.ascontiguousarray(np.eye(2, columns, dtype=np.complex128))
    return np.ascontiguousarray(a), y0, h


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=100_000)
    parser.add_argument("--columns", type=int, default=1, choices=(1, 2))
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    a, y0, h = workload(args.steps, args.columns)
    backends = {"python": kernels.rk4_linear_py}
    if kernels.rk4_linear_ext is not None:
        backends["cython"] = kernels.rk4_linear_ext
    else:
        print("compiled kernel not built; timing the Python fallback only", file=sys.stderr)

    outputs, times = {}, {}
    for name, fn in backends.items():
        outputs[name] = fn(a, y0, h)
        times[name] = min(timeit.repeat(lambda: fn(a, y0, h), number=1, repeat=args.repeat))

    print(f"steps={args.steps} columns={args.columns} repeat={args.repeat} active={kernels.BACKEND}")
    for name, t in times.items():
        print(f"{name:>8}: {t * 1e3:9.2f} ms  ({t / args.steps * 1e9:7.1f} ns/step)")
    if len(times) == 2:
        diff = np.max(np.abs(outputs["cython"] - outputs["python"]))
        print(f" speedup: {times['python'] / times['cython']:.1f}x  max |difference| = {diff:.2e}")


if __name__ == "__main__":
    main()
