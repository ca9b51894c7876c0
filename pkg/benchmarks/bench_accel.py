"""Compare the numba and pure-numpy kernel backends.

Usage: python3 benchmarks/bench_accel.py [--repeat 5]
"""
from __future__ import annotations

import argparse
import math
import timeit

import numpy as np

from tfch import _accel
from tfch.kernel_checks import random_mesh
from tfch.sim.initial_conditions import ic_uniform_random
from tfch.spectral_field import Grid
from tfch.stepper import PhysicalParams, SolverState, run_mesh
from tfch.time_mesh import uniform_mesh


def _cases(rng):
    t = random_mesh(rng, 2000, 0.9, 1.1).times
    g3 = math.gamma(2.5)
    hist = rng.standard_normal((400, 128 * 128))
    coeffs = rng.uniform(0, 1, 401)
    out = np.empty(128 * 128)
    v, p = rng.uniform(-1, 1, (2, 256, 256))
    return {
        "l1plus_coeffs n=2000": lambda impl: impl.l1plus_coeffs(t, 2000, 0.5, g3),
        "history_sum 400x128^2": lambda impl: impl.history_sum(coeffs, hist, 400, out),
        "cubic_terms 256^2": lambda impl: impl.cubic_terms(v, p),
        "30 solver steps 128^2": _solver_run,
    }


def _solver_run(impl):
    # the solver looks the backend up at call time
    _accel.impl = impl
    phi0 = ic_uniform_random(Grid(128, 128), 0.0, 0.5, seed=1)
    run_mesh(SolverState.initial(phi0, PhysicalParams(0.5, 0.1, 0.01)), uniform_mesh(3e-3, 30))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    impls = [_accel.numpy_impl] + ([_accel.numba_impl] if _accel.numba_impl else [])
    cases = _cases(np.random.default_rng(0))
    impl_default = _accel.impl
    print(f"{'kernel':<24}" + "".join(f"{i.name:>12}" for i in impls) + f"{'speedup':>10}")
    for name, fn in cases.items():
        times = []
        for impl in impls:
            fn(impl)  # warm up / compile
            times.append(min(timeit.repeat(lambda: fn(impl), number=1, repeat=args.repeat)))
        speed = f"{times[0] / times[1]:9.1f}x" if len(times) > 1 else ""
        _accel.impl = impl_default
        print(f"{name:<24}" + "".join(f"{1e3 * s:10.2f}ms" for s in times) + f"{speed:>10}")


if __name__ == "__main__":
    main()
