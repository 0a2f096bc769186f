"""Time the numba and pure-numpy kernel paths against each other.

    python benchmarks/bench_kernels.py [--repeat 5]

Runs both paths in-process (``use_jit=True/False``), checks they agree, and
prints one line per kernel with best-of-N wall times.
"""
import argparse
import time

import numpy as np

from qcorr import kernels
from qcorr._accel import HAS_NUMBA
from qcorr.measures import sphere_grid
from qcorr.states import random_mixed


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_disturbance():
    rho = random_mixed(3, seed=1)
    grid = sphere_grid(120)
    return {"disturbance (2x3, 14400 axes)": lambda jit: kernels.measurement_disturbance(rho.matrix, 3, grid, use_jit=jit)}


def bench_closed_form():
    s = np.random.default_rng(3).standard_normal((200_000, 3, 3))
    s = s @ s.transpose(0, 2, 1) / 12
    tr1, dev2, dev3 = kernels.deviator_traces(s)
    return {"closed form (200000 S matrices)": lambda jit: kernels.closed_form_measures(tr1, dev2, dev3, use_jit=jit)}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not HAS_NUMBA:
        print("numba unavailable or disabled; timing the numpy path only")
    cases = {**bench_disturbance(), **bench_closed_form()}
    print(f"{'kernel':<36}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}")
    for name, fn in cases.items():
        t_np = best_of(lambda: fn(False), args.repeat)
        if HAS_NUMBA:
            fn(True)  # compile
            ref, got = fn(False), fn(True)
            ref = ref if isinstance(ref, tuple) else (ref,)
            got = got if isinstance(got, tuple) else (got,)
            err = max(float(np.max(np.abs(a - b))) for a, b in zip(ref, got))
            t_jit = best_of(lambda: fn(True), args.repeat)
            print(f"{name:<36}{t_np:>12.4f}{t_jit:>12.4f}{t_np / t_jit:>9.1f}x   max|diff|={err:.1e}")
        else:
            print(f"{name:<36}{t_np:>12.4f}{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
