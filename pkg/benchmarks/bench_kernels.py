"""Compare the compiled and pure-Python eps-profile kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Times the three hot paths (single profile minimization, a batch of them and
the grid-oracle scan) on both backends and prints the speedup.  Results are
also checked for agreement so a stale build shows up immediately.
"""

import argparse
import time

import numpy as np

from smoothpen import _kernels
from smoothpen.transforms import identity, rational_barrier, sqrt_double


def timed(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(rng):
    c = rng.normal(size=3)
    w = rng.normal(scale=0.2, size=3)
    fvals = rng.normal(size=500)
    C = rng.normal(size=(500, 3))
    grid_f = rng.normal(size=201 * 201)
    grid_C = rng.normal(size=(201 * 201, 1))
    eps = np.geomspace(1e-8, 10.0, 201)
    for phi, beta in ((identity(), identity()), (rational_barrier(), sqrt_double())):
        label = f"phi={phi}, beta={beta}"
        yield (f"profile_min x200 [{label}]",
               lambda b, phi=phi, beta=beta: [
                   _kernels.profile_min(0.3, c, 1, w, 1.0, 0.7, phi, beta, 1e-12, 50.0,
                                        backend=b)
                   for _ in range(200)])
        yield (f"profile_min_batch 500 [{label}]",
               lambda b, phi=phi, beta=beta: _kernels.profile_min_batch(
                   fvals, C, 1, w, 1.0, 0.7, phi, beta, 1e-12, 50.0, backend=b))
        yield (f"grid_scan 201^2 x 201 [{label}]",
               lambda b, phi=phi, beta=beta: _kernels.grid_scan(
                   grid_f, grid_C, 0, np.zeros(1), 1.0, 0.7, phi, beta, eps, backend=b))


def flat(out):
    if isinstance(out, list):
        return np.array([v for _, v in out])
    return np.asarray(out[1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels._ckernels is None:
        print("compiled kernels are not built; only the Python backend is available")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':66s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s}")
    for name, fn in cases(rng):
        tp, op = timed(lambda: fn("python"), args.repeat)
        tc, oc = timed(lambda: fn("cython"), args.repeat)
        agree = np.allclose(flat(op), flat(oc), rtol=1e-10, atol=1e-12)
        flag = "" if agree else "  MISMATCH"
        print(f"{name:66s} {tp:11.4f} {tc:11.4f} {tp / tc:7.1f}x{flag}")


if __name__ == "__main__":
    main()
