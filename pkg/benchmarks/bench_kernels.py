"""Benchmark: compiled kernels vs pure-numpy fallback.

Times the two kernel families on identical workloads and verifies they
produce the same numbers.  Usage:

    python3 benchmarks/bench_kernels.py [--paths 50000] [--steps 500]
"""
import argparse
import time

import numpy as np

from exchopt import default_params, default_state
from exchopt.mc import backend, kernels_numpy, resolve_threads, schemes


def time_call(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--paths", type=int, default=50_000)
    ap.add_argument("--steps", type=int, default=500)
    args = ap.parse_args()
    params, state = default_params(), default_state()
    n, steps = args.paths, args.steps
    dt = 1.0 / steps
    threads = resolve_threads()

    rows = []
    mom_vec = schemes.pack_moments(params, state, dt)
    price_vec = schemes.pack_price(params, state, dt, schemes.VOL_MODE_QE)

    t_np_m = time_call(kernels_numpy.run_moments, mom_vec, 7, n, steps, False)
    t_np_p = time_call(lambda: kernels_numpy.run_price(price_vec, 0, 7, n,
                                                       steps, False))
    rows.append(("moments", "numpy", 1, t_np_m))
    rows.append(("price", "numpy", 1, t_np_p))

    if backend.HAVE_COMPILED:
        v1 = np.empty(n); v2 = np.empty(n); rp = np.empty(n)
        ov = np.empty(n, dtype=np.int64)
        ls1 = np.empty(n); ls2 = np.empty(n)

        def cy_m(nt):
            backend._kernels.run_moments(mom_vec, 7, n, steps, False, nt,
                                         v1, v2, rp, ov)

        def cy_p(nt):
            backend._kernels.run_price(price_vec, 0, 7, n, steps, False, nt,
                                       ls1, ls2, v1, v2, rp, ov)

        for nt in sorted({1, threads}):
            rows.append(("moments", "cython", nt, time_call(cy_m, nt)))
            rows.append(("price", "cython", nt, time_call(cy_p, nt)))
        cy_m(threads)
        ref = kernels_numpy.run_moments(mom_vec, 7, n, steps, False)
        gap = max(np.max(np.abs(ref[0] - v1)), np.max(np.abs(ref[2] - rp)))
        agree = f"max |cython - numpy| = {gap:.3e}"
    else:
        agree = "compiled kernels not available"

    print(f"\n{n} paths x {steps} steps ({n * steps / 1e6:.0f}M path-steps), "
          f"{threads} threads available")
    print(f"{'kernel':<10}{'backend':<10}{'threads':<9}{'seconds':<10}"
          f"{'Mpathsteps/s':<14}{'speedup':<8}")
    base = {k: t for k, b, nt, t in rows if b == "numpy" for k in [k]}
    for kernel, bk, nt, t in rows:
        rate = n * steps / t / 1e6
        speedup = base[kernel] / t
        print(f"{kernel:<10}{bk:<10}{nt:<9}{t:<10.3f}{rate:<14.1f}"
              f"{speedup:<8.1f}")
    print(agree)


if __name__ == "__main__":
    main()
