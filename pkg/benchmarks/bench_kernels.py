"""Numba vs pure-numpy jet kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--end-to-end]

Kernel timings call both backends directly.  ``--end-to-end`` reruns a full
curvature evaluation in subprocesses with and without SASAKILIFT_DISABLE_NUMBA.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from sasakilift import _kernels, jets

CASES = [(2, 3, 2000), (3, 5, 2000), (4, 3, 2000), (4, 5, 500)]

E2E = """
import time
from sasakilift.catalog import lookup
from sasakilift.lift import build_lift
from sasakilift import geometry as geo
ls = build_lift(lookup("fubini-study", n=2).ks)
Q = ls.chart.sample_points(200, 0)
geo.bianchi_residuals(ls.chart, Q[:2])  # warm up / compile
t = time.perf_counter()
geo.bianchi_residuals(ls.chart, Q)
print(time.perf_counter() - t)
"""


def best_of(fn, repeat):
    out = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t)
    return min(out)


def kernel_table(repeat):
    rng = np.random.default_rng(0)
    print(f"{'order':>5} {'nvars':>5} {'batch':>6} {'kernel':>12} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for order, nvars, batch in CASES:
        table = jets.index_table(order, nvars)
        a = rng.normal(size=(batch, table.size))
        b = rng.normal(size=(batch, table.size))
        h = a.copy()
        h[:, 0] = 0.0
        c = rng.normal(size=(batch, order + 1))
        runs = {
            "product": lambda use: _kernels.truncated_product(a, b, table, use_numba=use),
            "power_series": lambda use: _kernels.power_series(h, c, table, use_numba=use),
        }
        for name, fn in runs.items():
            t_np = best_of(lambda: fn(False), repeat)
            if _kernels.HAVE_NUMBA:
                fn(True)  # compile
                t_nb = best_of(lambda: fn(True), repeat)
                np.testing.assert_allclose(fn(True), fn(False), atol=1e-10)
                nb, sp = f"{1e3 * t_nb:10.3f}", f"{t_np / t_nb:8.1f}x"
            else:
                nb, sp = f"{'n/a':>10}", f"{'':>8}"
            print(f"{order:5d} {nvars:5d} {batch:6d} {name:>12} {1e3 * t_np:10.3f} {nb} {sp}")


def end_to_end():
    for label, flag in (("numba", ""), ("numpy", "1")):
        env = dict(os.environ, SASAKILIFT_DISABLE_NUMBA=flag)
        p = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True, text=True, check=True)
        print(f"second Bianchi check, CP^2 lift, 200 points ({label}): {float(p.stdout):.3f} s")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args(argv)
    print(f"numba available: {_kernels.HAVE_NUMBA}, active by default: {_kernels.USE_NUMBA}")
    kernel_table(args.repeat)
    if args.end_to_end:
        end_to_end()


if __name__ == "__main__":
    main()
