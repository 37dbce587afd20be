"""Compiled vs pure-Python Sturm bisection.

Kernel timings call both backends on the same sector matrices.  The end-to-end
timing runs the d=4 sphere spectrum (K=1717) in a subprocess per backend, since
the default backend is fixed at import.

    python3 benchmarks/bench_sturm.py [--repeat 3] [--skip-end-to-end]
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from spectral_obstruction import spectral as SP
from spectral_obstruction.numerics import BACKENDS, eig_sym_tridiag

END_TO_END = """
import time
from spectral_obstruction import spectral as SP
from spectral_obstruction.sphere_cex import eps_zero
t = time.perf_counter()
SP.compute_spectrum(SP.SphereGeometry(4, eps_zero(4, 11) / 8), 1717, n=2000)
print(time.perf_counter() - t)
"""


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def kernel_rows(repeat):
    sec = SP.SphereGeometry(4, 0.05).enumerate_sectors(200).sectors[0]
    rows = []
    for n, count in ((1000, 50), (4000, 50), (4000, 300)):
        m = SP.discretize_sector(sec, n)
        ref = eig_sym_tridiag(m, count, backend="python")
        row = {"n": n, "count": count}
        for name in sorted(BACKENDS):
            vals = eig_sym_tridiag(m, count, backend=name)
            assert np.allclose(vals, ref, rtol=1e-12, atol=1e-10), name
            row[name] = best_of(lambda: eig_sym_tridiag(m, count, backend=name), repeat)
        rows.append(row)
    return rows


def end_to_end(backend):
    env = dict(os.environ)
    env.pop("SPECTRAL_OBSTRUCTION_PURE_PYTHON", None)
    if backend == "python":
        env["SPECTRAL_OBSTRUCTION_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, check=True,
                         capture_output=True, text=True)
    return float(out.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args(argv)

    names = sorted(BACKENDS)
    print("backends:", ", ".join(names))
    print(f"{'n':>6} {'count':>6} " + " ".join(f"{b:>10}" for b in names) + "   speedup")
    for row in kernel_rows(args.repeat):
        speed = row["python"] / row["compiled"] if "compiled" in row else float("nan")
        print(f"{row['n']:6d} {row['count']:6d} " + " ".join(f"{row[b]:9.4f}s" for b in names)
              + f"   {speed:6.2f}x")
    if not args.skip_end_to_end:
        for b in names:
            print(f"sphere d=4, K=1717, n=2000 [{b}]: {end_to_end(b):.2f} s")


if __name__ == "__main__":
    main()
