"""Benchmark the compiled kernels against the pure-Python fallback.

Micro-benchmarks run both implementations in-process; the end-to-end
simulation compares the kernel selected at import against a subprocess
forced onto the fallback with CONEFLOW_PURE=1.

Usage: python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import math
import os
import subprocess
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import numpy as np  # noqa: E402

from coneflow._kernels import _ref  # noqa: E402

try:
    from coneflow._kernels import _fast
except ImportError:
    _fast = None

FP_X, FP_Y = 0.5, math.sqrt(3.0) / 2.0
SINH_R3 = 1.0 / math.sqrt(3.0)


def timeit(fn, reps):
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def bench_micro(reps):
    rng = np.random.default_rng(0)
    cases = []
    while len(cases) < 20:
        f, b = rng.uniform(-3, 3), rng.uniform(-3, 3)
        if abs(f - b) < 0.05:
            continue
        cases.append((f, b, (f + b) / 2, abs(f - b) / 2))

    def walks(mod):
        for f, b, x, y in cases:
            mod.walk_segment(f, b, x, y, 50.0)

    walked = [_ref.walk_segment(f, b, x, y, 50.0)[:2] for f, b, x, y in cases]

    def candidates(mod):
        for tiles, geo in walked:
            mod.collect_candidates(tiles, geo, 2, FP_X, FP_Y, SINH_R3)

    rows = []
    for name, job in (("walk_segment x20 (50 units)", walks),
                      ("collect_candidates x20 (m=2)", candidates)):
        t_ref = timeit(lambda: job(_ref), reps)
        if _fast is not None:
            t_fast = timeit(lambda: job(_fast), reps)
            rows.append((name, t_ref, t_fast, t_ref / t_fast))
        else:
            rows.append((name, t_ref, None, None))
    return rows


def bench_end_to_end(n_geodesics):
    script = (
        "import time; from coneflow.excursions import simulate; "
        "from coneflow.regions import cone_constants; "
        "cc = cone_constants(3); t0 = time.time(); "
        f"sim = simulate({n_geodesics}, cc.r_k, 40.0, seed=11); "
        "print(len(sim.records), time.time() - t0)"
    )
    rows = []
    for label, pure in (("compiled", "0"), ("pure", "1")):
        env = dict(os.environ, CONEFLOW_PURE=pure,
                   PYTHONPATH=str(Path(__file__).resolve().parent.parent / "src"))
        out = subprocess.run([sys.executable, "-c", script], env=env,
                             capture_output=True, text=True, check=True)
        n_rec, elapsed = out.stdout.split()
        rows.append((label, int(n_rec), float(elapsed)))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()
    reps = 3 if args.quick else 10
    n_geo = 200 if args.quick else 1000

    print(f"kernel micro-benchmarks (mean of {reps} reps)")
    print(f"{'case':<34} {'pure (s)':>10} {'compiled (s)':>13} {'speedup':>8}")
    for name, t_ref, t_fast, speedup in bench_micro(reps):
        if t_fast is None:
            print(f"{name:<34} {t_ref:>10.4f} {'n/a':>13} {'n/a':>8}")
        else:
            print(f"{name:<34} {t_ref:>10.4f} {t_fast:>13.4f} {speedup:>7.1f}x")

    print(f"\nend-to-end simulate ({n_geo} geodesics, window 40, cutoff r_3)")
    rows = bench_end_to_end(n_geo)
    base = {label: secs for label, _n, secs in rows}
    for label, n_rec, secs in rows:
        extra = f"  ({base['pure'] / secs:.1f}x vs pure)" if label == "compiled" \
            and "pure" in base else ""
        print(f"  {label:<10} {n_rec} records in {secs:.2f}s{extra}")
    if _fast is None:
        print("\nnote: compiled kernel not built; "
              "run `python setup.py build_ext --inplace` first")


if __name__ == "__main__":
    main()
