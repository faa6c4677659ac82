#!/usr/bin/env python3
"""Benchmark the jitted kernels against the pure-numpy fallback.

The backend is chosen at import time via RIESZW_NO_NUMBA, so each backend
runs in its own subprocess.  Usage: python3 benchmarks/bench_kernels.py
"""

import json
import os
import subprocess
import sys
import time


def _worker():
    import numpy as np

    from rieszw import _kernels as K
    from rieszw.mesh import Mesh, StepFunction
    from rieszw.operators import KernelMode, riesz_reference
    from rieszw.sparse import build_sparse

    rng = np.random.default_rng(7)
    results = {"backend": "numba" if K.NUMBA_ENABLED else "numpy"}

    # riesz_apply 1d, N = 4096 cells
    v1 = np.exp(rng.standard_normal(4096))
    K.riesz_apply(v1[:64], 1.0 / 64, 0.5, K.KERNEL_MIDPOINT)  # warm jit
    t0 = time.perf_counter()
    for _ in range(5):
        K.riesz_apply(v1, 1.0 / 4096, 0.5, K.KERNEL_MIDPOINT)
    results["riesz_1d_n4096_s"] = (time.perf_counter() - t0) / 5

    # riesz_apply 2d, 128x128 cells
    v2 = np.exp(rng.standard_normal((128, 128)))
    K.riesz_apply(v2[:8, :8], 1.0 / 8, 0.5, K.KERNEL_MIDPOINT)
    t0 = time.perf_counter()
    K.riesz_apply(v2, 1.0 / 128, 0.5, K.KERNEL_MIDPOINT)
    results["riesz_2d_128x128_s"] = time.perf_counter() - t0

    # luxemburg_batch over the cube corpus of a lognormal weight
    mesh = Mesh(1, 0, 10)
    w = StepFunction(mesh, np.exp(rng.standard_normal(mesh.cells_per_axis)))
    vals, wts, indptr, vols = [], [], [0], []
    h = mesh.cell_width
    for lev in range(0, mesh.finest_exponent + 1):
        size = 1 << (mesh.finest_exponent - lev)
        for i in range(1 << lev):
            vals.extend(w.values[i * size : (i + 1) * size])
            wts.extend([h] * size)
            indptr.append(len(vals))
            vols.append(size * h)
    args = (
        np.array(vals),
        np.array(wts),
        np.array(indptr, dtype=np.int64),
        np.array(vols),
        K.KIND_LOG_BUMP,
        4.0,
        1.0,
    )
    K.luxemburg_batch(*args)  # warm jit
    t0 = time.perf_counter()
    for _ in range(3):
        lam = K.luxemburg_batch(*args)
    results["luxemburg_2047_groups_s"] = (time.perf_counter() - t0) / 3
    results["luxemburg_checksum"] = float(np.sum(lam))

    # end-to-end: reference operator + sparse construction at L = 9
    mesh9 = Mesh(1, 0, 9)
    f = StepFunction(mesh9, np.exp(rng.standard_normal(mesh9.cells_per_axis)))
    t0 = time.perf_counter()
    riesz_reference(f, 0.5, KernelMode.MIDPOINT)
    build_sparse(f, (0,), 0.5)
    results["pipeline_L9_s"] = time.perf_counter() - t0

    print(json.dumps(results, sort_keys=True))


def main():
    rows = []
    for disable in ("", "1"):
        env = dict(os.environ, RIESZW_NO_NUMBA=disable)
        out = subprocess.run(
            [sys.executable, __file__, "--worker"],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        rows.append(json.loads(out.stdout.strip().splitlines()[-1]))

    keys = [k for k in sorted(rows[0]) if k.endswith("_s")]
    print(f"{'kernel':32s} {rows[0]['backend']:>12s} {rows[1]['backend']:>12s} {'speedup':>8s}")
    for k in keys:
        a, b = rows[0][k], rows[1][k]
        print(f"{k:32s} {a:12.4f} {b:12.4f} {b / a:7.2f}x")
    da = abs(rows[0]["luxemburg_checksum"] - rows[1]["luxemburg_checksum"])
    rel = da / abs(rows[1]["luxemburg_checksum"])
    print(f"luxemburg checksum agreement: rel diff {rel:.2e}")
    assert rel < 1e-9


if __name__ == "__main__":
    if "--worker" in sys.argv:
        _worker()
    else:
        main()
