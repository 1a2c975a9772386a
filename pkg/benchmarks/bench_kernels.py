#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy fallback.

The integration loop is single-source: numba's @njit compiles it when
available, and KIRCHHOFFSIM_NO_NUMBA=1 selects the interpreted path with
identical arithmetic. This script runs the same long-horizon problem in a
child process per mode and reports wall times.

Usage:
    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --mode numba   # one mode, in-process
"""

import argparse
import os
import subprocess
import sys
import time


def run_case(repeats: int) -> dict:
    import numpy as np

    import kirchhoffsim as ks

    p = ks.build_problem([1, 2, 3], 1.0, 0.05, [1, 0.5, 0.25], [0, 0, 0])
    ks.evolve(p, 1e3)  # warmup: JIT compile / cache load
    times = []
    checksum = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        tr = ks.evolve(p, 1e5)
        times.append(time.perf_counter() - t0)
        checksum = float(np.sum(tr.u[-1]) + tr.B[-1])
    return {
        "numba": ks.USING_NUMBA,
        "best": min(times),
        "mean": sum(times) / len(times),
        "samples": tr.n_samples,
        "checksum": checksum,
    }


def child(mode: str, repeats: int) -> dict:
    env = dict(os.environ)
    env["KIRCHHOFFSIM_NO_NUMBA"] = "1" if mode == "numpy" else "0"
    out = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--mode", mode,
         "--repeats", str(repeats)],
        env=env, capture_output=True, text=True, check=True)
    line = out.stdout.strip().splitlines()[-1]
    parts = dict(kv.split("=") for kv in line.split())
    return {k: float(v) if k != "numba" else v == "True" for k, v in parts.items()}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--mode", choices=["compare", "numba", "numpy"],
                    default="compare")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    if args.mode != "compare":
        res = run_case(args.repeats)
        print(f"numba={res['numba']} best={res['best']:.6f} "
              f"mean={res['mean']:.6f} samples={res['samples']} "
              f"checksum={res['checksum']!r}")
        return

    print("long-horizon run (t_end=1e5, 3 modes), best of", args.repeats)
    res_j = child("numba", args.repeats)
    res_n = child("numpy", args.repeats)
    print(f"  numba kernels : {res_j['best'] * 1e3:9.2f} ms"
          f"  (compiled={res_j['numba']})")
    print(f"  numpy fallback: {res_n['best'] * 1e3:9.2f} ms")
    if res_j["checksum"] != res_n["checksum"]:
        print("  WARNING: paths disagree bitwise")
    else:
        print("  results bit-identical across paths")
    print(f"  speedup: {res_n['best'] / res_j['best']:.1f}x")


if __name__ == "__main__":
    main()
