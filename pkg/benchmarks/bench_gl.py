#!/usr/bin/env python3
"""Benchmark the Grünwald-Letnikov kernel: compiled extension vs NumPy
fallback.

Run:  python benchmarks/bench_gl.py [--alpha 0.5] [--repeats 3]

The full-history convolution is O(N^2), so the grid sizes below span the
regime the acceptance checks use (N = 10^4 at dt = 1e-4) up to a stress
size.
"""

import argparse
import importlib
import time

import numpy as np


def load_backends():
    backends = {}
    try:
        backends["compiled"] = importlib.import_module("fracsym._glkernel")
    except ImportError:
        pass
    backends["python"] = importlib.import_module("fracsym._glkernel_py")
    return backends


def run_once(impl, alpha: float, f: np.ndarray) -> tuple[float, np.ndarray]:
    n = f.shape[0]
    w = np.empty(n)
    out = np.empty(n)
    start = time.perf_counter()
    impl.gl_weights(alpha, w)
    impl.gl_convolve(w, f, out, n)
    return time.perf_counter() - start, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--sizes", type=int, nargs="*",
                    default=[1_000, 4_000, 10_001, 20_000])
    args = ap.parse_args()

    backends = load_backends()
    if "compiled" not in backends:
        print("note: compiled extension not built; benchmarking the "
              "fallback only")

    print(f"alpha = {args.alpha}, best of {args.repeats}")
    header = f"{'N':>8} " + " ".join(f"{name:>14}" for name in backends)
    if len(backends) == 2:
        header += f" {'speedup':>9} {'max |diff|':>12}"
    print(header)

    for n in args.sizes:
        ts = np.linspace(0.0, 1.0, n)
        f = ts ** 2
        best = {}
        results = {}
        for name, impl in backends.items():
            times = []
            for _ in range(args.repeats):
                elapsed, out = run_once(impl, args.alpha, f)
                times.append(elapsed)
            best[name] = min(times)
            results[name] = out
        row = f"{n:>8} " + " ".join(f"{best[name] * 1e3:>12.2f}ms"
                                    for name in backends)
        if len(backends) == 2:
            speedup = best["python"] / best["compiled"]
            diff = float(np.max(np.abs(results["python"]
                                       - results["compiled"])))
            row += f" {speedup:>8.2f}x {diff:>12.3e}"
        print(row)


if __name__ == "__main__":
    main()
