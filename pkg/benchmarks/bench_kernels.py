"""Compare the compiled and pure-Python kernels on the three hot paths.

    python benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from nextjump import kernels, trajectories
from nextjump.model import figure2_params, figure4_params
from nextjump.propagator import build_generator


def cases(backend: str):
    p2 = figure2_params()
    A = build_generator(p2).matrix
    M = kernels.rk4_matrix(A, 0.01)
    P = kernels.rk4_poly(A, 0.01)
    y0 = np.array([1.0, 0.0, 0.0])
    states = kernels.propagate(M, y0, 200_000, backend="python")
    w = np.einsum("ij,ij->i", states, states)
    wmin = np.minimum.accumulate(w)
    us = np.random.default_rng(0).uniform(wmin[-1], 1.0, 100_000)
    idx = np.searchsorted(-wmin, -us, side="right") - 1
    p4 = figure4_params()
    return {
        "propagate 1e6 steps": lambda: kernels.propagate(M, y0, 1_000_000, 100, backend=backend),
        "scan to W < 1e-3": lambda: kernels.scan_survival(M, y0, 1e-3, 10**7, backend=backend),
        "refine 1e5 crossings": lambda: kernels.refine_crossings(states, idx, us, P, 20, backend=backend),
        "8 records, Fig. 4": lambda: trajectories.simulate_records(p4, 8e-3, 8, seed=1, backend=backend),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = kernels.available_backends()
    results = {b: {name: min(timeit.repeat(fn, number=1, repeat=args.repeat)) for name, fn in cases(b).items()} for b in backends}
    names = list(results[backends[0]])
    print(f"{'case':<24}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for name in names:
        row = f"{name:<24}" + "".join(f"{results[b][name]:>11.4f}s" for b in backends)
        if len(backends) == 2:
            row += f"{results['python'][name] / results['cython'][name]:>11.1f}x"
        print(row)
    if len(backends) == 1:
        print("compiled kernels not built; only the fallback was timed")


if __name__ == "__main__":
    main()
