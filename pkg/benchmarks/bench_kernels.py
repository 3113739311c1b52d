"""Time the numba and numpy kernel backends on representative workloads.

    python benchmarks/bench_kernels.py [--repeat 3] [--paths 20000]

The first numba call of each kernel includes compilation and is reported
separately as ``warmup``.
"""

import argparse
import math
import time

import numpy as np

from unicurrent import _accel, kernels
from unicurrent.diffusion import DiffusionModel, point_mass, simulate_absorbing
from unicurrent.fresnel import fresnel_base
from unicurrent.propagation import propagate
from unicurrent.wavefunction import PiecewiseWavefunction


def workloads(n_paths):
    u = np.linspace(-20, 20, 200_000)
    g0 = np.where(np.abs(u) > kernels.SERIES_RADIUS, fresnel_base(u), 0.0)
    nodes, weights = np.polynomial.legendre.leggauss(20)
    edges = np.linspace(-30.0, 30.0, 4001)
    y = np.linspace(-0.1, 0.1, 41)
    q = np.array([0, 1, 1], dtype=complex)
    wf = PiecewiseWavefunction([0, 1, 1], 1.0)
    bm = DiffusionModel.brownian(math.sqrt(2.0))
    return {
        "moments": lambda: kernels.regularized_moments(u, g0, 4),
        "panel": lambda: kernels.panel_quadrature(edges, nodes, weights, 2, 1e-3),
        "direct": lambda: kernels.direct_propagator(y, q, 1.0, 1e-3, 20_000),
        "propagate": lambda: propagate(wf, 1e-3),
        "monte-carlo": lambda: simulate_absorbing(bm, point_mass(-1.0), 0.0, 0.5, 1e-3, n_paths, 1),
    }


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--paths", type=int, default=20_000)
    args = ap.parse_args(argv)
    backends = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])
    old = _accel.get_backend()
    rows = []
    try:
        for name, fn in workloads(args.paths).items():
            row = {"kernel": name}
            for b in backends:
                _accel.set_backend(b)
                t0 = time.perf_counter()
                fn()
                row[f"{b}_warmup"] = time.perf_counter() - t0
                row[b] = best_of(fn, args.repeat)
            rows.append(row)
    finally:
        _accel.set_backend(old)
    print(f"{'kernel':<12} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8}")
    for r in rows:
        nb = r.get("numba", math.nan)
        print(f"{r['kernel']:<12} {r['numpy']:>10.4f} {nb:>10.4f} {r['numpy'] / nb:>8.1f}")
    return rows


if __name__ == "__main__":
    main()
