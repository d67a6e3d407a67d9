"""Compare the numba and numpy kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--nodes N] [--repeat K]
"""

import argparse
import time

import numpy as np

from opmax import kernels
from opmax.graph import generate_pa


def _timed(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", type=int, default=10000)
    ap.add_argument("--m", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    g = generate_pa(args.nodes, args.m, seed=0)
    indptr, indices = g.csr()
    rev = g.reverse_edges()
    rng = np.random.default_rng(1)
    q = rng.uniform(0.0, 1.0, len(indices))
    reward = rng.uniform(0.0, 0.5, g.n)
    frozen = np.zeros(g.n, dtype=bool)
    pi = rng.uniform(0.0, 1.0, len(indices))
    omega = rng.integers(-1, 3, g.n)
    gate_mu = rng.uniform(0.0, 1.0, g.n)
    zeta = rng.uniform(0.0, 2.0, g.n)

    backends = ["numpy"] + (["numba"] if kernels._HAS_NUMBA else [])
    print(f"graph: {g.n} nodes, {g.edge_count} edges; best of {args.repeat}")
    results = {}
    for backend in backends:
        t_q = min(_timed(lambda: kernels.q_sweep(
            indptr, indices, rev, reward, 0.9, q, frozen, backend=backend))
            for _ in range(args.repeat + 1))
        t_d = min(_timed(lambda: kernels.diffusion_delta(
            indptr, indices, pi, omega, gate_mu, zeta, 0.1, 3, backend=backend))
            for _ in range(args.repeat + 1))
        results[backend] = (t_q, t_d)
        print(f"  {backend:6s}  q_sweep {t_q * 1e3:8.3f} ms   "
              f"diffusion_delta {t_d * 1e3:8.3f} ms")
    if len(backends) == 2:
        a, b = results["numpy"], results["numba"]
        print(f"  speedup numba/numpy: q_sweep {a[0] / b[0]:.1f}x, "
              f"diffusion_delta {a[1] / b[1]:.1f}x")
        out_np = kernels.q_sweep(indptr, indices, rev, reward, 0.9, q, frozen,
                                 backend="numpy")
        out_nb = kernels.q_sweep(indptr, indices, rev, reward, 0.9, q, frozen,
                                 backend="numba")
        print(f"  bit-identical q_sweep outputs: {np.array_equal(out_np, out_nb)}")


if __name__ == "__main__":
    main()
