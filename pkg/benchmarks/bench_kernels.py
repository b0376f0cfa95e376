"""Compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each row runs the same workload through both implementations, checks the
results agree and prints the per-call time and the speedup.
"""
import argparse
import time

import numpy as np

from nielsen_kit import _backend
from nielsen_kit import _kernels_py as pure
from nielsen_kit import torus as T
from nielsen_kit.corpus import smooth_corpus


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def workloads():
    p1 = T.matrix_pool(1, nondegenerate=True)
    p2 = T.matrix_pool(2, nondegenerate=True)
    data = np.concatenate([p1.ravel(), p2.ravel(), p2.ravel()]).astype(np.int64)
    offs = np.array([0, p1.size, p1.size + p2.size], dtype=np.int64)
    sizes = [len(p1), len(p2), len(p2)]
    dims = [1, 2, 2]
    total = int(np.prod(sizes))
    step = total // 2000 | 1
    yield ("product (1,2,2), 2000 tuples",
           lambda: _backend.kernels.product_chunk(data, offs, np.array(sizes, dtype=np.int64),
                                                  np.array(dims, dtype=np.int64), 0, total, step)[:3],
           lambda: pure.product_chunk(data, offs, sizes, dims, 0, total, step)[:3])

    pool = T.matrix_pool(2)
    flat = np.ascontiguousarray(pool.ravel(), dtype=np.int64)
    n = len(pool)
    step = n ** 3 // 2000 | 1
    yield ("cyclic d=2 m=3, 2000 tuples",
           lambda: _backend.kernels.cyclic_chunk(flat, n, 2, 3, 0, n ** 3, step)[:3],
           lambda: pure.cyclic_chunk(flat, n, 2, 3, 0, n ** 3, step)[:3])

    f = smooth_corpus()[15]
    seeds = np.random.default_rng(0).random((4096, 2))
    targets = np.zeros_like(seeds)
    yield ("newton, 4096 seeds",
           lambda: _backend.kernels.newton_batch(*f.arrays(), seeds, targets, 1e-12, 60)[1].tolist(),
           lambda: pure.newton_batch(*f.arrays(), seeds, targets, 1e-12, 60)[1].tolist())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _backend.COMPILED:
        raise SystemExit("compiled kernels are not built; nothing to compare")
    print(f"{'workload':34} {'compiled':>10} {'python':>10} {'speedup':>8}  agree")
    for name, fast, slow in workloads():
        tf, a = best_of(fast, args.repeat)
        ts, b = best_of(slow, 1)
        print(f"{name:34} {tf:9.4f}s {ts:9.4f}s {ts / tf:7.0f}x  {a == b}")


if __name__ == "__main__":
    main()
