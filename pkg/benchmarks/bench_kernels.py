#!/usr/bin/env python3
"""Benchmark the numba and numpy kernel lanes against each other.

Times the two hot kernels (cell-coordinate synthesis and grouped standard
deviations) on full models of increasing depth.  Run from the repo root:

    python benchmarks/bench_kernels.py

The active lane for the installed package follows CANTORLAB_BACKEND; this
script calls both implementations directly, so no environment juggling is
needed.  The first numba call includes JIT compilation and is excluded via
a warmup pass.
"""

import time

import numpy as np

from cantorlab import _kernels
from cantorlab.fractal import build_complex
from cantorlab.gauge import GaugeSpec

try:
    _numba_coords, _numba_gstd = _kernels._make_numba_lane()
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

REPEATS = 5


def best_of(fn, *args):
    fn(*args)  # warmup (and JIT compile for the numba lane)
    best = float("inf")
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    print(f"numba available: {HAS_NUMBA}; package lane: {_kernels.BACKEND}")
    header = f"{'kernel':<28}{'size':>10}{'numpy':>12}{'numba':>12}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for depth in (6, 8, 10):
        comp = build_complex(GaugeSpec("power", 1.5), depth=depth)
        codes = np.arange(1 << (2 * depth), dtype=np.int64)
        offsets = comp.offsets
        t_np = best_of(_kernels._coords_numpy, codes, 2, depth, offsets)
        t_nb = best_of(_numba_coords, codes, 2, depth, offsets) if HAS_NUMBA else float("nan")
        ratio = t_np / t_nb if HAS_NUMBA else float("nan")
        print(f"{'cell_coords':<28}{codes.size:>10}{t_np * 1e3:>10.2f}ms"
              f"{t_nb * 1e3:>10.2f}ms{ratio:>8.1f}x")

        level = depth // 2
        values = _kernels.cell_coords(codes, 2, depth, offsets)[:, 0]
        blocks = 1 << (2 * level)
        block_size = codes.size // blocks
        starts = (np.arange(blocks) * block_size).astype(np.int64)
        counts = np.full(blocks, block_size, dtype=np.int64)
        t_np = best_of(_kernels._grouped_std_numpy, values, starts, counts)
        t_nb = best_of(_numba_gstd, values, starts, counts) if HAS_NUMBA else float("nan")
        ratio = t_np / t_nb if HAS_NUMBA else float("nan")
        print(f"{'grouped_std (L=' + str(level) + ')':<28}{codes.size:>10}"
              f"{t_np * 1e3:>10.2f}ms{t_nb * 1e3:>10.2f}ms{ratio:>8.1f}x")

    if HAS_NUMBA:
        # lane agreement on the largest case
        a = _kernels._coords_numpy(codes, 2, depth, offsets)
        b = _numba_coords(codes, 2, depth, offsets)
        print(f"coords lanes bitwise equal: {np.array_equal(a, b)}")
        sa = _kernels._grouped_std_numpy(values, starts, counts)
        sb = _numba_gstd(values, starts, counts)
        rel = np.max(np.abs(sa - sb) / sa)
        print(f"grouped_std lanes max rel diff: {rel:.3e}")


if __name__ == "__main__":
    main()
