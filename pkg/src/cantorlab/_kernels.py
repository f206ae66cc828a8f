"""Hot array kernels with a numba lane and a pure-numpy fallback.

Two kernels dominate model construction and spectrum evaluation:

* ``cell_coords``: per-cell anchor coordinates from base-2**n digit
  expansions of cell codes against a per-generation offset table;
* ``grouped_std``: population standard deviation over contiguous groups.

The lane is chosen once at import time: numba when importable, else numpy.
Set ``CANTORLAB_BACKEND=numpy`` (or ``numba``) to force a lane; forcing
numba without the package installed raises at import.  Both lanes are
sequential, so outputs never depend on thread counts.  The numpy and numba
implementations accumulate in the same index order; coordinates agree
bitwise, grouped moments to a few ulp.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_FLAG = "CANTORLAB_BACKEND"


def _coords_numpy(codes, n, depth, offsets):
    out = np.zeros((codes.size, n), dtype=np.float64)
    mask = (1 << n) - 1
    for m in range(depth):
        letters = (codes >> (n * (depth - 1 - m))) & mask
        for j in range(n):
            bit = (letters >> (n - 1 - j)) & 1
            out[:, j] += bit * offsets[m]
    return out


def _grouped_std_numpy(values, starts, counts):
    sums = np.add.reduceat(values, starts)
    means = sums / counts
    dev = values - np.repeat(means, counts)
    var = np.add.reduceat(dev * dev, starts) / counts
    return np.sqrt(var)


def _make_numba_lane():
    from numba import njit

    @njit(cache=True)
    def coords(codes, n, depth, offsets):  # pragma: no cover - jit body
        out = np.zeros((codes.size, n), dtype=np.float64)
        mask = (1 << n) - 1
        for i in range(codes.size):
            code = codes[i]
            for m in range(depth):
                letter = (code >> (n * (depth - 1 - m))) & mask
                for j in range(n):
                    bit = (letter >> (n - 1 - j)) & 1
                    out[i, j] += bit * offsets[m]
        return out

    @njit(cache=True)
    def grouped_std(values, starts, counts):  # pragma: no cover - jit body
        ngroups = starts.size
        out = np.empty(ngroups, dtype=np.float64)
        for gidx in range(ngroups):
            lo = starts[gidx]
            cnt = counts[gidx]
            total = 0.0
            for i in range(lo, lo + cnt):
                total += values[i]
            mean = total / cnt
            acc = 0.0
            for i in range(lo, lo + cnt):
                d = values[i] - mean
                acc += d * d
            out[gidx] = np.sqrt(acc / cnt)
        return out

    return coords, grouped_std


def _resolve_backend() -> str:
    requested = os.environ.get(_ENV_FLAG, "").strip().lower()
    if requested not in ("", "numba", "numpy"):
        raise ValueError(f"{_ENV_FLAG} must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if requested == "numba":
            raise
        return "numpy"
    return "numba"


BACKEND = _resolve_backend()

if BACKEND == "numba":
    _coords_impl, _grouped_std_impl = _make_numba_lane()
else:
    _coords_impl, _grouped_std_impl = _coords_numpy, _grouped_std_numpy


def cell_coords(codes: np.ndarray, n: int, depth: int, offsets: np.ndarray) -> np.ndarray:
    """Anchor coordinates, one row per cell code.

    ``codes`` are base-2**n expansions of cell words (first letter most
    significant); ``offsets[m]`` is the per-axis corner offset contributed by
    generation m+1.  Axis j of letter k is bit (n-1-j) of k-1, matching the
    lexicographic corner order.
    """
    codes = np.ascontiguousarray(codes, dtype=np.int64)
    offsets = np.ascontiguousarray(offsets, dtype=np.float64)
    if depth == 0:
        return np.zeros((codes.size, n), dtype=np.float64)
    return _coords_impl(codes, n, depth, offsets)


def grouped_std(values: np.ndarray, starts: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Population standard deviation of each contiguous group of ``values``."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    starts = np.ascontiguousarray(starts, dtype=np.int64)
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    return _grouped_std_impl(values, starts, counts)
