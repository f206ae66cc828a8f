import os
import subprocess
import sys

import numpy as np
import pytest

from cantorlab import _kernels
from cantorlab.fractal import build_complex
from cantorlab.gauge import GaugeSpec

numba = pytest.importorskip("numba", reason="numba lane tests need numba")


@pytest.fixture(scope="module")
def numba_lane():
    return _kernels._make_numba_lane()


@pytest.fixture(scope="module")
def offsets():
    return build_complex(GaugeSpec("power", 1.5), depth=6).offsets


def test_backend_resolved():
    assert _kernels.BACKEND in ("numba", "numpy")


def test_coords_lanes_bitwise_equal(numba_lane, offsets):
    coords_nb, _ = numba_lane
    codes = np.arange(4**6, dtype=np.int64)
    a = _kernels._coords_numpy(codes, 2, 6, offsets)
    b = coords_nb(codes, 2, 6, offsets)
    assert np.array_equal(a, b)


def test_grouped_std_lanes_agree(numba_lane, offsets):
    _, gstd_nb = numba_lane
    codes = np.arange(4**6, dtype=np.int64)
    values = _kernels.cell_coords(codes, 2, 6, offsets)[:, 1]
    for level in (1, 3, 5):
        blocks = 4**level
        size = codes.size // blocks
        starts = (np.arange(blocks) * size).astype(np.int64)
        counts = np.full(blocks, size, dtype=np.int64)
        a = _kernels._grouped_std_numpy(values, starts, counts)
        b = gstd_nb(values, starts, counts)
        assert np.max(np.abs(a - b) / a) <= 1e-14


def test_grouped_std_ragged_groups(numba_lane):
    _, gstd_nb = numba_lane
    rng = np.random.default_rng(3)
    values = rng.normal(size=100)
    starts = np.array([0, 7, 30, 31, 64], dtype=np.int64)
    counts = np.array([7, 23, 1, 33, 36], dtype=np.int64)
    a = _kernels._grouped_std_numpy(values, starts, counts)
    b = gstd_nb(values, starts, counts)
    oracle = np.array(
        [np.std(values[s: s + c]) for s, c in zip(starts, counts)]
    )
    assert np.max(np.abs(a - oracle)) <= 1e-13
    assert np.max(np.abs(b - oracle)) <= 1e-13


def test_depth_zero_coords():
    out = _kernels.cell_coords(np.array([0], dtype=np.int64), 2, 0, np.array([]))
    assert out.shape == (1, 2)
    assert np.all(out == 0.0)


def test_env_flag_forces_numpy():
    env = dict(os.environ, CANTORLAB_BACKEND="numpy")
    code = "from cantorlab import _kernels; print(_kernels.BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert out.returncode == 0
    assert out.stdout.strip() == "numpy"


def test_env_flag_rejects_unknown():
    env = dict(os.environ, CANTORLAB_BACKEND="cuda")
    code = "import cantorlab._kernels"
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert out.returncode != 0
