import numpy as np
import pytest

from cantorlab.fractal import build_complex
from cantorlab.gauge import GaugeSpec
from cantorlab.opmodel import build_model, commutator_spectrum


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # first kernel call may JIT-compile; keep that out of timed tests
    comp = build_complex(GaugeSpec("power", 1.0), depth=2)
    model = build_model(comp, 2)
    commutator_spectrum(model, 1, 1)
    yield


def finite_difference(fn, x, step):
    """Central difference oracle for first derivatives."""
    return (fn(x + step) - fn(x - step)) / (2.0 * step)


def second_difference(fn, x, step):
    """Central second-difference oracle."""
    return (fn(x + step) - 2.0 * fn(x) + fn(x - step)) / step**2


def singular_values(matrix):
    """Dense SVD oracle, values sorted nonincreasing."""
    return np.linalg.svd(matrix, compute_uv=False)
