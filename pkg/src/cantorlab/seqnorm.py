"""Weight sequences and Lorentz-type norms on singular spectra.

The canonical weights are the discrete slopes rho_k = h'(k) of the growth
profile h(x) = 1/f^{-1}(1/x); they generate the norm against which the
commutator experiments are measured.  Weight sequences are finite prefixes
with an explicit start index and horizon so every result is reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, StartIndexNotFoundError, WeightError
from .gauge import GaugeSpec, growth_profile, inverse

_MONOTONE_SLACK = 1e-12


@dataclass(frozen=True)
class WeightSequence:
    """Nonincreasing weights pi_k for k = start_index, start_index+1, ...

    Weights must be nonnegative with a positive leading entry; zeros are
    allowed as padding so single-weight and truncated sequences are
    expressible.  ``generator`` tags closed-form origins ("rho", "harmonic",
    "custom"); divergence of the full series is known analytically for the
    first two and undecidable from a finite prefix otherwise.
    """

    values: np.ndarray = field(repr=False)
    start_index: int = 1
    generator: str = "custom"

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size == 0:
            raise WeightError("weights must be a nonempty 1-d sequence")
        if self.start_index < 1:
            raise WeightError("start_index must be >= 1")
        if vals[0] <= 0.0 or np.any(vals < 0.0) or not np.all(np.isfinite(vals)):
            raise WeightError("weights must be finite, >= 0, with values[0] > 0")
        if np.any(np.diff(vals) > _MONOTONE_SLACK * vals[0]):
            raise WeightError("weights must be nonincreasing")

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def horizon(self) -> int:
        """Largest absolute index carried by this prefix."""
        return self.start_index + len(self) - 1

    @property
    def diverges(self) -> bool | None:
        """Analytic divergence flag; None when unknown (custom prefixes)."""
        if self.generator in ("rho", "harmonic"):
            return True
        return None

    def partial_sum(self, count: int) -> float:
        """Sum of the first ``count`` weights (fixed index order)."""
        if count > len(self):
            raise WeightError(f"only {len(self)} weights, {count} requested")
        return float(np.sum(self.values[:count]))

    def prefix_sums(self, count: int) -> np.ndarray:
        if count > len(self):
            raise WeightError(f"only {len(self)} weights, {count} requested")
        return np.cumsum(self.values[:count])


def harmonic_weights(count: int, start_index: int = 1) -> WeightSequence:
    """pi_k = 1/k for k = start_index .. start_index + count - 1."""
    k = np.arange(start_index, start_index + count, dtype=float)
    return WeightSequence(1.0 / k, start_index=start_index, generator="harmonic")


def canonical_weights(g: GaugeSpec, start_index: int, count: int) -> WeightSequence:
    """Slopes of the growth profile: values[i] = h'(start_index + i).

    Raises WeightError when h' is not nonincreasing from ``start_index``
    over the requested range (start index too small for this gauge).
    """
    if start_index < 1:
        raise WeightError("start_index must be >= 1")
    if count < 1:
        raise WeightError("count must be >= 1")
    k = np.arange(start_index, start_index + count, dtype=float)
    _, vals = growth_profile(g, k)
    if np.any(np.diff(vals) > _MONOTONE_SLACK * vals[0]):
        raise WeightError(
            f"h' increases within [{start_index}, {start_index + count - 1}] "
            f"for {g.label()}; raise the start index"
        )
    return WeightSequence(vals, start_index=start_index, generator="rho")


def shift(pi: WeightSequence, times: int) -> WeightSequence:
    """Drop the first ``times`` weights; start index moves up by ``times``."""
    if times < 0:
        raise WeightError("shift count must be >= 0")
    if times >= len(pi):
        raise WeightError(f"cannot shift {times} of {len(pi)} weights away")
    if times == 0:
        return pi
    return WeightSequence(
        pi.values[times:], start_index=pi.start_index + times, generator=pi.generator
    )


def lorentz_norm(pi: WeightSequence, xs) -> float:
    """Weighted rearrangement norm: sum of pi_k times the k-th largest |x|.

    The spectrum is sorted nonincreasing and paired with the weight prefix
    starting at position 1; summation order is fixed, so results never
    depend on thread counts.  Raises WeightError when the prefix is shorter
    than the spectrum.
    """
    vals = np.sort(np.abs(np.ascontiguousarray(xs, dtype=float)))[::-1]
    if vals.size > len(pi):
        raise WeightError(
            f"spectrum of length {vals.size} exceeds weight horizon {len(pi)}"
        )
    return float(np.sum(pi.values[: vals.size] * vals))


def regularity_constant(pi: WeightSequence, m_max: int) -> float:
    """Empirical regularity constant: max over m of partial_sum(m)/(m*pi_m).

    Stays bounded for regular sequences (e.g. the canonical weights) and
    grows like log for the harmonic sequence.
    """
    if m_max > len(pi):
        raise WeightError(f"m_max {m_max} exceeds weight count {len(pi)}")
    sums = np.cumsum(pi.values[:m_max])
    m = np.arange(1, m_max + 1, dtype=float)
    denom = m * pi.values[:m_max]
    if np.any(denom <= 0.0):
        raise WeightError("regularity constant needs strictly positive weights")
    return float(np.max(sums / denom))


def choose_start_index(g: GaugeSpec, epsilon: float, m_max: int,
                       k_horizon: int, samples: int = 64) -> int:
    """Smallest N <= k_horizon with nonincreasing slopes and stable scaling.

    Condition (a): h' is nonincreasing on [N, k_horizon] (sampled log grid).
    Condition (b): |f^{-1}(1/k) / f^{-1}(1/(m*k)) - m**(1/s)| < epsilon for
    every sampled k in [N, k_horizon] and every integer m <= m_max.  The
    deviation decreases in k for the built-in families, so the smallest
    admissible N is located by integer bisection and re-verified on a fresh
    sample.  Raises StartIndexNotFoundError when no N qualifies.
    """
    if epsilon <= 0.0:
        raise DomainError("epsilon must be positive")
    if m_max < 1 or k_horizon < 1:
        raise DomainError("m_max and k_horizon must be >= 1")
    s = g.rv_index
    ms = np.arange(1, m_max + 1, dtype=float)

    def max_deviation(k: np.ndarray) -> np.ndarray:
        k = np.atleast_1d(np.asarray(k, dtype=float))
        num = inverse(g, 1.0 / k)
        devs = np.empty((ms.size, k.size))
        for i, m in enumerate(ms):
            devs[i] = np.abs(num / inverse(g, 1.0 / (m * k)) - m ** (1.0 / s))
        return devs.max(axis=0)

    grid = np.unique(
        np.rint(np.exp(np.linspace(0.0, math.log(k_horizon), samples))).astype(np.int64)
    )
    _, slopes = growth_profile(g, grid.astype(float))
    if np.any(np.diff(slopes) > _MONOTONE_SLACK * slopes[0]):
        raise StartIndexNotFoundError(
            f"h' not nonincreasing up to horizon {k_horizon} for {g.label()}"
        )
    devs = max_deviation(grid.astype(float))
    ok = devs < epsilon
    if not ok[-1]:
        raise StartIndexNotFoundError(
            f"no start index <= {k_horizon} reaches deviation {epsilon:g} "
            f"(deviation at horizon: {devs[-1]:.3g})"
        )
    if ok[0]:
        lo_idx = 0
    else:
        lo_idx = int(np.max(np.flatnonzero(~ok))) + 1
    # integer bisection for the smallest admissible N in (grid[lo-1], grid[lo]]
    hi = int(grid[lo_idx])
    lo = 1 if lo_idx == 0 else int(grid[lo_idx - 1])
    if float(max_deviation(np.array([float(lo)]))[0]) < epsilon:
        hi = lo
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if float(max_deviation(np.array([float(mid)]))[0]) < epsilon:
            hi = mid
        else:
            lo = mid
    n_found = hi
    # verify on a fresh log sample of [N, horizon]
    check = np.unique(
        np.rint(
            np.exp(np.linspace(math.log(n_found), math.log(k_horizon), 100))
        ).astype(np.int64)
    )
    if np.any(max_deviation(check.astype(float)) >= epsilon):
        raise StartIndexNotFoundError(
            f"deviation bound {epsilon:g} fails on re-check beyond N={n_found}"
        )
    return n_found


def obstruction_window(g: GaugeSpec, pi: WeightSequence, m_range) -> tuple[float, float]:
    """inf and sup of m * pi_m * f^{-1}(1/m) over the given indices.

    A window bounded away from 0 and infinity is the hypothesis under which
    the weighted commutator norms stay bounded below and above.
    """
    m = np.ascontiguousarray(m_range, dtype=np.int64)
    if m.size == 0:
        raise DomainError("m_range must be nonempty")
    if m.min() < pi.start_index or m.max() > pi.horizon:
        raise WeightError(
            f"m_range must lie within [{pi.start_index}, {pi.horizon}]"
        )
    vals = window_values(g, pi, m)
    return float(vals.min()), float(vals.max())


def window_values(g: GaugeSpec, pi: WeightSequence, m_range) -> np.ndarray:
    """The window quantity m * pi_m * f^{-1}(1/m), elementwise."""
    m = np.ascontiguousarray(m_range, dtype=np.int64)
    weights = pi.values[m - pi.start_index]
    return m.astype(float) * weights * inverse(g, 1.0 / m.astype(float))


def vanishing_sequence(g: GaugeSpec, pi: WeightSequence, n: int, m_range) -> np.ndarray:
    """Diagnostic f^{-1}(1/m**n) * sum_{k <= m**n} pi_k per m in m_range.

    A vanishing liminf signals that the ideal built from ``pi`` cannot
    obstruct diagonalization; the canonical weights keep it bounded away
    from zero.
    """
    m = np.ascontiguousarray(m_range, dtype=np.int64)
    if np.any(m < 1):
        raise DomainError("m_range must be >= 1")
    counts = m.astype(object) ** n  # exact ints, overflow-safe
    top = int(max(counts))
    if top > len(pi):
        raise WeightError(
            f"need {top} weights for the largest m**n, have {len(pi)}"
        )
    sums = np.cumsum(pi.values[:top])
    counts = np.asarray([int(c) for c in counts], dtype=np.int64)
    return inverse(g, 1.0 / counts.astype(float)) * sums[counts - 1]
