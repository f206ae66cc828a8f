"""Gauge functions: evaluation, derivatives, inversion, and diagnostics.

A gauge function f is increasing with f(0+) = 0 and generates a Hausdorff
measure through sums of f(radius) over ball covers.  Three built-in families
are supported:

* ``power``:     f(x) = x**s on (0, inf), s >= 1
* ``example37``: f(x) = x / log(e/x) on (0, 1]
* ``power_log``: f(x) = x**s * log(e/x)**(-beta) on (0, 1], s >= 1, beta >= 0

``example37`` coincides with ``power_log`` at s=1, beta=1 but keeps its own
name because it is the canonical slowly-varying test case.  All operations
accept scalars or numpy arrays and are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

_INVERSE_REL_TOL = 1e-14
_INVERSE_MAX_ITER = 200
_LAMBERT_MAX_ITER = 50

FAMILIES = ("power", "example37", "power_log")


@dataclass(frozen=True)
class GaugeSpec:
    """A gauge function from a built-in family, with closed-form derivatives.

    Parameters
    ----------
    family : str
        One of ``power``, ``example37``, ``power_log``.
    s : float, optional
        Regular-variation index at 0 (power and power_log; must be >= 1).
        ``example37`` has index 1 and takes no parameter.
    beta : float, optional
        Log exponent for power_log (must be >= 0).
    """

    family: str
    s: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown gauge family {self.family!r}")
        if self.family == "power":
            if self.s is None or not (self.s >= 1):
                raise DomainError("power gauge requires s >= 1")
            if self.beta is not None:
                raise DomainError("power gauge takes no beta")
        elif self.family == "example37":
            if self.s not in (None, 1, 1.0):
                raise DomainError("example37 has fixed index s = 1")
            if self.beta not in (None, 1, 1.0):
                raise DomainError("example37 has fixed log exponent beta = 1")
        else:
            if self.s is None or not (self.s >= 1):
                raise DomainError("power_log gauge requires s >= 1")
            if self.beta is None or not (self.beta >= 0):
                raise DomainError("power_log gauge requires beta >= 0")

    @property
    def rv_index(self) -> float:
        """Regular-variation index of the family at 0."""
        return 1.0 if self.family == "example37" else float(self.s)

    @property
    def x_max(self) -> float:
        """Right end of the validated domain."""
        return math.inf if self.family == "power" else 1.0

    @property
    def ambient_dim(self) -> int:
        """Default ambient dimension floor(s) + 1 for the Cantor complex."""
        return int(math.floor(self.rv_index)) + 1

    def label(self) -> str:
        if self.family == "power":
            return f"power(s={self.s:g})"
        if self.family == "example37":
            return "example37"
        return f"power_log(s={self.s:g}, beta={self.beta:g})"


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, (arr.ndim == 0)


def _restore(arr, scalar):
    return float(arr) if scalar else arr


def _check_domain(g: GaugeSpec, x: np.ndarray, name: str = "x") -> None:
    bad = ~np.isfinite(x) | (x <= 0.0) | (x > g.x_max)
    if np.any(bad):
        offender = np.asarray(x)[bad].flat[0]
        raise DomainError(
            f"{name}={offender!r} outside domain (0, {g.x_max:g}] of {g.label()}"
        )


def evaluate(g: GaugeSpec, x):
    """Evaluate f(x).  Strictly increasing on the validated domain."""
    arr, scalar = _as_array(x)
    _check_domain(g, arr)
    if g.family == "power":
        out = arr**g.s
    elif g.family == "example37":
        out = arr / (1.0 - np.log(arr))
    else:
        out = arr**g.s * (1.0 - np.log(arr)) ** (-g.beta)
    return _restore(out, scalar)


def derivatives(g: GaugeSpec, x):
    """Closed-form (f'(x), f''(x)); f' > 0 on the domain interior."""
    arr, scalar = _as_array(x)
    _check_domain(g, arr)
    if g.family == "power":
        s = g.s
        d1 = s * arr ** (s - 1.0)
        d2 = s * (s - 1.0) * arr ** (s - 2.0)
    elif g.family == "example37":
        L = 1.0 - np.log(arr)
        d1 = (L + 1.0) / L**2
        d2 = (L + 2.0) / (arr * L**3)
    else:
        s, b = g.s, g.beta
        L = 1.0 - np.log(arr)
        d1 = arr ** (s - 1.0) * L ** (-b - 1.0) * (s * L + b)
        bracket = s * (s - 1.0) * L**2 + b * (2.0 * s - 1.0) * L + b * (b + 1.0)
        d2 = arr ** (s - 2.0) * L ** (-b - 2.0) * bracket
    return _restore(d1, scalar), _restore(d2, scalar)


def inverse(g: GaugeSpec, y):
    """Solve f(x) = y for x in (0, x_max].

    Log-space bisection brackets the root of the monotone f, then a few
    Newton steps polish it; the residual |f(x) - y| <= 1e-14 * y is verified
    and a ConvergenceError is raised otherwise (never expected).
    """
    arr, scalar = _as_array(y)
    if np.any(~np.isfinite(arr) | (arr <= 0.0)):
        raise DomainError("inverse requires y > 0")
    if g.x_max < math.inf:
        ymax = evaluate(g, g.x_max)
        if np.any(arr > ymax * (1.0 + 1e-12)):
            raise DomainError(f"y above range of {g.label()} (max {ymax:g})")
        arr = np.minimum(arr, ymax)

    # Bracket in log space: lo far below any realizable root, hi at/above it.
    lo = np.full(arr.shape, 1e-300)
    if g.x_max < math.inf:
        hi = np.ones(arr.shape)
    else:
        # f(x) = x**s >= x for x >= 1, so max(1, y) always bounds the root.
        hi = np.maximum(1.0, arr)
    # 52 log-space halvings localize the root to ~1e-13 relative even from
    # the widest bracket; Newton then reaches machine precision in 1-2 steps
    llo, lhi = np.log(lo), np.log(hi)
    iters = 0
    for _ in range(52):
        mid = np.exp(0.5 * (llo + lhi))
        below = evaluate(g, mid) < arr
        llo = np.where(below, np.log(mid), llo)
        lhi = np.where(below, lhi, np.log(mid))
        iters += 1
    x = np.exp(0.5 * (llo + lhi))
    lo, hi = np.exp(llo), np.exp(lhi)
    for _ in range(6):
        fx = evaluate(g, x)
        d1, _ = derivatives(g, x)
        x_new = x - (fx - arr) / d1
        # keep the iterate inside the verified bracket
        x = np.where((x_new >= lo) & (x_new <= hi), x_new, np.sqrt(lo * hi))
        fx = evaluate(g, x)
        below = fx < arr
        lo = np.where(below, x, lo)
        hi = np.where(below, hi, x)
        iters += 1
        if iters >= _INVERSE_MAX_ITER:
            break
    # pick the best of iterate and bracket ends (Newton can park one ulp off)
    cands = np.stack([x, lo, hi])
    best = np.argmin(np.abs(np.stack([evaluate(g, c) for c in cands]) - arr), axis=0)
    x = np.take_along_axis(cands, best[None, ...], axis=0)[0]
    resid = np.abs(evaluate(g, x) - arr)
    if np.any(resid > _INVERSE_REL_TOL * arr):
        worst = float(np.max(resid / arr))
        raise ConvergenceError(
            f"inverse residual {worst:.3e} above {_INVERSE_REL_TOL:g} "
            f"after {iters} iterations for {g.label()}"
        )
    return _restore(x, scalar)


def growth_profile(g: GaugeSpec, x):
    """Return (h(x), h'(x)) for the growth profile h(x) = 1/f^{-1}(1/x).

    The slope uses the exact chain rule h'(x) = (f(t)/t)**2 / f'(t) with
    t = f^{-1}(1/x), so its accuracy is tied to the inverse solver only.
    Requires 1/x in the range of f (x >= 1 for the bounded families).
    """
    arr, scalar = _as_array(x)
    t = inverse(g, 1.0 / arr)
    ft = evaluate(g, t)
    d1, _ = derivatives(g, t)
    h = 1.0 / t
    hp = (ft / t) ** 2 / d1
    return _restore(h, scalar), _restore(hp, scalar)


@dataclass(frozen=True)
class GaugeReport:
    """Outcome of validate_gauge: sampled regularity checks for one gauge."""

    gauge: str
    grid_points: int
    interval: tuple[float, float]
    fprime_zero_at_origin: bool
    fprime_limit_samples: tuple[float, ...]
    convex: bool
    min_second_derivative: float
    log_concave: bool
    max_log_second_derivative: float
    largest_verified_t0: float

    @property
    def all_passed(self) -> bool:
        return self.fprime_zero_at_origin and self.convex and self.log_concave


def validate_gauge(g: GaugeSpec, t0_search: tuple[float, float] | None = None,
                   grid_points: int = 64) -> GaugeReport:
    """Sampled checks of convexity, log-concavity and f'(0+) = 0.

    f'(0+) is probed on x = 10**-k, k = 4..12 (no symbolic limits); convexity
    and log-concavity are sampled on a log grid of ``grid_points`` points in
    ``t0_search`` (default: (1e-9, x_max), capped at 1 for unbounded
    families).  Failures are report entries, never exceptions.
    """
    if t0_search is None:
        t0_search = (1e-9, min(g.x_max, 1.0))
    a, b = t0_search
    if not (0.0 < a < b <= g.x_max):
        raise DomainError("t0_search must be an interval inside the domain")
    grid = np.exp(np.linspace(math.log(a), math.log(b), grid_points))
    d1, d2 = derivatives(g, grid)
    f = evaluate(g, grid)
    # (log f)'' = (f'' f - f'^2) / f^2
    logf2 = (d2 * f - d1**2) / f**2
    probes = tuple(float(derivatives(g, 10.0**-k)[0]) for k in range(4, 13))
    # sampled limit: probes must decrease markedly toward 0 (slowly varying
    # gauges decay like 1/log, so a magnitude threshold would misfire)
    decreasing = all(b <= a * (1.0 + 1e-12) for a, b in zip(probes, probes[1:]))
    fp0 = decreasing and probes[-1] < 0.75 * probes[0]
    convex = bool(np.all(d2 >= -1e-12))
    logcc = bool(np.all(logf2 <= 1e-12))
    if logcc:
        t0 = float(b)
    else:
        good = logf2 <= 1e-12
        t0 = float(grid[good].max()) if np.any(good) else 0.0
    return GaugeReport(
        gauge=g.label(),
        grid_points=grid_points,
        interval=(float(a), float(b)),
        fprime_zero_at_origin=bool(fp0),
        fprime_limit_samples=probes,
        convex=convex,
        min_second_derivative=float(np.min(d2)),
        log_concave=logcc,
        max_log_second_derivative=float(np.max(logf2)),
        largest_verified_t0=t0,
    )


def rv_index_check(g: GaugeSpec, a_list, x_probe: float):
    """Deviations from exact index-s scaling at x = x_probe.

    For each a > 0 returns ``(a, |f(ax)/f(x) - a**s|,
    |f^{-1}(x)/f^{-1}(ax) - a**(-1/s)|)``.  Both deviations vanish
    identically for the power family and shrink like 1/log for the slowly
    varying ones.
    """
    s = g.rv_index
    rows = []
    for a in a_list:
        a = float(a)
        if a <= 0:
            raise DomainError("scaling factors must be positive")
        fwd = abs(evaluate(g, a * x_probe) / evaluate(g, x_probe) - a**s)
        inv = abs(inverse(g, x_probe) / inverse(g, a * x_probe) - a ** (-1.0 / s))
        rows.append((a, fwd, inv))
    return rows


def lambert_w(x):
    """Principal-branch Lambert W on [0, inf): solves w * exp(w) = x.

    Halley iteration from w0 = log1p(x); the residual |w e^w - x| is driven
    below 1e-13 * max(1, x) in well under the 50-iteration cap.
    """
    arr, scalar = _as_array(x)
    if np.any(arr < 0.0) or np.any(~np.isfinite(arr)):
        raise DomainError("lambert_w requires x >= 0")
    w = np.log1p(arr)
    tol = 1e-13 * np.maximum(1.0, arr)
    for _ in range(_LAMBERT_MAX_ITER):
        ew = np.exp(w)
        resid = w * ew - arr
        if np.all(np.abs(resid) <= tol):
            break
        wp1 = w + 1.0
        denom = ew * wp1 - (w + 2.0) * resid / (2.0 * wp1)
        w = w - resid / np.where(denom == 0.0, 1.0, denom)
    else:
        raise ConvergenceError("lambert_w did not converge in 50 iterations")
    w = np.where(arr == 0.0, 0.0, w)
    return _restore(w, scalar)
