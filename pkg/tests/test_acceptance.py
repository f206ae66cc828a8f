"""Acceptance suite: one test per primary verification target.

Each test prints a single PASS/FAIL line with the measured slack and wall
time (run with ``pytest tests/test_acceptance.py -v -s`` to see them) and
asserts its stated tolerance and runtime budget.

One check is marked strict-xfail: the variant of the Lambert-W closed form
for the canonical slope that carries a factor e.  The exact identity,
verified symbolically and against finite differences, is
h'(k) = 1/(W(e k) + 1); the factor-e variant misses by the constant e and
the sibling test pins the exact form at the same tolerance and sampling.
"""

import math
import time

import numpy as np
import pytest

from cantorlab import lab
from cantorlab.cli import main
from cantorlab.gauge import GaugeSpec, growth_profile, inverse, lambert_w
from cantorlab.fractal import build_complex
from cantorlab.opmodel import build_model, commutator_spectrum, commutator_spectrum_dense
from cantorlab.seqnorm import (
    canonical_weights,
    harmonic_weights,
    vanishing_sequence,
    window_values,
)

POWER1 = GaugeSpec("power", 1.0)
POWER15 = GaugeSpec("power", 1.5)
POWER2 = GaugeSpec("power", 2.0)
EX37 = GaugeSpec("example37")

DEPTH = 8  # model depth for the commutator experiments (n = 2: 65536 cells)


def _report(name: str, passed: bool, detail: str) -> None:
    print(f"\nACCEPTANCE [{'PASS' if passed else 'FAIL'}] {name}: {detail}")


class _Clock:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        return False


@pytest.fixture(scope="module")
def rho15():
    # horizon covers ampliated spectra at L = 7, m = 16
    return canonical_weights(POWER15, 1, 2 * 4**7 * 16)


@pytest.fixture(scope="module")
def harmonic():
    return harmonic_weights(2 * 4**7)


@pytest.mark.xfail(
    strict=True,
    reason="closed form with the factor e misses the computed slope by the "
    "constant e; the exact identity 1/(W(ek)+1) is pinned by the "
    "sibling test at the same tolerance",
)
def test_canonical_slope_lambert_identity_with_e_factor():
    ks = np.logspace(0.0, 6.0, 50)
    _, slopes = growth_profile(EX37, ks)
    reference = math.e / (lambert_w(math.e * ks) + 1.0)
    worst = float(np.max(np.abs(slopes - reference) / reference))
    _report(
        "slope-lambert-identity (factor-e variant)",
        worst <= 1e-8,
        f"max rel dev {worst:.3e} vs 1e-8 over 50 log-spaced k in [1, 1e6]",
    )
    assert worst <= 1e-8


def test_canonical_slope_lambert_identity_exact_form():
    with _Clock() as clock:
        ks = np.logspace(0.0, 6.0, 50)
        _, slopes = growth_profile(EX37, ks)
        reference = 1.0 / (lambert_w(math.e * ks) + 1.0)
        worst = float(np.max(np.abs(slopes - reference) / reference))
    passed = worst <= 1e-8 and clock.elapsed < 1.0
    _report(
        "slope-lambert-identity (exact form)",
        passed,
        f"max rel dev {worst:.3e} vs 1e-8, {clock.elapsed:.2f}s < 1s",
    )
    assert worst <= 1e-8
    assert clock.elapsed < 1.0


def test_inverse_scaling_ratio():
    with _Clock() as clock:
        worst = 0.0
        for a in (2.0, 4.0, 8.0):
            for x in np.logspace(-3.0, -12.0, 10):
                dev = abs(
                    inverse(POWER15, x) / inverse(POWER15, a * x) - a ** (-1 / 1.5)
                )
                worst = max(worst, dev)
        dev37 = abs(inverse(EX37, 1e-10) / inverse(EX37, 2e-10) - 0.5)
    passed = worst <= 1e-12 and dev37 <= 0.05 and clock.elapsed < 1.0
    _report(
        "inverse-scaling-ratio",
        passed,
        f"power max dev {worst:.3e} vs 1e-12; slow-gauge dev {dev37:.4f} vs "
        f"0.05 (log-rate convergence), {clock.elapsed:.2f}s < 1s",
    )
    assert worst <= 1e-12
    assert dev37 <= 0.05
    assert clock.elapsed < 1.0


def test_obstruction_window():
    with _Clock() as clock:
        worst = 0.0
        for g, target in ((POWER15, 1 / 1.5), (POWER2, 0.5)):
            pi = canonical_weights(g, 1, 10**5)
            vals = window_values(g, pi, np.arange(1, 10**5 + 1))
            worst = max(worst, float(np.max(np.abs(vals - target))))
        pi37 = canonical_weights(EX37, 1, 10**6)
        vals37 = window_values(EX37, pi37, np.arange(1, 10**6 + 1))
        lo, hi = float(vals37.min()), float(vals37.max())
        increasing = bool(np.all(np.diff(vals37) > 0.0))
        final = float(vals37[-1])
    in_band = lo >= 0.5 - 5e-13 and hi <= 2.0
    passed = worst <= 1e-12 and in_band and increasing and clock.elapsed < 5.0
    _report(
        "obstruction-window",
        passed,
        f"power |window - 1/s| max {worst:.2e} vs 1e-12; slow-gauge band "
        f"[{lo:.4f}, {hi:.4f}] in [0.5, 2], final {final:.4f} trending to 1, "
        f"{clock.elapsed:.2f}s < 5s",
    )
    assert worst <= 1e-12
    assert in_band and increasing
    assert final > 0.9
    assert clock.elapsed < 5.0


def test_spectra_match_dense_oracle():
    with _Clock() as clock:
        worst = 0.0
        cases = 0
        for g in (POWER1, POWER15, EX37):
            comp = build_complex(g, depth=4)
            for depth in (2, 3, 4):
                model = build_model(comp, depth)
                for level in range(1, depth):
                    for axis in (1, 2):
                        fast = commutator_spectrum(model, level, axis).values
                        dense = commutator_spectrum_dense(model, level, axis).values
                        assert fast.size == dense.size
                        worst = max(worst, float(np.max(np.abs(fast - dense))))
                        cases += 1
    passed = worst <= 1e-10 and clock.elapsed < 60.0
    _report(
        "spectra-dense-oracle",
        passed,
        f"max |analytic - dense| {worst:.2e} vs 1e-10 over {cases} cases, "
        f"{clock.elapsed:.2f}s < 60s",
    )
    assert worst <= 1e-10
    assert clock.elapsed < 60.0


def test_projection_norm_bound(rho15, harmonic):
    with _Clock() as clock:
        worst = -math.inf
        for pi in (rho15, harmonic):
            res = lab.upper_bound_curve(POWER15, 2, pi, DEPTH, range(1, DEPTH))
            for _, _, norm, _, bound in res.rows:
                worst = max(worst, norm - bound)
                assert norm <= bound
    passed = worst <= 0.0 and clock.elapsed < 120.0
    _report(
        "projection-norm-bound",
        passed,
        f"max (norm - bound) {worst:.3e} <= 0 over L=1..7, both weight "
        f"families, {clock.elapsed:.2f}s < 120s",
    )
    assert clock.elapsed < 120.0


def test_harmonic_curve_collapse(harmonic):
    with _Clock() as clock:
        res = lab.upper_bound_curve(POWER15, 2, harmonic, DEPTH, range(1, DEPTH))
        norms = [row[2] for row in res.rows]
        ratio = norms[-1] / norms[0]
        diag = vanishing_sequence(POWER15, harmonic, 2, [10, 40, 100])
    decreasing = bool(np.all(np.diff(diag) < 0.0)) and float(diag[-1]) < 0.05
    passed = ratio < 0.05 and decreasing and clock.elapsed < 120.0
    _report(
        "harmonic-curve-collapse",
        passed,
        f"curve(L=7)/curve(L=1) = {ratio:.4f} < 0.05; vanishing diagnostic "
        f"decreasing to {float(diag[-1]):.4f} at m=100, {clock.elapsed:.2f}s < 120s",
    )
    assert ratio < 0.05
    assert decreasing
    assert clock.elapsed < 120.0


def test_ampliation_homogeneity(rho15):
    with _Clock() as clock:
        res = lab.ampliation_check(POWER15, 2, rho15, DEPTH, 6, [2, 4, 8, 16], 0.05)
        base = res.notes["base_norm"]
        worst_rel = max(row[3] / base for row in res.rows)
        trend = [
            lab.ampliation_check(POWER15, 2, rho15, DEPTH, level, [2, 4, 8, 16], 0.05)
            .notes["max_relative_deviation"]
            for level in (4, 5, 6, 7)
        ]
        shrinking = all(b < a for a, b in zip(trend, trend[1:]))
    passed = worst_rel <= 0.05 and shrinking and clock.elapsed < 60.0
    _report(
        "ampliation-homogeneity",
        passed,
        f"max rel dev {worst_rel:.4f} vs 0.05 at L=6, m in {{2,4,8,16}}; "
        f"trend over L=4..7 {['%.4f' % t for t in trend]} decreasing, "
        f"{clock.elapsed:.2f}s < 60s",
    )
    assert worst_rel <= 0.05
    assert shrinking
    assert clock.elapsed < 60.0


def test_subcube_scaling_exact(rho15):
    with _Clock() as clock:
        worst = 0.0
        identical = True
        rho1 = canonical_weights(POWER1, 1, 2 * 4**7)
        for g, pi in ((POWER1, rho1), (POWER15, rho15)):
            for rel_depth in (1, 2, 3, 4):
                lengths = [ell for ell in (0, 1, 2, 3) if ell + rel_depth <= DEPTH - 1]
                res = lab.subcube_scaling_check(g, 2, pi, DEPTH, lengths, rel_depth)
                worst = max(worst, max(row[3] for row in res.rows))
                identical = identical and next(
                    v for v in res.verdicts if v.invariant == "equal-words-identical"
                ).passed
    passed = worst <= 1e-12 and identical and clock.elapsed < 60.0
    _report(
        "subcube-scaling-exact",
        passed,
        f"max rel error {worst:.3e} vs 1e-12 over |w|<=3, d<=4, s in {{1, 3/2}}; "
        f"equal-length words byte-identical: {identical}, {clock.elapsed:.2f}s < 60s",
    )
    assert worst <= 1e-12
    assert identical
    assert clock.elapsed < 60.0


def test_small_set_measure_band(rho15):
    with _Clock() as clock:
        families = [(1, 1), (2, 1), (2, 2), (2, 4), (3, 1), (3, 2),
                    (4, 1), (4, 2), (5, 1), (5, 2), (6, 1)]
        res = lab.small_set_bound_check(POWER15, 2, rho15, DEPTH, families, 1)
        measures = [row[2] for row in res.rows]
        ratios = [row[4] for row in res.rows]
        spread = max(ratios) / min(ratios)
    spans = min(measures) == 2.0**-12 and max(measures) == 2.0**-2
    passed = spread <= 4.0 and spans and clock.elapsed < 120.0
    _report(
        "small-set-measure-band",
        passed,
        f"ratio spread {spread:.3f} vs 4.0 over measures [2^-12, 2^-2], "
        f"fitted C = {res.notes['fitted_constant']:.4f}, {clock.elapsed:.2f}s < 120s",
    )
    assert spans
    assert spread <= 4.0
    assert clock.elapsed < 120.0


def test_shift_mechanism(rho15):
    with _Clock() as clock:
        res = lab.shift_invariance_check(
            POWER15, 2, rho15, DEPTH, range(2, DEPTH), [1, 2, 4]
        )
        assert res.all_passed  # 0 <= gap <= t * pi_1 * sup on every row
        gaps = {(row[0], row[1]): row[4] for row in res.rows}
        fade = max(gaps[(7, t)] / gaps[(2, t)] for t in (1, 2, 4))
    passed = fade < 0.10 and clock.elapsed < 60.0
    _report(
        "shift-mechanism",
        passed,
        f"gap bounds hold on all rows; gap(L=7)/gap(L=2) max {fade:.4f} < 0.1, "
        f"{clock.elapsed:.2f}s < 60s",
    )
    assert fade < 0.10
    assert clock.elapsed < 60.0


def test_thread_count_determinism(tmp_path):
    with _Clock() as clock:
        experiments = [
            ("gauge-check", []),
            ("cantor-export", ["--depth", "3"]),
            ("rho", ["--depth", "4"]),
            ("k-upper", ["--depth", "5"]),
            ("ampliation", ["--depth", "5"]),
            ("scaling", ["--depth", "5"]),
            ("small-set", ["--depth", "5"]),
            ("singular-demo", ["--depth", "5"]),
            ("shift-check", ["--depth", "5"]),
        ]
        mismatches = []
        for name, extra in experiments:
            out1 = tmp_path / f"{name}-t1"
            out8 = tmp_path / f"{name}-t8"
            rc1 = main([name, *extra, "--out", str(out1), "--threads", "1"])
            rc8 = main([name, *extra, "--out", str(out8), "--threads", "8"])
            assert rc1 == 0 and rc8 == 0
            for suffix in (".csv", ".json"):
                b1 = (out1 / f"{name}{suffix}").read_bytes()
                b8 = (out8 / f"{name}{suffix}").read_bytes()
                if b1 != b8:
                    mismatches.append(name + suffix)
    passed = not mismatches
    _report(
        "thread-count-determinism",
        passed,
        f"9 experiments, --threads 1 vs 8: "
        f"{'all byte-identical' if passed else 'MISMATCH ' + str(mismatches)}, "
        f"{clock.elapsed:.2f}s",
    )
    assert not mismatches
