"""Finite models of the coordinate multiplication tuple and their commutators.

A depth-M model discretizes multiplication by the coordinates on the Cantor
complex: one anchor-corner n-vector and one weight 2**(-n*M) per depth-M
cell.  The projection at depth L averages over depth-L cells; its commutator
with the j-th coordinate operator is block diagonal, and a block holding
fine-cell coordinates d = (d_1 .. d_K) with equal weights equals
(1/K) * (ones @ d.T - d @ ones.T), whose two nonzero singular values both
equal the population standard deviation of d.  The analytic path evaluates
those deviations from the per-generation offset table, so congruent blocks
produce bitwise-identical values; a dense-SVD path serves as the oracle.

The discretization replaces each coordinate function by its cell anchor, an
error of at most lam[M] per axis; callers read it from ``FiniteModel.anchor_error``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DepthError, SelectionError, WeightError
from .fractal import MAX_CELL_BITS, CantorComplex, Word, cell_diameter
from .seqnorm import WeightSequence, lorentz_norm

_SPECTRUM_CUTOFF = 1e-12
_DENSE_CELL_CAP = 4096


@dataclass(frozen=True)
class SingularSpectrum:
    """Nonzero singular values, sorted nonincreasing.

    Values below 1e-12 times the largest are dropped at construction so
    machine-noise tails never pollute weighted norms.
    """

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=float)
        if vals.size:
            vals = np.sort(vals)[::-1]
            vals = vals[vals > _SPECTRUM_CUTOFF * vals[0]]
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def max(self) -> float:
        return float(self.values[0]) if len(self) else 0.0

    def ampliate(self, m: int) -> "SingularSpectrum":
        if m < 1:
            raise DepthError("ampliation factor must be >= 1")
        return SingularSpectrum(np.repeat(self.values, m))


def ampliate_spectrum(xs: SingularSpectrum, m: int) -> SingularSpectrum:
    """Each singular value repeated m times (spectrum of X tensor I_m)."""
    return xs.ampliate(m)


class FiniteModel:
    """Depth-M step-function model over a subset of depth-M cells.

    ``codes`` are the integer encodings of the cells present, kept sorted;
    the full model carries every code in [0, 2**(n*M)).  Instances are
    immutable after construction; per-depth offset tables are cached.
    """

    def __init__(self, complex_: CantorComplex, depth: int, codes: np.ndarray):
        if not 0 <= depth <= complex_.depth:
            raise DepthError(f"model depth {depth} outside 0..{complex_.depth}")
        if complex_.n * depth > MAX_CELL_BITS:
            raise DepthError(
                f"2**({complex_.n}*{depth}) cells exceed the 2**{MAX_CELL_BITS} cap"
            )
        codes = np.ascontiguousarray(codes, dtype=np.int64)
        if codes.size == 0:
            raise SelectionError("model needs at least one cell")
        if codes.min() < 0 or codes.max() >= (1 << (complex_.n * depth)):
            raise SelectionError("cell code outside the depth-M range")
        if np.any(np.diff(codes) <= 0):
            raise SelectionError("cell codes must be strictly increasing")
        self.complex = complex_
        self.depth = int(depth)
        self.codes = codes
        self._coords = None
        self._offsets_cache: dict[int, np.ndarray] = {}

    @property
    def n(self) -> int:
        return self.complex.n

    @property
    def cell_count(self) -> int:
        return int(self.codes.size)

    @property
    def cell_weight(self) -> float:
        """Mass per depth-M cell in the unit-total normalization."""
        return 2.0 ** (-self.n * self.depth)

    @property
    def total_mass(self) -> float:
        return self.cell_count * self.cell_weight

    @property
    def anchor_error(self) -> float:
        """Per-axis discretization error of the anchor-corner coordinates."""
        return float(self.complex.lam[self.depth])

    @property
    def coords(self) -> np.ndarray:
        """Anchor corner per cell, rows ordered like ``codes``."""
        if self._coords is None:
            self._coords = _kernels.cell_coords(
                self.codes, self.n, self.depth, self.complex.offsets[: self.depth]
            )
            self._coords.setflags(write=False)
        return self._coords

    def is_complete(self) -> bool:
        return self.cell_count == (1 << (self.n * self.depth))

    def _blocks(self, level: int):
        """Group boundaries of cells sharing a depth-``level`` ancestor."""
        shift = self.n * (self.depth - level)
        anc = self.codes >> shift
        starts = np.concatenate(([0], np.flatnonzero(np.diff(anc)) + 1)).astype(np.int64)
        counts = np.diff(np.concatenate((starts, [self.codes.size]))).astype(np.int64)
        return starts, counts, shift

    def _suffix_offsets(self, level: int) -> np.ndarray:
        """Cell coordinates relative to their depth-``level`` ancestor anchor.

        Computed from the offset table alone, never from absolute anchors,
        so congruent blocks yield identical floats.
        """
        cached = self._offsets_cache.get(level)
        if cached is not None:
            return cached
        shift = self.n * (self.depth - level)
        suffix = self.codes & ((1 << shift) - 1)
        offs = _kernels.cell_coords(
            suffix, self.n, self.depth - level,
            self.complex.offsets[level: self.depth],
        )
        offs.setflags(write=False)
        self._offsets_cache[level] = offs
        return offs


def build_model(c: CantorComplex, depth: int) -> FiniteModel:
    """Full model: one cell per depth-M word, deterministic code order."""
    if depth < 0 or depth > c.depth:
        raise DepthError(f"model depth {depth} outside 0..{c.depth}")
    if c.n * depth > MAX_CELL_BITS:
        raise DepthError(f"2**({c.n}*{depth}) cells exceed the 2**{MAX_CELL_BITS} cap")
    return FiniteModel(c, depth, np.arange(1 << (c.n * depth), dtype=np.int64))


def restrict_model(model: FiniteModel, cells) -> FiniteModel:
    """Sub-model of the depth-M cells descending from the given words.

    Words must be nonempty, of one common length <= M, and must select at
    least one cell present in ``model``; weights are left unchanged, so the
    restriction carries sub-probability mass.
    """
    words = list(cells)
    if not words:
        raise SelectionError("cell selection is empty")
    lengths = {len(w) for w in words}
    if len(lengths) != 1:
        raise SelectionError("selected words must share one generation")
    level = lengths.pop()
    if level > model.depth:
        raise DepthError(f"selection depth {level} exceeds model depth {model.depth}")
    for w in words:
        if w.n != model.n:
            raise SelectionError("word dimension mismatch")
    prefixes = np.unique(np.array([w.code for w in words], dtype=np.int64))
    if prefixes.size != len(words):
        raise SelectionError("selected words must be distinct")
    shift = model.n * (model.depth - level)
    keep = np.isin(model.codes >> shift, prefixes)
    if not np.any(keep):
        raise SelectionError("selection matches no cell of the model")
    return FiniteModel(model.complex, model.depth, model.codes[keep])


def commutator_spectrum(model: FiniteModel, level: int, axis: int) -> SingularSpectrum:
    """Singular values of the depth-``level`` averaging commutator, axis j.

    Per nonempty block the spectrum contributes a pair (sigma, sigma) with
    sigma the population standard deviation of the block's axis
    coordinates; constant blocks contribute nothing.  When every block is
    complete (the full suffix tree is present) a single deviation is
    computed from the offset table and repeated, which also makes values
    identical across congruent restricted models.
    """
    if not 0 <= level < model.depth:
        raise DepthError(f"projection depth {level} outside 0..{model.depth - 1}")
    if not 1 <= axis <= model.n:
        raise DepthError(f"axis {axis} outside 1..{model.n}")
    starts, counts, shift = model._blocks(level)
    full = 1 << shift
    if np.all(counts == full):
        offs = model._suffix_offsets(level)[:full, axis - 1]
        sigma = _kernels.grouped_std(
            offs, np.zeros(1, dtype=np.int64), np.array([full], dtype=np.int64)
        )[0]
        values = np.repeat(sigma, 2 * starts.size)
    else:
        offs = model._suffix_offsets(level)[:, axis - 1]
        sig = _kernels.grouped_std(offs, starts, counts)
        sig = sig[sig > 0.0]
        values = np.repeat(sig, 2)
    return SingularSpectrum(values)


def commutator_spectrum_dense(model: FiniteModel, level: int, axis: int) -> SingularSpectrum:
    """Oracle: assemble the dense commutator and take its full SVD.

    The projection averages over present cells per depth-``level`` block; in
    the equal-weight cell basis the commutator entries are
    P[i, j] * (d[j] - d[i]).  Capped at 4096 cells.
    """
    if model.cell_count > _DENSE_CELL_CAP:
        raise DepthError(
            f"dense oracle capped at {_DENSE_CELL_CAP} cells, got {model.cell_count}"
        )
    if not 0 <= level < model.depth:
        raise DepthError(f"projection depth {level} outside 0..{model.depth - 1}")
    if not 1 <= axis <= model.n:
        raise DepthError(f"axis {axis} outside 1..{model.n}")
    starts, counts, _ = model._blocks(level)
    size = model.cell_count
    proj = np.zeros((size, size))
    for start, count in zip(starts, counts):
        proj[start: start + count, start: start + count] = 1.0 / count
    d = model.coords[:, axis - 1]
    comm = proj * (d[None, :] - d[:, None])
    svals = np.linalg.svd(comm, compute_uv=False)
    return SingularSpectrum(svals)


@dataclass(frozen=True)
class CommutatorReport:
    """Per-axis spectra and weighted norms of one projection commutator."""

    level: int
    spectra: tuple[SingularSpectrum, ...]
    norms: tuple[float, ...]
    tuple_norm: float
    sup_norm_bound: float
    anchor_error: float

    @property
    def max_singular_value(self) -> float:
        return max((sp.max for sp in self.spectra), default=0.0)


def commutator_norms(model: FiniteModel, level: int, pi: WeightSequence) -> CommutatorReport:
    """Weighted norms of the depth-``level`` commutator along every axis.

    The tuple norm is the max over axes; the sup-norm bound is twice the
    block diameter, 2 * lam[level] * sqrt(n).
    """
    spectra = tuple(
        commutator_spectrum(model, level, axis) for axis in range(1, model.n + 1)
    )
    needed = max((len(sp) for sp in spectra), default=0)
    if needed > len(pi):
        raise WeightError(
            f"spectrum length {needed} exceeds weight horizon {len(pi)}"
        )
    norms = tuple(lorentz_norm(pi, sp.values) for sp in spectra)
    bound = 2.0 * cell_diameter(model.complex, level)
    return CommutatorReport(
        level=level,
        spectra=spectra,
        norms=norms,
        tuple_norm=max(norms),
        sup_norm_bound=bound,
        anchor_error=model.anchor_error,
    )


def descendants(c: CantorComplex, w: Word, depth: int) -> FiniteModel:
    """Convenience: full model restricted to the single word ``w``."""
    model = build_model(c, depth)
    if len(w) == 0:
        return model
    return restrict_model(model, [w])
