"""Symmetric generalized Cantor complexes: geometry, words, measures.

The complex lives in [0, 1]**n.  Generation m keeps 2**(n*m) closed cubes of
side ``lam[m] = f^{-1}(2**(-n*m))``; each parent cube of side ``lam[m-1]``
splits per axis into two child intervals of length ``lam[m]`` anchored at the
two ends, which forces the removed middle gap ``eta[m] = lam[m-1] -
2*lam[m]`` (positive, or the construction is infeasible).  Cells are indexed
by words over {1, ..., 2**n}; letter k selects the k-th corner of the parent
cube in lexicographic corner order, so axis j of letter k is bit (n-1-j) of
k-1 and contributes an offset of 0 or ``lam[m-1] - lam[m]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DepthError, DomainError, InfeasibleConstructionError, SelectionError
from .gauge import GaugeSpec, evaluate, inverse

# hard cap on cell counts: 2**(n*M) <= 2**20 keeps everything desk scale
MAX_CELL_BITS = 20


@dataclass(frozen=True)
class Word:
    """Index of one generation cell: letters over {1, ..., 2**n}."""

    letters: tuple[int, ...]
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("ambient dimension must be >= 1")
        top = 1 << self.n
        for ell in self.letters:
            if not 1 <= ell <= top:
                raise SelectionError(f"letter {ell} outside 1..{top}")

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def code(self) -> int:
        """Integer encoding: base-2**n digits, first letter most significant."""
        c = 0
        for ell in self.letters:
            c = (c << self.n) | (ell - 1)
        return c

    @classmethod
    def from_code(cls, code: int, length: int, n: int) -> "Word":
        mask = (1 << n) - 1
        letters = tuple(
            ((code >> (n * (length - 1 - i))) & mask) + 1 for i in range(length)
        )
        return cls(letters, n)

    def child(self, letter: int) -> "Word":
        return Word(self.letters + (letter,), self.n)


@dataclass(frozen=True)
class CantorComplex:
    """Immutable tables of a depth-limited symmetric Cantor construction."""

    gauge: GaugeSpec
    s: float
    n: int
    depth: int
    lam: np.ndarray = field(repr=False)  # lam[m], m = 0..depth, lam[0] = 1

    @property
    def offsets(self) -> np.ndarray:
        """Per-generation corner offsets lam[m-1] - lam[m], m = 1..depth."""
        return self.lam[:-1] - self.lam[1:]

    @property
    def eta(self) -> np.ndarray:
        """Removed middle gaps lam[m-1] - 2*lam[m], m = 1..depth."""
        return self.lam[:-1] - 2.0 * self.lam[1:]

    def cells_at(self, length: int) -> int:
        return 1 << (self.n * length)

    def check_depth(self, length: int) -> None:
        if not 0 <= length <= self.depth:
            raise DepthError(f"generation {length} outside 0..{self.depth}")


def build_complex(g: GaugeSpec, s: float | None = None, depth: int = 6,
                  n_override: int | None = None) -> CantorComplex:
    """Populate side-length and gap tables and verify feasibility.

    ``s`` defaults to the gauge's regular-variation index and ``n`` to
    floor(s) + 1.  Raises InfeasibleConstructionError when some generation
    has no room for two children (lam[m-1] <= 2*lam[m]).
    """
    if depth < 1:
        raise DepthError("depth must be >= 1")
    if s is None:
        s = g.rv_index
    n = int(n_override) if n_override is not None else int(math.floor(s)) + 1
    if n < 1:
        raise DomainError("ambient dimension must be >= 1")
    if n * depth > MAX_CELL_BITS:
        raise DepthError(
            f"2**({n}*{depth}) cells exceed the 2**{MAX_CELL_BITS} cap"
        )
    m = np.arange(1, depth + 1, dtype=float)
    lam = np.empty(depth + 1)
    lam[0] = 1.0
    lam[1:] = inverse(g, 2.0 ** (-n * m))
    if np.any(np.diff(lam) >= 0.0):
        raise InfeasibleConstructionError("side lengths must decrease strictly")
    eta = lam[:-1] - 2.0 * lam[1:]
    # relative guard so degenerate zero-gap cases cannot slip through rounding
    degenerate = eta <= 1e-12 * lam[:-1]
    if np.any(degenerate):
        bad = int(np.flatnonzero(degenerate)[0]) + 1
        raise InfeasibleConstructionError(
            f"no positive gap at generation {bad}: lam[{bad - 1}] <= 2*lam[{bad}]"
        )
    return CantorComplex(gauge=g, s=float(s), n=n, depth=depth, lam=lam)


def enumerate_words(c: CantorComplex, length: int) -> list[Word]:
    """All 2**(n*length) words of the given length, lexicographic order."""
    c.check_depth(length)
    return [Word.from_code(code, length, c.n) for code in range(c.cells_at(length))]


def cell_geometry(c: CantorComplex, w: Word) -> tuple[np.ndarray, float]:
    """Anchor corner and side length of the cell indexed by ``w``.

    The cell's bounding box is [corner, corner + side]**n.
    """
    depth = len(w)
    c.check_depth(depth)
    if w.n != c.n:
        raise SelectionError(f"word dimension {w.n} != complex dimension {c.n}")
    corner = _kernels.cell_coords(
        np.array([w.code], dtype=np.int64), c.n, depth, c.offsets[:depth]
    )[0]
    return corner, float(c.lam[depth])


def cell_measure(c: CantorComplex, w: Word) -> float:
    """Normalized mass 2**(-n|w|): equal weight per congruent generation cell."""
    c.check_depth(len(w))
    return 2.0 ** (-c.n * len(w))


def cell_diameter(c: CantorComplex, length: int) -> float:
    """Diameter lam[length] * sqrt(n) of a generation cell's bounding box."""
    c.check_depth(length)
    return float(c.lam[length]) * math.sqrt(c.n)


def cover_estimate(c: CantorComplex, w: Word, extra_depth: int) -> float:
    """Covering upper estimate for the measure of cell ``w``.

    Uses one ball per depth-(|w| + extra_depth) subcell, each of radius
    side * sqrt(n) / 2, so the estimate is 2**(n*d) * f(r).
    """
    if extra_depth < 0:
        raise DepthError("extra_depth must be >= 0")
    level = len(w) + extra_depth
    c.check_depth(level)
    r = float(c.lam[level]) * math.sqrt(c.n) / 2.0
    return float(2.0 ** (c.n * extra_depth) * evaluate(c.gauge, r))


def export_geometry(c: CantorComplex, length: int) -> dict:
    """Serializable record list for every generation-``length`` cell.

    Records carry (word, corner, side, measure); measures over one
    generation always sum to exactly 1.
    """
    c.check_depth(length)
    count = c.cells_at(length)
    codes = np.arange(count, dtype=np.int64)
    corners = _kernels.cell_coords(codes, c.n, length, c.offsets[:length])
    side = float(c.lam[length])
    measure = 2.0 ** (-c.n * length)
    records = []
    for code in range(count):
        word = Word.from_code(code, length, c.n)
        records.append(
            {
                "word": list(word.letters),
                "corner": [float(v) for v in corners[code]],
                "side": side,
                "measure": measure,
            }
        )
    return {
        "ambient_dim": c.n,
        "generation": length,
        "records": records,
    }
