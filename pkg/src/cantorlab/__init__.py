"""Cantor complexes from gauge functions, weighted commutator norms, and
finite projection models of coordinate multiplication operators."""

from .errors import (
    CantorlabError,
    ConfigError,
    ConvergenceError,
    DepthError,
    DomainError,
    InfeasibleConstructionError,
    SelectionError,
    StartIndexNotFoundError,
    WeightError,
)
from .fractal import CantorComplex, Word, build_complex
from .gauge import GaugeSpec, lambert_w
from .opmodel import FiniteModel, SingularSpectrum, build_model
from .seqnorm import WeightSequence, canonical_weights, harmonic_weights, lorentz_norm

__version__ = "0.1.0"

__all__ = [
    "CantorComplex",
    "CantorlabError",
    "ConfigError",
    "ConvergenceError",
    "DepthError",
    "DomainError",
    "FiniteModel",
    "GaugeSpec",
    "InfeasibleConstructionError",
    "SelectionError",
    "SingularSpectrum",
    "StartIndexNotFoundError",
    "WeightError",
    "WeightSequence",
    "Word",
    "__version__",
    "build_complex",
    "build_model",
    "canonical_weights",
    "harmonic_weights",
    "lambert_w",
    "lorentz_norm",
]
