"""Exception types shared across the package.

The CLI maps ConfigError to exit code 1 and every other CantorlabError to
exit code 2; anything else is a genuine bug and propagates.
"""


class CantorlabError(Exception):
    """Base class for all errors raised by cantorlab."""


class DomainError(CantorlabError, ValueError):
    """Argument outside the validated domain of a gauge function."""


class ConvergenceError(CantorlabError, RuntimeError):
    """An iterative solver failed to reach its tolerance."""


class InfeasibleConstructionError(CantorlabError, ValueError):
    """The requested Cantor complex has no positive gap at some generation."""


class DepthError(CantorlabError, ValueError):
    """Generation depth out of range, or cell count above the size cap."""


class WeightError(CantorlabError, ValueError):
    """Invalid weight sequence: too short, not nonincreasing, or negative."""


class StartIndexNotFoundError(CantorlabError, ValueError):
    """No start index within the horizon satisfies the requested bounds."""


class SelectionError(CantorlabError, ValueError):
    """Invalid cell selection for a restricted model."""


class ConfigError(CantorlabError, ValueError):
    """Invalid run configuration; collects every validation failure."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
