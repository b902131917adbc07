"""Exception hierarchy shared by the library, the CLI and the HTTP service.

The CLI maps these onto process exit codes (see ``biphoton.cli``):
config/validation problems exit 2, numerical failures (no phase-matching
root, grid too coarse) exit 3, fit failures exit 4.
"""


class BiphotonError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(BiphotonError):
    """Invalid or malformed run configuration.

    Carries optional ``line``/``col`` (1-based) locating the offending
    token in the config text.
    """

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            where = f" (line {line}" + (f", col {col}" if col is not None else "") + ")"
            message = message + where
        super().__init__(message)


class PhysicalityError(BiphotonError):
    """Parameters describe a non-physical state (e.g. a density matrix
    whose coherence exceeds the positivity bound)."""


class PhaseMatchError(BiphotonError):
    """The phase-matching equation has no root inside the search bracket."""


class ResolutionError(BiphotonError):
    """A frequency or delay grid is too coarse for the requested
    computation to meet its accuracy contract."""


class FitNonConvergenceError(BiphotonError):
    """The least-squares loop hit the iteration cap before converging.

    ``best`` holds the best result found so far (a ``FitResult``), so a
    caller can inspect or resume from it.
    """

    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)


class DegenerateFitError(BiphotonError):
    """The data cannot determine the requested parameters at all
    (e.g. fewer points than free parameters)."""
