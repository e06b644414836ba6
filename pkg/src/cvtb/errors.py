"""Exception hierarchy shared by every cvtb module."""


class CvtbError(Exception):
    """Base class for all errors raised by cvtb."""


class InvalidCutoffError(CvtbError, ValueError):
    """Fock cutoff below the minimum of two levels."""


class ShapeError(CvtbError, ValueError):
    """Matrix has the wrong shape or violates a structural requirement."""


class DegenerateStateError(CvtbError, ValueError):
    """A state (or operated channel) has vanishing norm and cannot be normalized."""


class RangeError(CvtbError, ValueError):
    """A parameter lies outside the validity range of the requested construction."""


class UnsupportedFamilyError(CvtbError, ValueError):
    """No closed-form characteristic function exists for this channel family."""


class QuadratureError(CvtbError, RuntimeError):
    """Phase-space quadrature did not converge."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class ConvergenceError(CvtbError, RuntimeError):
    """An observable did not stabilise while growing the Fock cutoff."""


class ConfigError(CvtbError, ValueError):
    """Invalid scan configuration."""


class OutputPathError(CvtbError, FileNotFoundError):
    """The directory for a requested output file does not exist."""
