"""Exception types shared across the toolkit."""

from __future__ import annotations


class ArqecError(Exception):
    """Base class for all toolkit errors."""


class LengthMismatchError(ArqecError):
    """Vector arguments have incompatible lengths."""


class ShapeMismatchError(ArqecError):
    """Array argument has the wrong shape for the model or code."""


class InconsistentSystemError(ArqecError):
    """A GF(2) linear system has no solution."""


class BadFileError(ArqecError):
    """A parity-check, syndrome, or checkpoint file is malformed."""


class RankDeficientError(ArqecError):
    """A parity-check matrix does not have full row rank."""


class DegenerateKernelError(ArqecError):
    """The commutant kernel does not have the expected dimension 2k."""


class NonFiniteError(ArqecError):
    """A non-finite value appeared during training.

    Carries ``step`` and, when available, ``last_params`` (a copy of the
    parameters from the most recent evaluation point).
    """

    def __init__(self, message, step=None, last_params=None):
        super().__init__(message)
        self.step = step
        self.last_params = last_params


class UnevaluableModelError(ArqecError):
    """The noise model cannot evaluate normalized pointwise probabilities."""


class TooLargeError(ArqecError):
    """An exhaustive enumeration guard was exceeded."""


class UnpairedDataError(ArqecError):
    """Method comparison requires paired trials with a shared error stream."""
