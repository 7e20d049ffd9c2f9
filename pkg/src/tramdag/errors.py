"""Exception types shared across the package."""

from __future__ import annotations


class TramDagError(Exception):
    """Base class for all errors raised by this package."""


# --- DAG specification ---------------------------------------------------


class DagSyntaxError(TramDagError):
    """A spec line that does not match the grammar."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class DuplicateNodeError(TramDagError):
    pass


class UnknownNodeError(TramDagError):
    pass


class CycleError(TramDagError):
    pass


class MixedInterceptColumnError(TramDagError):
    """A node combines a complex-intercept parent with shift parents."""


# --- differentiation ------------------------------------------------------


class DomainError(TramDagError):
    """Evaluation left the domain of an elementary operation."""


class LengthMismatchError(TramDagError):
    pass


# --- transformation / model ----------------------------------------------


class MissingParentError(TramDagError):
    pass


class NonFiniteInputError(TramDagError):
    pass


class NonFiniteLikelihoodError(TramDagError):
    pass


class ColumnMismatchError(TramDagError):
    pass


class FormatVersionError(TramDagError):
    pass


class ChecksumError(TramDagError):
    pass


class NotAComplexShiftError(TramDagError):
    pass


# --- causal queries -------------------------------------------------------


class LevelOutOfRangeError(TramDagError):
    pass


class MissingValueError(TramDagError):
    pass


class DiscreteCounterfactualError(TramDagError):
    """Counterfactual requested through an ordinal or binary descendant."""


class ZeroCellError(TramDagError):
    pass


# --- data generators / metrics ---------------------------------------------


class UnknownPresetError(TramDagError):
    pass


class UnsupportedPresetError(TramDagError):
    pass


class UnsupportedQueryError(TramDagError):
    pass


class EmptySampleError(TramDagError):
    pass
