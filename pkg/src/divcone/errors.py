"""Exception hierarchy shared across the package."""


class DivconeError(Exception):
    """Base class for all package errors."""


class NonSquareError(DivconeError):
    """Input array is not a square 2-D matrix."""


class EntryOutOfRangeError(DivconeError):
    """A matrix entry violates [0, 1] beyond the allowed tolerance."""


class ColumnSumError(DivconeError):
    """A column sum deviates from 1 beyond the allowed tolerance."""


class DomainError(DivconeError):
    """A chart point lies outside the chart's domain."""


class SingularMatrixError(DivconeError):
    """Inverse requested for a singular matrix."""


class NotDegenerateError(DivconeError):
    """Degenerate-only operation applied to a non-degenerate matrix."""


class DimensionMismatchError(DivconeError):
    """Operands have incompatible dimensions."""


class DegenerateAnchorError(DivconeError):
    """Operation not defined for a degenerate anchor matrix."""


class SamplingBudgetError(DivconeError):
    """Rejection sampling exceeded its proposal budget."""


class ZeroRowError(DivconeError):
    """Matrix has an all-zero row where a nonzero row is required."""


class SupportMismatchError(DivconeError):
    """Relative-entropy argument has mass outside the reference support."""


class NonPositiveEntryError(DivconeError):
    """Strictly positive entries required."""


class NonPositiveMatrixError(DivconeError):
    """Strictly positive matrix required."""


class KrausConditionViolatedError(DivconeError):
    """Kraus operators do not resolve the identity."""


class NotRightInverseError(DivconeError):
    """Dispatch matrix is not a right-inverse of the grouping matrix."""


class ShapeMismatchError(DivconeError):
    """Array shapes are inconsistent for the requested operation."""


class TimeGridMismatchError(DivconeError):
    """Two curves are sampled on different time grids."""


class WeightError(DivconeError):
    """Convex weights are negative or do not sum to one."""


class InvalidGridError(DivconeError):
    """Time grid is empty, unordered, or otherwise unusable."""
