"""
Errors - Exception hierarchy shared by the services

Every failure a service can report is one of these. The CLI maps them to
exit codes (see cli/app.py).
"""


class MdzError(Exception):
    """Base class for all library errors."""


class PreconditionError(MdzError, ValueError):
    """An operation was called outside its documented domain."""


class DivergentSpecError(PreconditionError):
    """The requested series fails the absolute-convergence precheck."""


class SectorError(PreconditionError):
    """A sector point lies outside S_i(C) for some embedding."""


class BranchCutError(PreconditionError):
    """A principal-branch power or logarithm would cross the negative real axis."""


class NonSimpleConeError(PreconditionError):
    """A cone (or a union of cones) has no common open half-plane."""


class PoleError(MdzError, ZeroDivisionError):
    """Evaluation too close to a pole of the product formula."""


class UnsupportedFieldError(MdzError, ValueError):
    """The field is outside the supported set for this operation."""


class FieldOverflowError(MdzError, OverflowError):
    """Checked integer arithmetic left the 64-bit (or 128-bit norm) range."""


class ShuffleError(MdzError, ValueError):
    """A permutation is not a valid shuffle for the requested shape."""


class QuadratureError(MdzError):
    """The integral representation cannot be evaluated on the grid."""
