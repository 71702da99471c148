"""Exception hierarchy.

Validation problems with the inputs derive from :class:`ValidationError`;
failures of a numerical stage derive from :class:`NumericalError`.  The CLI
maps the two families to distinct exit codes.
"""


class SymconError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SymconError, ValueError):
    pass


class ParseError(ValidationError):
    pass


class AsymmetryError(ValidationError):
    pass


class NonBinaryInputError(ValidationError):
    pass


class DimensionError(ValidationError):
    pass


class NumericalError(SymconError, ArithmeticError):
    pass


class SearchBudgetExceeded(NumericalError):
    pass


class NotInvariantError(NumericalError):
    """The supplied partition does not decouple ``A`` (cross block nonzero)."""


class CorollaryViolation(NumericalError):
    """``B`` has a component transverse to the consensus subspace."""


class SelectionFailed(NumericalError):
    pass


class SingularGramian(NumericalError):
    pass


class PlacementFailed(NumericalError):
    pass


class NonFiniteState(NumericalError):
    pass
