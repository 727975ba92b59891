"""Exception hierarchy. ``exit_code`` is what the CLI returns for each class."""


class MixedOpError(Exception):
    exit_code = 1


class DimensionMismatch(MixedOpError):
    exit_code = 4


class OverlappingSubsets(MixedOpError, ValueError):
    exit_code = 3


class NotASubset(MixedOpError, ValueError):
    exit_code = 3


class EmptySubset(MixedOpError, ValueError):
    exit_code = 3


class MalformedInput(MixedOpError, ValueError):
    exit_code = 3


class NotInvertible(MixedOpError):
    """Base for detected singularities; carries the offending subset and cell.

    ``partial`` holds the determinant components computed before the failure
    (including the failing one), keyed by subset.
    """

    exit_code = 2

    def __init__(self, message, alpha=(), cell=(), partial=None):
        super().__init__(message)
        self.alpha = tuple(alpha)
        self.cell = tuple(cell)
        self.partial = partial if partial is not None else {}


class SingularBlock(NotInvertible):
    pass


class SingularE(NotInvertible):
    pass


class SingularMatrix(NotInvertible):
    pass


class ResidueNotIdentity(NotInvertible):
    pass


class BudgetExceeded(MixedOpError):
    exit_code = 5


class SizeCapExceeded(BudgetExceeded):
    pass


class NotConverged(MixedOpError):
    exit_code = 5


class NormTooLarge(MixedOpError):
    exit_code = 5
