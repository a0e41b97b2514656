"""Exception types raised across the package."""


class DivlatError(Exception):
    """Base class for all package errors."""


class InvalidInput(DivlatError, ValueError):
    pass


class UnusableField(DivlatError, ValueError):
    """No prime above 2 with residue field F_2 exists."""


class NotTotallyReal(DivlatError, ValueError):
    pass


class NotSeparable(DivlatError, ValueError):
    pass


class NoLinearFactor(DivlatError, ValueError):
    pass


class ArithmeticOverflow(DivlatError, OverflowError):
    pass


class MalformedAlist(DivlatError, ValueError):
    pass


class ConstructionError(DivlatError, RuntimeError):
    """An internal consistency check on a constructed object failed."""


class SingularBasis(DivlatError, ValueError):
    pass


class Unsupported(DivlatError, ValueError):
    pass


class AllBlocksFaded(DivlatError, ValueError):
    pass


class InsufficientData(DivlatError, ValueError):
    pass
