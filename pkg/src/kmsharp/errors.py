"""Exception hierarchy shared by all kmsharp modules."""


class KMError(Exception):
    """Base class for errors raised by kmsharp."""


class ParseError(KMError, ValueError):
    """Malformed scalar or schedule literal."""


class DomainError(KMError, ValueError):
    """Argument outside the domain of an operation."""


class HorizonError(DomainError):
    """Index beyond the horizon of an explicit schedule or a table."""


class PreconditionError(KMError, ValueError):
    """A documented precondition (e.g. all steps >= 1/2) does not hold."""


class InfeasibleError(KMError):
    """Transport problem with unbalanced supplies and demands."""


class ConstructionError(KMError):
    """An internal consistency check failed while building an object."""


class NumericalError(KMError):
    """Quadrature or another numerical routine did not reach its tolerance."""
