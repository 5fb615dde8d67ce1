"""Exception hierarchy shared by all modules."""


class MLQMError(Exception):
    """Base class for errors raised by this package."""


class DomainError(MLQMError, ValueError):
    """An input lies outside the domain where a quantity is defined."""


class SingularityError(DomainError):
    """The spatial-commutativity margin vanishes, so the partner function diverges."""


class SpaceMismatchError(MLQMError, ValueError):
    """Operators or states live on different Hilbert spaces."""
