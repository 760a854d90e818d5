"""Exception hierarchy shared by every module of the package."""


class EngelError(Exception):
    """Base class for all errors raised by ``engel_minkowski``."""


class InvalidArgument(EngelError, ValueError):
    """Malformed input: bad digits, zero denominators, empty specs."""


class OutOfDomain(EngelError, ValueError):
    """A number lies outside the interval (0, 1] where the expansions live."""


class Unsupported(EngelError):
    """The operation is not defined for this kind of digit spec."""
