"""Exception hierarchy shared across the package."""


class DelcapError(Exception):
    """Base class for every error raised by delcap."""


class InvalidInputError(DelcapError, ValueError):
    pass


class InvalidDecompositionError(DelcapError, ValueError):
    pass


class InstanceTooLargeError(DelcapError):
    """An exact computation would exceed its enumeration budget."""


class DomainError(DelcapError, ValueError):
    """A formula was evaluated outside the region where it is defined."""


class OutOfValidityRangeError(DelcapError, ValueError):
    pass


class DataFormatError(DelcapError):
    pass
