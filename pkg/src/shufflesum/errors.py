"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class InfeasibleParametersError(ParameterError):
    """A planned parameter set cannot be executed (e.g. a blanket rate >= 1)."""


class ProtocolError(RuntimeError):
    """A randomizer or analyzer received or produced malformed messages."""


class IngestionError(ValueError):
    """A dataset file could not be turned into values in [0, 1]."""


class ResourceError(RuntimeError):
    """An exhaustive computation would exceed its enumeration budget."""
