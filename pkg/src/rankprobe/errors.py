"""Exception taxonomy shared across the package."""


class UsageError(ValueError):
    """A caller violated a documented precondition (bad ids, infeasible spec, ...)."""


class DecodeFailure(RuntimeError):
    """Measurements are inconsistent with every binary vector; upstream oracle misuse."""


class ProtocolError(RuntimeError):
    """A reconstruction protocol observed answers that violate its promised structure."""


class InternalConsistencyError(RuntimeError):
    """Two redundant computations of the same quantity disagree; indicates a bug."""


class InvariantViolation(RuntimeError):
    """A runtime audit check failed."""
