"""Exception hierarchy shared by every corrsim module."""


class CorrsimError(Exception):
    """Base class for all corrsim errors."""


class DimensionCapError(CorrsimError):
    """An ambient Hilbert-space dimension exceeds the configured cap."""


class ContractError(CorrsimError, ValueError):
    """An input violates an operation's contract (e.g. non-Hermitian matrix)."""


class PreconditionError(ContractError):
    """A documented precondition of an operation does not hold."""


class InvariantError(CorrsimError):
    """A constructed value fails its type invariant."""


class ConsistencyError(CorrsimError):
    """An internal identity or inequality that must hold was violated."""


class ProtocolError(CorrsimError):
    """A protocol cannot be carried out for the given input."""


class SubsystemIndexError(CorrsimError, IndexError):
    """Subsystem indices out of range or not a valid partition."""
