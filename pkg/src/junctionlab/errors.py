"""Exception types shared across the package."""


class JunctionLabError(Exception):
    """Base class for all package errors."""


class ContractError(JunctionLabError, ValueError):
    """A caller violated a documented precondition (bad shape, step after
    terminal, out-of-range argument)."""


class InvalidStateError(JunctionLabError, ValueError):
    """A physical state contains non-finite or otherwise unusable values."""


class CheckpointError(JunctionLabError, ValueError):
    """A checkpoint file is malformed or incompatible with the requested use."""
