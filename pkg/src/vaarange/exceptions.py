"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Array dimensions do not agree with the radio configuration or each other."""


class DegenerateEntryError(ValueError):
    """An element-wise operation hit an entry too close to zero to be meaningful."""


class DegenerateInputError(ValueError):
    """A feature slice is degenerate (e.g. all-zero) and cannot be normalized."""


class SingularFisherError(ValueError):
    """The Fisher information matrix is singular for a requested parameter."""


class ConfigError(ValueError):
    """A configuration file contains unknown keys or ill-formed values."""
