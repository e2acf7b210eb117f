"""Exception types shared across the package.

The CLI maps these to exit codes: ConfigError -> 2, ProtocolError -> 3,
DataError -> 4. Plain ValueError is reserved for programmer errors such as
dimension mismatches in the numeric primitives.
"""


class FedMLFSError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(FedMLFSError):
    """A run parameter is out of its allowed range or inconsistent."""


class DataError(FedMLFSError):
    """A dataset file could not be parsed or violates its contract."""


class ProtocolError(FedMLFSError):
    """The simulated client/server exchange broke protocol order."""
