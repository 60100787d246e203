"""Exception types for chuk-mcp-acs.

Most errors are ValueError subclasses so callers that only care about
"bad input" can keep catching ValueError, the same way pydantic's
ValidationError behaves.
"""


class AcsError(Exception):
    """Base class for all chuk-mcp-acs errors."""


class SpecificationError(AcsError, ValueError):
    """A population specification is invalid or cannot be realised."""


class SampleSizeError(AcsError, ValueError):
    """A requested sample size does not fit the population or cluster count."""


class DegreesOfFreedomError(AcsError, ValueError):
    """A variance estimate was requested from fewer than two observations."""


class UndefinedVMRError(AcsError, ValueError):
    """Variance-to-mean ratio requested for a frame whose mean is zero."""


class DegeneratePopulationError(AcsError, ValueError):
    """The population has no variation (sigma^2 = 0 or total_ss = 0)."""


class PartitionMismatchError(AcsError, ValueError):
    """A network partition does not describe the frame it is used with."""


class InternalConsistencyError(AcsError, RuntimeError):
    """A numerical identity that must hold exactly was violated."""


class ConfigError(AcsError, ValueError):
    """An experiment configuration document violates the schema."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key
