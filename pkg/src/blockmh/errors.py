"""Exception types shared across the library and mapped to CLI exit codes."""


class BlockMHError(Exception):
    """Base class for all library errors."""


class ConfigError(BlockMHError):
    """Invalid model, chain, or experiment configuration (CLI exit code 2)."""


class GuardExceededError(BlockMHError):
    """A size guard was hit: too many communities for permutation search,
    or too many clustering states for exact enumeration (CLI exit code 3)."""


class NumericalError(BlockMHError):
    """A numerical routine failed to converge or produced invalid values
    (CLI exit code 4)."""
