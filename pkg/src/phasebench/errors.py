"""Exception types shared by the pipelines and mapped to CLI exit codes."""


class CapExceededError(ValueError):
    """A requested size is beyond a configured resource cap."""


class InvariantError(RuntimeError):
    """An internal consistency check failed."""
