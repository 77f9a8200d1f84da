"""Exception hierarchy shared by all simulator modules."""


class HnomaError(Exception):
    """Base class for simulator errors."""


class ConfigurationError(HnomaError, ValueError):
    """A parameter or scenario violates a documented constraint."""


class UsageError(HnomaError, ValueError):
    """An operation was called with malformed arguments (lengths, indices)."""


class InputError(HnomaError, ValueError):
    """Numerical input data is unusable (NaN, Inf)."""


class InvariantError(HnomaError, RuntimeError):
    """An internal consistency check failed."""


class SchemaError(ConfigurationError):
    """A scenario file is structurally invalid (unknown/missing keys, wrong types, version)."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("scenario schema errors:\n  " + "\n  ".join(self.problems))
