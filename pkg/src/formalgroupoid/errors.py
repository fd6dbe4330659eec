"""Exception types shared across modules."""


class CapExceededError(RuntimeError):
    """A resource guard refused an enumeration or an integration."""


class DegreeCapError(CapExceededError):
    """A polynomial operation would exceed the configured total degree."""


class PoissonInputError(ValueError):
    """Malformed or invalid Poisson-structure document."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class WeightTableError(ValueError):
    """Malformed weight table or conflicting exact entries."""


class MissingWeightError(KeyError):
    """No weight is available for a graph and no estimator was configured."""

    def __str__(self):
        return f"no weight available for graph {self.args[0]!r}"
