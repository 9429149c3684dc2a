"""Exception hierarchy shared across the package."""


class GraphIDSError(Exception):
    """Base class for all package errors."""


class InvalidAdjacencyError(GraphIDSError, ValueError):
    pass


class ScheduleExhaustedError(GraphIDSError, IndexError):
    """A finite feedback schedule was asked for a round it does not cover."""


class SizeLimitError(GraphIDSError, ValueError):
    """An exhaustive routine was called on an instance above its budget."""


class InvalidPriorError(GraphIDSError, ValueError):
    pass


class DuplicateObservationError(GraphIDSError, ValueError):
    pass


class InvalidOutcomeError(GraphIDSError, ValueError):
    pass


class NumericalFailureError(GraphIDSError, ArithmeticError):
    pass


class NoInformationError(GraphIDSError):
    """Every candidate distribution has zero expected information gain."""


class InfeasibleError(GraphIDSError, ValueError):
    pass


class NoBoundError(GraphIDSError, ValueError):
    """The policy has no Bayesian regret bound attached to it."""


class ConfigError(GraphIDSError, ValueError):
    def __init__(self, message, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.key = key
        self.line = line


class TrialError(GraphIDSError):
    """A simulated trial failed; carries the trial seed and round for replay."""

    def __init__(self, message, seed=None, round_index=None):
        parts = [message]
        if seed is not None:
            parts.append(f"seed={seed}")
        if round_index is not None:
            parts.append(f"round={round_index}")
        super().__init__(" ".join(parts))
        self.seed = seed
        self.round_index = round_index
