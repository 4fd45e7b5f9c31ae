"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument names something unknown or violates an operation's contract."""


class CycleError(InvalidArgumentError):
    """A directed cycle (or self-loop) was found where an acyclic graph is required."""


class PreconditionError(ValueError):
    """A documented precondition of an operation does not hold."""


class DegenerateDataError(ValueError):
    """The data make the requested statistic undefined (singular, constant, ...)."""


class InsufficientSampleError(ValueError):
    """Too few rows for the requested computation."""


class ValidationError(ValueError):
    """A configuration failed validation.

    ``problems`` holds one message per violated invariant, each prefixed by
    the field path it refers to.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class BudgetExceededError(RuntimeError):
    """Exhaustive search refused because the variable count exceeds its budget."""
