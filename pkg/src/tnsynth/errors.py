"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class AlgorithmFailure(RuntimeError):
    """A well-formed run that did not reach its goal (e.g. no period found)."""


class PeriodNotFound(AlgorithmFailure):
    pass
