"""Exception types shared across the package.

The CLI maps these onto distinct exit codes: format/validation problems
exit 2, capacity overruns exit 3, failed iterative searches exit 4.
"""


class ModelFormatError(ValueError):
    """A model file or in-memory model violates a structural invariant."""


class CapacityError(RuntimeError):
    """An exact computation would enumerate more configurations than allowed."""


class ConvergenceError(RuntimeError):
    """An iterative search exhausted its iteration budget.

    Carries the probe trace so the caller can inspect what happened.
    """

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []
