"""Exception types shared across the package."""


class ResourceLimitError(RuntimeError):
    """A computation would exceed a configured size or work budget."""


class MISBudgetExceeded(ResourceLimitError):
    pass


class SimulatorLimitError(ResourceLimitError):
    pass


class IntegratorError(RuntimeError):
    pass
