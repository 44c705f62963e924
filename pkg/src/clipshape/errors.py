"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class NoBudgetError(RuntimeError):
    """The link cannot meet the FEC threshold anywhere in the loss range."""
