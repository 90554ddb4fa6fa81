"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter lies outside the domain of the requested quantity."""


class StructureError(ValueError):
    """An input matrix lacks the symmetry the computation relies on."""
