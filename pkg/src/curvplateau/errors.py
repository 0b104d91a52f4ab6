"""Exception types shared across the package."""

from __future__ import annotations


class CurvPlateauError(Exception):
    """Base class for all package-specific errors."""


class DomainError(CurvPlateauError):
    """An argument lies outside the positive cone or another required domain.

    Carries enough context to locate the offending value.
    """

    def __init__(self, message: str, *, min_eigenvalue: float | None = None,
                 node_index: int | None = None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue
        self.node_index = node_index


class AdmissibilityError(CurvPlateauError):
    """A surface state left the admissible cone at some node."""

    def __init__(self, message: str, *, node_index: int | None = None,
                 min_eigenvalue: float | None = None, min_height: float | None = None):
        super().__init__(message)
        self.node_index = node_index
        self.min_eigenvalue = min_eigenvalue
        self.min_height = min_height


class InconsistencyError(CurvPlateauError):
    """Numerical evidence contradicts a structural assumption.

    Raised for non-monotone limit sequences, asymmetric custom derivative
    data at repeated eigenvalues, mixed finite/infinite limit classification
    across samples, and similar contract violations.
    """


class GridError(CurvPlateauError):
    """A discrete domain cannot support the requested stencil or field."""


class ConfigError(CurvPlateauError):
    """One or more configuration entries are invalid.

    ``problems`` lists every violation found, not only the first.
    """

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)
