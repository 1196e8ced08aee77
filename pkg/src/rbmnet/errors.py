"""Exception types shared across the package."""


class RbmnetError(Exception):
    """Base class for all package errors."""


class EnumerationCapError(RbmnetError):
    """An exact computation was requested beyond the enumeration cap."""


class DegreeCapError(RbmnetError):
    """The requested error target needs a polynomial degree above the cap."""

    def __init__(self, needed, cap):
        self.needed = needed
        self.cap = cap
        super().__init__(
            f"degree {needed} needed to meet the error target exceeds cap {cap}"
        )


class ValidationError(RbmnetError):
    """Bad input data or configuration.

    Carries ``paths``, a list of dotted config paths for machine-readable
    error reports.
    """

    def __init__(self, message, paths=()):
        self.paths = list(paths)
        super().__init__(message)
