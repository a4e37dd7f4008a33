"""Exception taxonomy shared across the toolkit.

The CLI maps these onto exit codes: UsageError -> 1, I/O errors -> 2,
FormatError / ValidationError -> 3.
"""


class SppKitError(Exception):
    """Base class for all toolkit errors."""


class InvalidConfigError(SppKitError, ValueError):
    """A configuration value violates its documented constraint."""


class DomainError(SppKitError, ValueError):
    """A numeric argument is outside the mathematical domain of an operation."""


class ShapeMismatchError(SppKitError, ValueError):
    """Array arguments have incompatible shapes."""


class FormatError(SppKitError):
    """A binary file does not conform to its on-disk format contract."""


class ValidationError(SppKitError):
    """A loaded object fails semantic validation (inventory, shapes, stats)."""


class UsageError(SppKitError):
    """Bad command-line invocation."""
