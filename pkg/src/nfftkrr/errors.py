"""Exception hierarchy shared across the package.

The CLI maps these onto structured exit codes: I/O errors exit 2,
validation errors exit 3, numerical failures exit 4.
"""


class ValidationError(ValueError):
    """Invalid input: bad shapes, domains, labels, configuration."""


class ShapeError(ValidationError):
    """Array argument has the wrong length or dimensionality."""


class NumericalError(RuntimeError):
    """A numerical procedure broke down (NaN/Inf, singular system)."""
