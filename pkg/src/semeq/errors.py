"""Exception types shared across the package.

Everything derives from ValueError, so callers that do not care about the
specific failure can catch broadly. The CLI maps these to exit code 1
(input/validation problem) and everything else to exit code 2.
"""


class ValidationError(ValueError):
    """An input violates a documented precondition."""


class ShapeMismatchError(ValidationError):
    """Operands have non-conformable shapes."""


class DimensionMismatchError(ShapeMismatchError):
    """A vector or sample has the wrong dimensionality for this operator."""


class NotSymmetricError(ValidationError):
    """Matrix expected to be symmetric is not (beyond round-off)."""


class NotPositiveDefiniteError(ValidationError):
    """Factorization failed: matrix is not positive-definite."""


class AllZeroError(ValidationError):
    """Matrix is numerically zero; no meaningful inverse exists."""


class ZeroVectorError(ValidationError):
    """A vector with zero norm cannot be normalized."""


class OddLengthError(ValidationError):
    """Real/complex pairing needs an even number of components."""


class EmptyPilotSetError(ValidationError):
    """At least one pilot pair is required."""


class LayoutMissingError(ValidationError):
    """Convolutional aligners need a (channels, height, width) layout."""


class DegenerateReferencesError(ValidationError):
    """Reference encodings are all zero; no frame can be built."""


class InsufficientDataError(ValidationError):
    """Not enough samples to fit the requested model."""


class NonFiniteValueError(ValidationError):
    """NaN or infinity where only finite values are allowed."""


class TensorFormatError(ValidationError):
    """Malformed tensor container file."""


class BadMagicError(TensorFormatError):
    """File does not start with the expected magic bytes."""


class UnsupportedVersionError(TensorFormatError):
    """File declares a version or format code this build cannot read."""


class TruncatedFileError(TensorFormatError):
    """File ends before the declared payload is complete."""


class ConfigError(ValidationError):
    """Experiment configuration is invalid."""
