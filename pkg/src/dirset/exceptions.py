"""Exception taxonomy for the package.

The CLI maps :class:`InputError` to exit code 1 and
:class:`NumericalError` to exit code 2; everything raised by the library
derives from one of the two.
"""


class DirsetError(Exception):
    """Base class for all package-specific errors."""


class InputError(DirsetError):
    """The caller supplied something unusable (files, options, shapes)."""


class NumericalError(DirsetError):
    """Estimation or inference failed for numerical/statistical reasons."""


class InsufficientData(InputError):
    """Too few observations for the requested computation."""


class ParseError(InputError):
    """A CSV file or JSON config could not be interpreted."""


class InvalidResponse(InputError):
    """The response vector violates a method's coding requirements."""


class InvalidNull(InputError):
    """The hypothesized direction is unusable (wrong length or norm)."""


class DimensionTooLarge(InputError):
    """The method is intractable at this covariate dimension."""


class SingularMatrix(NumericalError):
    """A matrix required to be positive definite is numerically singular."""


class SingularCovariance(SingularMatrix):
    """The sample covariance of the covariates is numerically singular."""


class DegenerateDirection(NumericalError):
    """The unnormalized direction estimate is indistinguishable from zero."""


class UnstableLambda(NumericalError):
    """The plug-in slope is too close to zero for asymptotic inference."""


class SeparationError(NumericalError):
    """Probit likelihood diverges: the classes are (quasi-)separated."""
