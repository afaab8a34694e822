"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`QemtkError`.
Errors that signal a numerical breakdown (as opposed to bad input) derive from
:class:`NumericalError`; the CLI maps those to exit code 3.
"""


class QemtkError(Exception):
    """Base class for all package errors."""


class NumericalError(QemtkError):
    """A numerical procedure could not produce a trustworthy answer."""


class ShapeMismatch(QemtkError, ValueError):
    pass


class LengthMismatch(QemtkError, ValueError):
    pass


class DimensionMismatch(QemtkError, ValueError):
    pass


class NonHermitianInput(QemtkError, ValueError):
    pass


class NonUnitaryInput(QemtkError, ValueError):
    pass


class ParamOutOfRange(QemtkError, ValueError):
    pass


class UnknownFixture(QemtkError, KeyError):
    pass


class UnknownExample(QemtkError, KeyError):
    pass


class NonInvertibleChannel(QemtkError):
    pass


class NonInvertibleNoise(NonInvertibleChannel):
    pass


class NonInvertibleEstimate(NonInvertibleChannel):
    pass


class IllConditionedBasis(NumericalError):
    pass


class ClusterAmbiguity(NumericalError):
    pass


class BackendDisagreement(NumericalError):
    pass


class PostconditionFailed(NumericalError):
    """A checked mathematical postcondition did not hold numerically."""


class InvalidFirstOrderState(QemtkError):
    pass


class TargetOutsideSpan(QemtkError):
    pass


class DegenerateScales(QemtkError, ValueError):
    pass


class SingularReadoutMatrix(QemtkError):
    pass


class SingularChannel(QemtkError):
    pass


class LengthNotMultipleOf3(QemtkError, ValueError):
    pass


class FormatError(QemtkError, ValueError):
    """A file or payload does not follow the expected JSON layout."""
