"""Exception hierarchy.

Two families: :class:`ValidationError` for malformed or out-of-domain input
(the CLI maps these to exit code 2) and :class:`NumericalError` for failures
inside the pipeline (exit code 3).
"""


class WienerHopfError(Exception):
    """Base class for all package errors."""


class ValidationError(WienerHopfError):
    pass


class NumericalError(WienerHopfError):
    #: pipeline stage that raised, filled in by :func:`wienerhopf.indices.indices_of`
    stage = None


class ShapeMismatch(ValidationError):
    pass


class UnstableStateMatrix(ValidationError):
    pass


class NotHermitian(NumericalError):
    pass


class NotPositiveSemidefinite(NumericalError):
    pass


class NotIsometric(NumericalError):
    pass


class SingularResolvent(NumericalError):
    pass


class PhaseStepTooLarge(NumericalError):
    pass


class SpectralRadiusViolation(NumericalError):
    pass


class SpectraNotDisjoint(NumericalError):
    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


class NotStabilizable(NumericalError):
    pass


class IndefiniteSchurComplement(NumericalError):
    pass


class UnitarityCheckFailed(NumericalError):
    pass


class NonInvertibleP0(NumericalError):
    pass


class GrowthExhausted(NumericalError):
    pass


class AmbiguousRank(UserWarning):
    """Issued (not raised) when a decisive rank has a small singular value gap."""
