"""Exception hierarchy shared by every qcorr module."""


class QcorrError(ValueError):
    """Base class for all input/validation errors raised by qcorr."""


class InvalidShapeError(QcorrError):
    """Matrix or subsystem dimensions are inconsistent."""


class HermiticityError(QcorrError):
    """Operator expected to be Hermitian is not."""


class TraceError(QcorrError):
    """Density matrix does not have unit trace."""


class PositivityError(QcorrError):
    """Density matrix has a negative eigenvalue beyond tolerance."""


class PurityError(QcorrError):
    """A pure state was required but a mixed one was given."""


class InvalidParameterError(QcorrError):
    """Parameter outside its admissible range."""


class NumericalError(RuntimeError):
    """Internal numerical failure (non-finite values, failed decomposition)."""
