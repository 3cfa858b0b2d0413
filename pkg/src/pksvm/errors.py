"""Exception types raised across the package."""


class PkSVMError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(PkSVMError, ValueError):
    pass


class NotPSD(PkSVMError, ValueError):
    """A matrix expected to be positive semidefinite has a negative eigenvalue."""


class NotSPD(PkSVMError, ValueError):
    """Cholesky factorization hit a non-positive pivot."""


class EmptyDataset(PkSVMError, ValueError):
    pass


class ParseError(PkSVMError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidLabel(ParseError):
    pass


class NoCrossings(PkSVMError):
    """No probe ray found a sign change of the decision score."""


class UnsupportedFormat(PkSVMError, ValueError):
    pass
