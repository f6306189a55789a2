"""Exceptions raised by the qhmr package."""


class QhmrError(Exception):
    """Base class; residual is the numeric evidence when there is one"""

    def __init__(self, message, residual=None):
        Exception.__init__(self, message)
        self.message = message
        self.residual = residual

    def __str__(self):
        if self.residual is None:
            return self.message
        return "%s (residual %.3e)" % (self.message, self.residual)


class DimensionError(QhmrError, ValueError):
    pass


class PositivityError(QhmrError, ValueError):
    pass


class SupportError(QhmrError, ValueError):
    pass


class CptpError(QhmrError):
    pass


class DecompositionError(QhmrError):
    pass


class NoPositiveElementError(QhmrError):
    pass


class ResidualGuardError(QhmrError):
    pass


class ModelFormatError(QhmrError, ValueError):
    pass


class CertificateMismatchError(QhmrError):
    pass
