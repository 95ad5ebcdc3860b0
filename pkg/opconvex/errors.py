"""
Exceptions raised by opconvex.

Everything derives from OpConvexError, itself a RuntimeError.  The command
line front end prints these to stderr and exits with status 1.

"""


class OpConvexError(RuntimeError):
    pass


class ShapeError(OpConvexError):
    pass


class NotHermitianError(OpConvexError):
    pass


class DomainError(OpConvexError):
    """A spectrum, point or eigenvalue tuple lies outside a domain.

    Attributes:
    values -- the offending eigenvalue or tuple of eigenvalues

    """

    def __init__(self, message, values=None):
        super(DomainError, self).__init__(message)
        self.values = values


class EigensolverError(OpConvexError):
    """The Jacobi iteration reached its sweep cap.

    Attributes:
    residual -- off-diagonal Frobenius mass when the iteration stopped
    sweeps   -- number of sweeps performed

    """

    def __init__(self, message, residual, sweeps):
        super(EigensolverError, self).__init__(message)
        self.residual = residual
        self.sweeps = sweeps


class DerivativeError(OpConvexError):
    pass


class ConfigError(OpConvexError):
    pass


class SerializationError(OpConvexError):
    pass
