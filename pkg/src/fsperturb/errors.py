"""Exception hierarchy shared by all modules."""


class FSError(Exception):
    """Base class for every error raised by this package."""


class InvalidMatrix(FSError, ValueError):
    pass


class NotPositiveDefinite(FSError, ValueError):
    pass


class NoConvergence(FSError, RuntimeError):
    pass


class SingularShift(FSError, ValueError):
    """Shift lies (numerically) on the spectrum; ``distance`` is the gap to the nearest eigenvalue."""

    def __init__(self, message, distance):
        super().__init__(message)
        self.distance = distance


class ResolventSingular(SingularShift):
    pass


class InvalidProblem(FSError, ValueError):
    pass


class LeftTrustRegion(FSError, RuntimeError):
    pass


class InvalidCertificate(FSError, ValueError):
    pass


class InvalidQuantumNumber(FSError, ValueError):
    pass


class InvalidDegree(InvalidQuantumNumber):
    pass


class InvalidOrder(InvalidQuantumNumber):
    pass


class InvalidOrbital(InvalidQuantumNumber):
    pass


class InvalidSphereRule(FSError, ValueError):
    pass


class NonFiniteIntegrand(FSError, ValueError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class InvalidGrid(FSError, ValueError):
    pass


class IoError(FSError, OSError):
    pass
