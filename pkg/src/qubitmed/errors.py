"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`QubitMedError`
so callers (the CLI in particular) can catch them in one place.
"""

from __future__ import annotations


class QubitMedError(Exception):
    pass


class EnsembleError(QubitMedError, ValueError):
    """Invalid ensemble input."""


class PriorsNotNormalized(EnsembleError):
    pass


class NegativePrior(EnsembleError):
    def __init__(self, index: int, prior: float):
        super().__init__(f"state {index}: prior {prior!r} is negative")
        self.index = index


class StateOutsideBall(EnsembleError):
    def __init__(self, index: int | None, norm: float):
        where = "Bloch vector" if index is None else f"state {index}"
        super().__init__(f"{where}: norm {norm!r} exceeds 1")
        self.index = index


class ShiftLeavesBall(EnsembleError):
    def __init__(self, index: int, norm: float):
        super().__init__(f"state {index}: shifted Bloch vector has norm {norm!r} > 1")
        self.index = index


class IndexOutOfRange(QubitMedError, IndexError):
    pass


class DegenerateAllCoincident(QubitMedError):
    """All points coincide, so no enclosing sphere with positive radius exists."""


class CollinearPoints(QubitMedError):
    pass


class NotConstructible(QubitMedError):
    """A pair of states admits no hyperbola candidate (its distance parameter is <= 0)."""


class NotApplicable(QubitMedError):
    """The no-measurement strategy is not optimal for this ensemble."""


class NoIntersection(QubitMedError):
    """Hyperbolas of a triple or quadruple do not meet inside the hull of their foci."""


class GammaCoincidesWithState(QubitMedError):
    def __init__(self, index: int):
        super().__init__(f"gamma coincides with the subnormalized vector of state {index}")
        self.index = index


class InfeasibleAlphaSystem(QubitMedError):
    """No weight assignment in [0, 1] satisfies the completeness equations."""


class SolverExhausted(QubitMedError):
    """No candidate passed validation.

    ``oracle`` holds the dual-oracle ``(gamma0, gamma)`` and ``best`` the
    candidate with the least negative worst margin, for diagnosis.
    """

    def __init__(self, message: str, oracle=None, best=None):
        super().__init__(message)
        self.oracle = oracle
        self.best = best


class InvalidPovm(QubitMedError, ValueError):
    pass


class ProbabilityOutOfRange(QubitMedError):
    pass


class OutOfParameterRegion(QubitMedError, ValueError):
    pass


class AngleOutOfRange(QubitMedError, ValueError):
    pass


class WrongArity(QubitMedError, ValueError):
    pass
