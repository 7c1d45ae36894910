"""Exception hierarchy.

Budget exhaustion errors (``Inconclusive`` subclasses) never mean a negative
mathematical answer; they only say the search ran out of room.
"""


class FreeDynError(Exception):
    pass


class RankError(FreeDynError, ValueError):
    pass


class WordSyntaxError(FreeDynError, ValueError):
    pass


class ParseError(FreeDynError, ValueError):
    def __init__(self, msg, line=None):
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg)


class NotAutomorphism(FreeDynError):
    pass


class NotSurjective(NotAutomorphism):
    pass


class DeterminantObstruction(NotAutomorphism):
    pass


class Inconclusive(FreeDynError):
    """A finite budget ran out; nothing is claimed about the mathematics."""


class NoConvergenceDetected(Inconclusive):
    pass


class NonExponential(FreeDynError):
    pass


class NotFoundWithinBudget(Inconclusive):
    pass


class NotConverged(Inconclusive):
    pass


class SequencePeriodic(FreeDynError):
    def __init__(self, cycle, msg="sequence is periodic"):
        super().__init__(msg)
        self.cycle = cycle


class Reducible(FreeDynError, ValueError):
    pass


class ZeroMatrix(FreeDynError, ValueError):
    pass


class InvalidSite(FreeDynError, ValueError):
    pass


class InvalidINP(FreeDynError, ValueError):
    pass


class PrerequisiteUnresolved(Inconclusive):
    pass


class Undetermined(Inconclusive):
    """Evidence was mixed or the budget ran out before a decision."""
