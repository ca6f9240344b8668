"""
Exception hierarchy for the large-N solver.

Every error carries a stable ``code`` that is reported in the machine-readable
``error`` field of command output.
"""


class LargeNError(Exception):
    code = "LargeNError"
    exit_code = 2

    def as_record(self) -> dict:
        return {"error": self.code, "detail": str(self)}


class UsageError(LargeNError):
    code = "UsageError"
    exit_code = 1


class PotentialSyntaxError(UsageError):
    code = "SyntaxError"

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class UnknownSymbol(PotentialSyntaxError):
    code = "UnknownSymbol"


class InvalidProblem(UsageError):
    code = "InvalidProblem"


class DomainError(LargeNError):
    code = "DomainError"


class ZeroConstantTerm(DomainError):
    code = "ZeroConstantTerm"


class NonpositiveConstantTerm(DomainError):
    code = "NonpositiveConstantTerm"


class NoMinimum(LargeNError):
    code = "NoMinimum"


class NotAMinimum(LargeNError):
    code = "NotAMinimum"


class NewtonDiverged(LargeNError):
    code = "NewtonDiverged"


class WTwoNonpositive(LargeNError):
    code = "WTwoNonpositive"


class DegenerateDenominator(LargeNError):
    code = "DegenerateDenominator"


class SchedulingCycle(LargeNError):
    """A recursion table entry was read before it was computed."""
    code = "SchedulingCycle"


class TooShort(LargeNError):
    code = "TooShort"


class NoBoundState(LargeNError):
    code = "NoBoundState"


class GridTooSmall(LargeNError):
    code = "GridTooSmall"
