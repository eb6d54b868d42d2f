"""Exception types shared by every module.

Each error carries a stable ``code`` string used in JSON reports and CLI output.
"""
from __future__ import annotations


class CoarseLabError(Exception):
    code = "Error"

    def to_record(self) -> dict:
        return {"code": self.code, "message": str(self)}


class MismatchedSpace(CoarseLabError):
    code = "MismatchedSpace"


class InvalidPoint(CoarseLabError):
    code = "InvalidPoint"


class EmptySample(CoarseLabError):
    code = "EmptySample"


class EndpointMismatch(CoarseLabError):
    code = "EndpointMismatch"


class TooFewPoints(CoarseLabError):
    code = "TooFewPoints"


class BadValence(CoarseLabError):
    code = "BadValence"


class BadDepth(CoarseLabError):
    code = "BadDepth"


class InvalidSpace(CoarseLabError):
    code = "InvalidSpace"


class Disconnected(CoarseLabError):
    code = "Disconnected"


class HorizonExceeded(CoarseLabError):
    code = "HorizonExceeded"


class InvalidIsometry(CoarseLabError):
    code = "InvalidIsometry"


class NotLoxodromic(CoarseLabError):
    code = "NotLoxodromic"


class DoesNotFixDirection(CoarseLabError):
    code = "DoesNotFixDirection"


class FactorNotDroppable(CoarseLabError):
    code = "FactorNotDroppable"


class NotRegularDirection(CoarseLabError):
    code = "NotRegularDirection"


class PreconditionViolation(CoarseLabError):
    code = "PreconditionViolation"


class NotGeneralType(CoarseLabError):
    code = "NotGeneralType"


class NotATremble(CoarseLabError):
    code = "NotATremble"


class SceneError(CoarseLabError):
    """A parse or typecheck failure located at a 1-based line and column."""

    code = "SceneError"

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(message)
        self.line, self.col = line, col

    def to_record(self) -> dict:
        return {"code": self.code, "message": str(self), "line": self.line, "col": self.col}


class SceneSyntaxError(SceneError):
    code = "SyntaxError"


class UnknownName(SceneError):
    code = "UnknownName"


class TypeMismatch(SceneError):
    code = "TypeMismatch"
