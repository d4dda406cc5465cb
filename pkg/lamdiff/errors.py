"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations

Location = tuple[int, int]


class LamDiffError(Exception):
    """Base class for every error raised by lamdiff."""

    def __init__(self, message: str, location: Location | None = None):
        super().__init__(message)
        self.message = message
        self.location = location

    def __str__(self) -> str:
        if self.location is None:
            return self.message
        line, col = self.location
        return f"{line}:{col}: {self.message}"


class ParseError(LamDiffError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(message, (line, column))
        self.line = line
        self.column = column


# ---------------------------------------------------------------------------
# Typing
# ---------------------------------------------------------------------------

class TypeCheckError(LamDiffError):
    pass


class UnboundVariable(TypeCheckError):
    def __init__(self, name: str, location: Location | None = None):
        super().__init__(f"unbound variable '{name}'", location)
        self.name = name


class TypeMismatch(TypeCheckError):
    def __init__(self, expected: str, found: object, location: Location | None = None):
        super().__init__(f"expected {expected}, found {found}", location)
        self.expected = expected
        self.found = found


class UnknownOp(TypeCheckError):
    def __init__(self, name: str, location: Location | None = None):
        super().__init__(f"unknown operation '{name}'", location)
        self.name = name


class LinearityShapeError(TypeCheckError):
    pass


# ---------------------------------------------------------------------------
# Shapes and evaluation
# ---------------------------------------------------------------------------

class ShapeError(LamDiffError):
    pass


class WidthMismatch(ShapeError):
    def __init__(self, left: int, right: int):
        super().__init__(f"width mismatch: {left} vs {right}")
        self.left = left
        self.right = right


class ShapeMismatch(ShapeError):
    pass


class InvalidStep(LamDiffError):
    """A finite-difference step that is not a positive number."""


class NonFirstOrderType(LamDiffError):
    pass


class NoRuleApplies(LamDiffError):
    pass


class GenerationExhausted(LamDiffError):
    pass


class InvariantViolation(LamDiffError):
    """Emitted code failed one of its own self-checks."""
