"""Exception hierarchy shared by every VQPL module."""

from __future__ import annotations

from enum import Enum


class VQPLError(Exception):
    """Base class for all errors raised by the package."""


class NotObservable(VQPLError):
    pass


class IndexOutOfRange(VQPLError):
    pass


class DuplicateTarget(VQPLError):
    pass


class CapacityExceeded(VQPLError):
    pass


class InvalidGate(VQPLError):
    pass


class Stuck(VQPLError):
    """A closed non-value term has no applicable rule (a soundness bug)."""


class Timeout(VQPLError):
    pass


class NodeBudgetExceeded(VQPLError):
    pass


class WeightOverflow(VQPLError):
    pass


class Unsupported(VQPLError):
    pass


class ResidualMass(VQPLError):
    pass


class ShapeMismatch(VQPLError):
    pass


class NonCommutative(VQPLError):
    pass


class UnknownSugar(VQPLError):
    pass


class ErrorKind(str, Enum):
    UNBOUND = "Unbound"
    MISMATCH = "Mismatch"
    NON_LINEAR_USE = "NonLinearUse"
    UNUSED_LINEAR = "UnusedLinear"
    NOT_OBSERVABLE = "NotObservable"
    ARITY_MISMATCH = "ArityMismatch"
    ILL_FORMED_TYPE = "IllFormedType"


class TypeCheckError(VQPLError):
    """A rejected typing judgement.

    ``needs_annotation`` marks failures caused only by a missing injection or
    fold annotation in synthesis mode; the checker retries those in checking
    mode when another branch fixes the type.
    """

    def __init__(self, kind, message, span=None, expected=None, actual=None,
                 needs_annotation=False):
        super().__init__(message)
        self.kind = ErrorKind(kind)
        self.message = message
        self.span = span
        self.expected = expected
        self.actual = actual
        self.needs_annotation = needs_annotation

    def __str__(self):
        return f"{self.kind.value}: {self.message}"


class ParseError(VQPLError):
    """Lexical or syntactic failure; carries the diagnostic list."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(d.message for d in self.diagnostics))
