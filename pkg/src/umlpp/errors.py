"""Error types raised by the model kernel and its front ends.

Every kernel error carries a stable machine-readable ``code`` equal to the
class name; the HTTP service and CLI map codes to status/exit codes without
string matching on messages.
"""

from __future__ import annotations


class ModelError(Exception):
    """Base class for all model editing and validation errors."""

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    @property
    def code(self) -> str:
        return type(self).__name__


# -- namespace / lookup ------------------------------------------------------

class NameTaken(ModelError):
    pass


class InvalidName(ModelError):
    pass


class UnknownElement(ModelError):
    pass


class UnknownClass(UnknownElement):
    pass


class UnknownObject(UnknownElement):
    pass


class UnknownSuperclass(UnknownElement):
    pass


class UnknownFeature(ModelError):
    pass


# -- structural rules --------------------------------------------------------

class GeneralizationCycle(ModelError):
    pass


class FeatureClash(ModelError):
    pass


class DuplicateFeature(ModelError):
    pass


class DelegationCycle(ModelError):
    pass


class DelegateCycle(ModelError):
    pass


class NonConformingDelegate(ModelError):
    pass


class AbstractClass(ModelError):
    pass


class RoleCollision(ModelError):
    pass


class BadMultiplicity(ModelError):
    pass


class EmptyEnumeration(ModelError):
    pass


class DuplicateLiteral(ModelError):
    pass


class DuplicateLink(ModelError):
    pass


class EndTypeMismatch(ModelError):
    pass


class StillReferenced(ModelError):
    """Guarded delete: the element is still used by the listed sites."""

    def __init__(self, message: str, references: list[str] | None = None, **details):
        super().__init__(message, **details)
        self.references = references or []


class ConformanceBreak(ModelError):
    """The edit would leave existing instances, links or bindings invalid."""

    def __init__(self, message: str, problems: list[str] | None = None, **details):
        super().__init__(message, **details)
        self.problems = problems or []


# -- slots and values --------------------------------------------------------

class DerivedSlotWriteForbidden(ModelError):
    pass


class TypeMismatch(ModelError):
    pass


class MonitoredWithParams(ModelError):
    pass


class ArityMismatch(ModelError):
    pass


# -- expression language -----------------------------------------------------

class ExpressionError(ModelError):
    """Base for parse/type failures; carries a source span when known."""

    def __init__(self, message: str, span=None, **details):
        super().__init__(message, **details)
        self.span = span


class ParseError(ExpressionError):
    def __init__(self, message: str, line: int = 0, column: int = 0,
                 expected=None, span=None):
        super().__init__(message, span=span)
        self.line = line
        self.column = column
        self.expected = sorted(expected) if expected else []

    @property
    def code(self) -> str:
        return "ParseError"


class TypeCheckError(ExpressionError):
    """Static type error. ``reason`` is one of the documented reason tags
    (UnknownFeature, OperandMismatch, NonBooleanConstraint, ...)."""

    def __init__(self, message: str, reason: str = "TypeError", span=None):
        super().__init__(message, span=span)
        self.reason = reason

    @property
    def code(self) -> str:
        return "TypeError"


# -- persistence -------------------------------------------------------------

class LoadError(ModelError):
    """Document rejected. ``kind`` is one of syntax | schema | reference |
    invariant | expression; ``pointer`` is a JSON pointer to the offender."""

    KINDS = ("syntax", "schema", "reference", "invariant", "expression")

    def __init__(self, kind: str, pointer: str, message: str):
        assert kind in self.KINDS
        super().__init__(message)
        self.kind = kind
        self.pointer = pointer

    def __str__(self) -> str:
        return f"{self.kind} error at {self.pointer or '/'}: {self.message}"
