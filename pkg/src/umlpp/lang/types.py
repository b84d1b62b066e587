"""Static type descriptors for the expression language."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True, slots=True)
class TypeDescriptor:
    kind: str  # String Integer Float Boolean Date Monetary Enum Object Collection Undefined
    ref: Optional[str] = None               # enum id / class id
    elem: Optional["TypeDescriptor"] = None  # collection element type

    def __post_init__(self):
        if self.kind == "Collection":
            assert self.elem is not None and self.elem.kind != "Undefined"

    def __str__(self) -> str:
        if self.kind == "Collection":
            return f"Collection({self.elem})"
        if self.ref is not None:
            return f"{self.kind}({self.ref})"
        return self.kind


STRING = TypeDescriptor("String")
INTEGER = TypeDescriptor("Integer")
FLOAT = TypeDescriptor("Float")
BOOLEAN = TypeDescriptor("Boolean")
DATE = TypeDescriptor("Date")
MONETARY = TypeDescriptor("Monetary")
UNDEFINED = TypeDescriptor("Undefined")


def enum_type(enum_id: str) -> TypeDescriptor:
    return TypeDescriptor("Enum", ref=enum_id)


def object_type(class_id: str) -> TypeDescriptor:
    return TypeDescriptor("Object", ref=class_id)


def collection(elem: TypeDescriptor) -> TypeDescriptor:
    return TypeDescriptor("Collection", elem=elem)


NUMERIC = (INTEGER, FLOAT)


def is_numeric(t: TypeDescriptor) -> bool:
    return t.kind in ("Integer", "Float")


def describe(t: TypeDescriptor, project=None) -> str:
    """Human-readable form; resolves element ids to names when a project
    snapshot is available."""
    if t.kind == "Collection":
        return f"Collection({describe(t.elem, project)})"
    if t.kind in ("Enum", "Object") and project is not None:
        el = project.element(t.ref) if t.ref else None
        name = getattr(el, "name", t.ref)
        return f"{t.kind}({name})"
    return str(t)
