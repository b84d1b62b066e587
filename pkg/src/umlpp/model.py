"""Integrated model store: classes, objects, associations, links, enumerations.

All elements live in one project. Classes sit at level 1, objects at level 0,
and both share a single name space. References between elements are always by
id; names exist for display and for expression source only, which is what
makes renaming safe.

This module is purely structural: element types, lookups, effective-feature
flattening, conformance queries. Editing operations live in ``kernel``;
execution semantics in ``engine``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date
from typing import Iterator, Optional

from umlpp.errors import UnknownClass, UnknownElement, UnknownObject
from umlpp.lang import types as td
from umlpp.lang.ast import Expr
from umlpp.values import EnumValue, Money, ObjectRef

ElementId = str

BUILTIN_DATATYPES = ("String", "Integer", "Float", "Boolean", "Date", "MonetaryValue")

IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True, slots=True)
class TypeRef:
    """Reference to an attribute/parameter type: built-in data type,
    enumeration or class."""
    kind: str  # datatype | enumeration | class
    name: Optional[str] = None  # datatype name
    ref: Optional[ElementId] = None  # enumeration / class id

    @classmethod
    def datatype(cls, name: str) -> "TypeRef":
        assert name in BUILTIN_DATATYPES, name
        return cls("datatype", name=name)

    @classmethod
    def enumeration(cls, enum_id: ElementId) -> "TypeRef":
        return cls("enumeration", ref=enum_id)

    @classmethod
    def to_class(cls, class_id: ElementId) -> "TypeRef":
        return cls("class", ref=class_id)


@dataclass(frozen=True, slots=True)
class Multiplicity:
    lower: int
    upper: Optional[int]  # None = unbounded

    def __post_init__(self):
        from umlpp.errors import BadMultiplicity
        if self.lower < 0 or (self.upper is not None and self.upper < self.lower):
            raise BadMultiplicity(
                f"bad multiplicity {self.lower}..{self.upper}: lower must be "
                f"0 <= lower <= upper")

    def admits(self, count: int) -> bool:
        if count < self.lower:
            return False
        return self.upper is None or count <= self.upper

    def __str__(self) -> str:
        if self.upper is not None and self.lower == self.upper:
            return str(self.lower)
        if self.lower == 0 and self.upper is None:
            return "*"
        return f"{self.lower}..{self.upper if self.upper is not None else '*'}"


@dataclass(slots=True)
class AttributeDef:
    id: ElementId
    name: str
    type: TypeRef
    derived: bool = False
    derivation_src: Optional[str] = None
    derivation_ast: Optional[Expr] = None


@dataclass(slots=True)
class Param:
    name: str
    type: TypeRef


@dataclass(slots=True)
class OperationDef:
    id: ElementId
    name: str
    params: list[Param]
    return_type: TypeRef
    body_src: str
    body_ast: Optional[Expr] = None
    monitored: bool = False


@dataclass(slots=True)
class ConstraintDef:
    id: ElementId
    name: str
    body_src: str
    message_src: str
    body_ast: Optional[Expr] = None
    message_ast: Optional[Expr] = None


@dataclass(slots=True)
class DelegationDef:
    id: ElementId
    name: str
    target: ElementId  # target class


@dataclass(slots=True)
class ClassDef:
    id: ElementId
    name: str
    abstract: bool = False
    superclass: Optional[ElementId] = None
    attributes: list[AttributeDef] = field(default_factory=list)
    operations: list[OperationDef] = field(default_factory=list)
    constraints: list[ConstraintDef] = field(default_factory=list)
    delegations: list[DelegationDef] = field(default_factory=list)

    level: int = 1  # classes always sit at level 1

    def feature_names(self) -> set[str]:
        names = {a.name for a in self.attributes}
        names |= {o.name for o in self.operations}
        names |= {c.name for c in self.constraints}
        names |= {d.name for d in self.delegations}
        return names


@dataclass(frozen=True, slots=True)
class AssociationEnd:
    class_id: ElementId
    role: str
    multiplicity: Multiplicity


@dataclass(slots=True)
class AssociationDef:
    id: ElementId
    name: str
    ends: tuple[AssociationEnd, AssociationEnd]


@dataclass(slots=True)
class EnumerationDef:
    id: ElementId
    name: str
    literals: list[str]


@dataclass(slots=True)
class Slot:
    attribute: ElementId
    state: str = "unset"  # unset | entered | computed
    value: object = None  # present iff entered; cached result for computed


@dataclass(slots=True)
class ObjectInst:
    id: ElementId
    name: str
    class_id: ElementId
    slots: dict[ElementId, Slot] = field(default_factory=dict)
    delegates: dict[str, Optional[ElementId]] = field(default_factory=dict)

    level: int = 0  # objects always sit at level 0


@dataclass(slots=True)
class Link:
    id: ElementId
    association: ElementId
    end1: ElementId  # object id conforming to ends[0]
    end2: ElementId  # object id conforming to ends[1]


@dataclass(slots=True)
class DiagramNode:
    element: ElementId
    x: int
    y: int


@dataclass(slots=True)
class DiagramLayout:
    name: str
    nodes: list[DiagramNode] = field(default_factory=list)


class Project:
    """The single integrated store. Dict insertion order is definition order
    and stays stable across renames."""

    def __init__(self, name: str = "untitled"):
        self.name = name
        self.classes: dict[ElementId, ClassDef] = {}
        self.objects: dict[ElementId, ObjectInst] = {}
        self.associations: dict[ElementId, AssociationDef] = {}
        self.links: dict[ElementId, Link] = {}
        self.enumerations: dict[ElementId, EnumerationDef] = {}
        self._id_counter = 0
        self._effective_cache: dict[ElementId, dict] = {}

    # -- ids -------------------------------------------------------------

    def new_id(self) -> ElementId:
        self._id_counter += 1
        return f"e{self._id_counter}"

    def seed_id_counter(self) -> None:
        """After a load: continue numbering above every id already present."""
        highest = 0
        for eid in self.all_element_ids():
            m = re.match(r"^e(\d+)$", eid)
            if m:
                highest = max(highest, int(m.group(1)))
        self._id_counter = max(self._id_counter, highest)

    def all_element_ids(self) -> Iterator[ElementId]:
        yield from self.classes
        yield from self.objects
        yield from self.associations
        yield from self.links
        yield from self.enumerations
        for cls in self.classes.values():
            for f in (*cls.attributes, *cls.operations, *cls.constraints,
                      *cls.delegations):
                yield f.id

    # -- cache -----------------------------------------------------------

    def invalidate(self) -> None:
        self._effective_cache.clear()

    # -- transactional copies ------------------------------------------------

    def snapshot(self) -> "Project":
        import copy
        return copy.deepcopy(self)

    def restore(self, snap: "Project") -> None:
        """Swap state back from a snapshot. Definition objects fetched before
        the failed edit are stale afterwards; re-fetch by id."""
        self.name = snap.name
        self.classes = snap.classes
        self.objects = snap.objects
        self.associations = snap.associations
        self.links = snap.links
        self.enumerations = snap.enumerations
        self._id_counter = snap._id_counter
        self.invalidate()

    # -- lookups ---------------------------------------------------------

    def element(self, eid: ElementId):
        for table in (self.classes, self.objects, self.associations,
                      self.links, self.enumerations):
            if eid in table:
                return table[eid]
        hit = self.find_feature(eid)
        if hit:
            return hit[1]
        raise UnknownElement(f"no element with id {eid!r}", id=eid)

    def find_feature(self, fid: ElementId):
        """Returns (owning class, feature def, kind) or None."""
        for cls in self.classes.values():
            for attr in cls.attributes:
                if attr.id == fid:
                    return cls, attr, "attribute"
            for op in cls.operations:
                if op.id == fid:
                    return cls, op, "operation"
            for con in cls.constraints:
                if con.id == fid:
                    return cls, con, "constraint"
            for dele in cls.delegations:
                if dele.id == fid:
                    return cls, dele, "delegation"
        return None

    def require_class(self, cid: ElementId) -> ClassDef:
        cls = self.classes.get(cid)
        if cls is None:
            raise UnknownClass(f"no class with id {cid!r}", id=cid)
        return cls

    def require_object(self, oid: ElementId) -> ObjectInst:
        obj = self.objects.get(oid)
        if obj is None:
            raise UnknownObject(f"no object with id {oid!r}", id=oid)
        return obj

    def class_by_name(self, name: str) -> Optional[ClassDef]:
        for cls in self.classes.values():
            if cls.name == name:
                return cls
        return None

    def object_by_name(self, name: str) -> Optional[ObjectInst]:
        for obj in self.objects.values():
            if obj.name == name:
                return obj
        return None

    def enum_by_name(self, name: str) -> Optional[EnumerationDef]:
        for enum in self.enumerations.values():
            if enum.name == name:
                return enum
        return None

    def namespace_names(self) -> set[str]:
        """Names shared by classes, objects and enumerations: the single
        flat namespace expressions resolve against."""
        names = {c.name for c in self.classes.values()}
        names |= {o.name for o in self.objects.values()}
        names |= {e.name for e in self.enumerations.values()}
        return names

    # -- generalization --------------------------------------------------

    def superclass_chain(self, cid: ElementId) -> list[ClassDef]:
        """The class itself first, then superclasses towards the root."""
        chain = []
        seen = set()
        cur: Optional[ElementId] = cid
        while cur is not None and cur not in seen:
            seen.add(cur)
            cls = self.require_class(cur)
            chain.append(cls)
            cur = cls.superclass
        return chain

    def conforms(self, cid: ElementId, ancestor: ElementId) -> bool:
        return any(c.id == ancestor for c in self.superclass_chain(cid))

    def subclasses_transitive(self, cid: ElementId) -> list[ClassDef]:
        out = []
        for cls in self.classes.values():
            if cls.id != cid and self.conforms(cls.id, cid):
                out.append(cls)
        return out

    # -- effective features (inherited-flattened, root first) --------------

    def _effective(self, cid: ElementId) -> dict:
        cached = self._effective_cache.get(cid)
        if cached is not None:
            return cached
        attrs: list[AttributeDef] = []
        ops: list[OperationDef] = []
        cons: list[ConstraintDef] = []
        deles: list[DelegationDef] = []
        for cls in reversed(self.superclass_chain(cid)):
            attrs.extend(cls.attributes)
            ops.extend(cls.operations)
            cons.extend(cls.constraints)
            deles.extend(cls.delegations)
        entry = {"attributes": attrs, "operations": ops,
                 "constraints": cons, "delegations": deles}
        self._effective_cache[cid] = entry
        return entry

    def effective_attributes(self, cid: ElementId) -> list[AttributeDef]:
        return self._effective(cid)["attributes"]

    def effective_operations(self, cid: ElementId) -> list[OperationDef]:
        return self._effective(cid)["operations"]

    def effective_constraints(self, cid: ElementId) -> list[ConstraintDef]:
        return self._effective(cid)["constraints"]

    def effective_delegations(self, cid: ElementId) -> list[DelegationDef]:
        return self._effective(cid)["delegations"]

    def effective_feature_names(self, cid: ElementId) -> set[str]:
        eff = self._effective(cid)
        return ({f.name for f in eff["attributes"]}
                | {f.name for f in eff["operations"]}
                | {f.name for f in eff["constraints"]}
                | {f.name for f in eff["delegations"]})

    def find_effective_attribute(self, cid: ElementId, name: str) -> Optional[AttributeDef]:
        for attr in self.effective_attributes(cid):
            if attr.name == name:
                return attr
        return None

    def find_effective_operation(self, cid: ElementId, name: str) -> Optional[OperationDef]:
        for op in self.effective_operations(cid):
            if op.name == name:
                return op
        return None

    def find_effective_delegation(self, cid: ElementId, name: str) -> Optional[DelegationDef]:
        for dele in self.effective_delegations(cid):
            if dele.name == name:
                return dele
        return None

    # -- associations and roles -------------------------------------------

    def visible_roles(self, cid: ElementId) -> list[tuple[AssociationDef, int]]:
        """Roles navigable from instances of ``cid``: the far end of every
        association whose near end accepts this class. Returns
        (association, far end index) in definition order."""
        out = []
        for assoc in self.associations.values():
            for far in (0, 1):
                near = 1 - far
                if self.conforms(cid, assoc.ends[near].class_id):
                    out.append((assoc, far))
        return out

    def find_role(self, cid: ElementId, role: str) -> Optional[tuple[AssociationDef, int]]:
        for assoc, far in self.visible_roles(cid):
            if assoc.ends[far].role == role:
                return assoc, far
        return None

    def links_of(self, assoc_id: ElementId) -> list[Link]:
        return [l for l in self.links.values() if l.association == assoc_id]

    def link_partners(self, obj_id: ElementId, assoc: AssociationDef,
                      far: int) -> list[ElementId]:
        """Objects linked to obj at the far end, in link creation order."""
        near = 1 - far
        out = []
        for link in self.links.values():
            if link.association != assoc.id:
                continue
            ends = (link.end1, link.end2)
            if ends[near] == obj_id:
                out.append(ends[far])
        return out

    # -- instances ----------------------------------------------------------

    def instances_of(self, cid: ElementId) -> list[ObjectInst]:
        """Direct and indirect (subclass) instances, in creation order."""
        return [o for o in self.objects.values() if self.conforms(o.class_id, cid)]

    # -- typing helpers -------------------------------------------------------

    def descriptor(self, tref: TypeRef) -> td.TypeDescriptor:
        if tref.kind == "datatype":
            return {
                "String": td.STRING, "Integer": td.INTEGER, "Float": td.FLOAT,
                "Boolean": td.BOOLEAN, "Date": td.DATE,
                "MonetaryValue": td.MONETARY,
            }[tref.name]
        if tref.kind == "enumeration":
            return td.enum_type(tref.ref)
        return td.object_type(tref.ref)

    def value_matches(self, value, tref: TypeRef) -> bool:
        """Runtime type check for slot writes and load validation."""
        if tref.kind == "datatype":
            if tref.name == "String":
                return isinstance(value, str)
            if tref.name == "Integer":
                return isinstance(value, int) and not isinstance(value, bool)
            if tref.name == "Float":
                return isinstance(value, float)
            if tref.name == "Boolean":
                return isinstance(value, bool)
            if tref.name == "Date":
                return isinstance(value, date)
            if tref.name == "MonetaryValue":
                return isinstance(value, Money)
            return False
        if tref.kind == "enumeration":
            if not isinstance(value, EnumValue) or value.enumeration != tref.ref:
                return False
            enum = self.enumerations.get(tref.ref)
            return enum is not None and value.literal in enum.literals
        if tref.kind == "class":
            if not isinstance(value, ObjectRef):
                return False
            obj = self.objects.get(value.object_id)
            return obj is not None and self.conforms(obj.class_id, tref.ref)
        return False

    def coerce_for_slot(self, value, tref: TypeRef):
        """Integer widens to Float on entry; nothing else is coerced.
        Returns the stored value or None when the value does not fit."""
        if (tref.kind == "datatype" and tref.name == "Float"
                and isinstance(value, int) and not isinstance(value, bool)):
            return float(value)
        return value if self.value_matches(value, tref) else None

    # -- expression hosts ----------------------------------------------------

    def expression_hosts(self) -> Iterator[tuple[ClassDef, object, str]]:
        """Every (owning class, definition, field) holding expression source:
        attribute derivations, operation bodies, constraint bodies and
        messages."""
        for cls in self.classes.values():
            for attr in cls.attributes:
                if attr.derived:
                    yield cls, attr, "derivation"
            for op in cls.operations:
                yield cls, op, "body"
            for con in cls.constraints:
                yield cls, con, "body"
                yield cls, con, "message"
