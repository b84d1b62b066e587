"""Canonical project document: load, validate, save, report export.

One JSON file (extension ``.umlpp.json``) holds the whole project including
diagram layout. Serialization is canonical: fixed key order, definition-order
arrays, UTF-8, LF, two-space indent, trailing newline, so byte equality means
something. Expressions are stored as source strings and re-checked at load;
monetary amounts are stored as decimal strings and never pass through binary
floats.

Loading never repairs anything: any structural, referential, invariant or
expression problem raises LoadError with a JSON pointer to the offender.
"""

from __future__ import annotations

import json
import re
from datetime import date

from umlpp import engine
from umlpp.errors import LoadError, ModelError
from umlpp.kernel import _delegation_reaches, _op_param_env
from umlpp.lang import types as td
from umlpp.lang.ast import format_expr
from umlpp.lang.evaluate import is_undefined
from umlpp.lang.parser import parse as parse_expr
from umlpp.lang.typecheck import assignable, typecheck
from umlpp.model import (
    AssociationDef,
    AssociationEnd,
    AttributeDef,
    ClassDef,
    ConstraintDef,
    DelegationDef,
    DiagramLayout,
    DiagramNode,
    EnumerationDef,
    Link,
    Multiplicity,
    ObjectInst,
    OperationDef,
    Param,
    Project,
    Slot,
    TypeRef,
)
from umlpp.values import EnumValue, Money, ObjectRef

FORMAT_VERSION = 1
FILE_EXTENSION = ".umlpp.json"

_TOP_KEYS = ("formatVersion", "projectName", "enumerations", "classes",
             "associations", "objects", "links", "diagrams")
_MULT_RE = re.compile(r"^(\d+|\*|\d+\.\.(\d+|\*))$")
_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


# ---------------------------------------------------------------------------
# Value encoding
# ---------------------------------------------------------------------------

def value_to_json(value) -> dict:
    if isinstance(value, bool):
        return {"kind": "boolean", "v": value}
    if isinstance(value, str):
        return {"kind": "string", "v": value}
    if isinstance(value, int):
        return {"kind": "integer", "v": value}
    if isinstance(value, float):
        return {"kind": "float", "v": value}
    if isinstance(value, date):
        return {"kind": "date", "v": value.isoformat()}
    if isinstance(value, Money):
        return {"kind": "monetary", "amount": value.amount_str,
                "currency": value.currency}
    if isinstance(value, EnumValue):
        return {"kind": "enum", "enumeration": value.enumeration,
                "literal": value.literal}
    if isinstance(value, ObjectRef):
        return {"kind": "ref", "object": value.object_id}
    raise TypeError(f"cannot encode value {value!r}")


def value_from_json(data, pointer: str):
    if not isinstance(data, dict) or "kind" not in data:
        raise LoadError("schema", pointer, "value must be an object with a "
                                           "'kind'")
    kind = data["kind"]
    if kind == "string":
        v = data.get("v")
        if not isinstance(v, str):
            raise LoadError("schema", pointer, "string value needs a text 'v'")
        return v
    if kind == "integer":
        v = data.get("v")
        if not isinstance(v, int) or isinstance(v, bool):
            raise LoadError("schema", pointer, "integer value needs an int 'v'")
        return v
    if kind == "float":
        v = data.get("v")
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise LoadError("schema", pointer, "float value needs a number 'v'")
        return float(v)
    if kind == "boolean":
        v = data.get("v")
        if not isinstance(v, bool):
            raise LoadError("schema", pointer, "boolean value needs a bool 'v'")
        return v
    if kind == "date":
        v = data.get("v")
        if not isinstance(v, str) or not _DATE_RE.match(v):
            raise LoadError("schema", pointer, "date value needs 'v' as "
                                               "YYYY-MM-DD")
        try:
            y, m, d = v.split("-")
            return date(int(y), int(m), int(d))
        except ValueError:
            raise LoadError("schema", pointer, f"invalid calendar date {v!r}") \
                from None
    if kind == "monetary":
        amount = data.get("amount")
        currency = data.get("currency")
        if not isinstance(amount, str) or not isinstance(currency, str):
            raise LoadError("schema", pointer, "monetary value needs string "
                                               "'amount' and 'currency'")
        try:
            return Money.parse(amount, currency)
        except ValueError as exc:
            raise LoadError("schema", pointer, str(exc)) from None
    if kind == "enum":
        enum_id = data.get("enumeration")
        literal = data.get("literal")
        if not isinstance(enum_id, str) or not isinstance(literal, str):
            raise LoadError("schema", pointer, "enum value needs string "
                                               "'enumeration' and 'literal'")
        return EnumValue(enum_id, literal)
    if kind == "ref":
        target = data.get("object")
        if not isinstance(target, str):
            raise LoadError("schema", pointer, "ref value needs an 'object' id")
        return ObjectRef(target)
    raise LoadError("schema", pointer, f"unknown value kind {kind!r}")


# ---------------------------------------------------------------------------
# Type and multiplicity encoding
# ---------------------------------------------------------------------------

def _typeref_to_json(tref: TypeRef) -> dict:
    if tref.kind == "datatype":
        return {"kind": "datatype", "name": tref.name}
    if tref.kind == "enumeration":
        return {"kind": "enumeration", "enumeration": tref.ref}
    return {"kind": "class", "class": tref.ref}


def _typeref_from_json(data, pointer: str) -> TypeRef:
    if not isinstance(data, dict):
        raise LoadError("schema", pointer, "type must be an object")
    kind = data.get("kind")
    if kind == "datatype":
        name = data.get("name")
        from umlpp.model import BUILTIN_DATATYPES
        if name not in BUILTIN_DATATYPES:
            raise LoadError("schema", pointer, f"unknown data type {name!r}")
        return TypeRef.datatype(name)
    if kind == "enumeration":
        ref = data.get("enumeration")
        if not isinstance(ref, str):
            raise LoadError("schema", pointer, "enumeration type needs an id")
        return TypeRef.enumeration(ref)
    if kind == "class":
        ref = data.get("class")
        if not isinstance(ref, str):
            raise LoadError("schema", pointer, "class type needs an id")
        return TypeRef.to_class(ref)
    raise LoadError("schema", pointer, f"unknown type kind {kind!r}")


def _mult_to_str(m: Multiplicity) -> str:
    return str(m)


def _mult_from_str(text, pointer: str) -> Multiplicity:
    if not isinstance(text, str) or not _MULT_RE.match(text):
        raise LoadError("schema", pointer,
                        f"multiplicity must look like 'l..u', 'n' or '*', "
                        f"got {text!r}")
    if text == "*":
        return Multiplicity(0, None)
    if ".." in text:
        low, high = text.split("..")
        try:
            return Multiplicity(int(low), None if high == "*" else int(high))
        except ModelError as exc:
            raise LoadError("schema", pointer, exc.message) from None
    n = int(text)
    return Multiplicity(n, n)


# ---------------------------------------------------------------------------
# Save
# ---------------------------------------------------------------------------

def _attribute_to_json(attr: AttributeDef) -> dict:
    out = {"id": attr.id, "name": attr.name,
           "type": _typeref_to_json(attr.type), "derived": attr.derived}
    if attr.derived:
        out["derivation"] = attr.derivation_src
    return out


def _operation_to_json(op: OperationDef) -> dict:
    return {"id": op.id, "name": op.name,
            "params": [{"name": p.name, "type": _typeref_to_json(p.type)}
                       for p in op.params],
            "returnType": _typeref_to_json(op.return_type),
            "body": op.body_src, "monitored": op.monitored}


def _class_to_json(cls: ClassDef) -> dict:
    return {
        "id": cls.id,
        "name": cls.name,
        "abstract": cls.abstract,
        "superclass": cls.superclass,
        "delegations": [{"id": d.id, "name": d.name, "target": d.target}
                        for d in cls.delegations],
        "attributes": [_attribute_to_json(a) for a in cls.attributes],
        "operations": [_operation_to_json(o) for o in cls.operations],
        "constraints": [{"id": c.id, "name": c.name, "body": c.body_src,
                         "message": c.message_src} for c in cls.constraints],
    }


def _object_to_json(project: Project, obj: ObjectInst) -> dict:
    slots = {}
    for attr in project.effective_attributes(obj.class_id):
        slot = obj.slots.get(attr.id)
        if slot is None:
            continue
        if slot.state == "unset":
            slots[attr.name] = {"state": "unset"}
        elif slot.state == "entered":
            slots[attr.name] = {"state": "entered",
                                "value": value_to_json(slot.value)}
        else:
            entry = {"state": "computed"}
            if slot.value is not None and not is_undefined(slot.value):
                entry["value"] = value_to_json(slot.value)
            slots[attr.name] = entry
    delegates = {}
    for dele in project.effective_delegations(obj.class_id):
        target = obj.delegates.get(dele.name)
        if target is not None:
            delegates[dele.name] = target
    return {"id": obj.id, "name": obj.name, "class": obj.class_id,
            "slots": slots, "delegates": delegates}


def document_dict(project: Project, layouts: list[DiagramLayout]) -> dict:
    return {
        "formatVersion": FORMAT_VERSION,
        "projectName": project.name,
        "enumerations": [{"id": e.id, "name": e.name,
                          "literals": list(e.literals)}
                         for e in project.enumerations.values()],
        "classes": [_class_to_json(c) for c in project.classes.values()],
        "associations": [{
            "id": a.id, "name": a.name,
            "ends": [{"class": end.class_id, "role": end.role,
                      "multiplicity": _mult_to_str(end.multiplicity)}
                     for end in a.ends],
        } for a in project.associations.values()],
        "objects": [_object_to_json(project, o)
                    for o in project.objects.values()],
        "links": [{"id": l.id, "association": l.association,
                   "end1": l.end1, "end2": l.end2}
                  for l in project.links.values()],
        "diagrams": [{"name": d.name,
                      "nodes": [{"element": n.element, "x": n.x, "y": n.y}
                                for n in d.nodes]}
                     for d in layouts],
    }


def save(project: Project, layouts: list[DiagramLayout]) -> bytes:
    """Canonical bytes: semantically equal models serialize identically."""
    text = json.dumps(document_dict(project, layouts), indent=2,
                      ensure_ascii=False)
    return (text + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# Load
# ---------------------------------------------------------------------------

class _Reader:
    """Pointer-tracking access into the parsed JSON tree."""

    def __init__(self, data, pointer: str = ""):
        self.data = data
        self.pointer = pointer

    def fail(self, kind: str, message: str):
        raise LoadError(kind, self.pointer or "/", message)

    def child(self, key) -> "_Reader":
        return _Reader(self.data[key], f"{self.pointer}/{key}")

    def require_keys(self, keys: tuple):
        if not isinstance(self.data, dict):
            self.fail("schema", "expected an object")
        unknown = set(self.data) - set(keys)
        if unknown:
            self.fail("schema", f"unknown key(s): {', '.join(sorted(unknown))}")
        missing = set(keys) - set(self.data)
        if missing:
            self.fail("schema", f"missing key(s): {', '.join(sorted(missing))}")

    def str_field(self, key) -> str:
        v = self.data.get(key)
        if not isinstance(v, str):
            raise LoadError("schema", f"{self.pointer}/{key}",
                            "expected a string")
        return v

    def bool_field(self, key) -> bool:
        v = self.data.get(key)
        if not isinstance(v, bool):
            raise LoadError("schema", f"{self.pointer}/{key}",
                            "expected a boolean")
        return v

    def list_field(self, key) -> "_Reader":
        v = self.data.get(key)
        if not isinstance(v, list):
            raise LoadError("schema", f"{self.pointer}/{key}",
                            "expected an array")
        return _Reader(v, f"{self.pointer}/{key}")

    def items(self):
        for i, item in enumerate(self.data):
            yield _Reader(item, f"{self.pointer}/{i}")


def load(data: bytes) -> tuple[Project, list[DiagramLayout]]:
    """Parse, schema-validate, resolve references, enforce kernel invariants,
    re-check all expressions, and run load-time conformance checking."""
    try:
        raw = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise LoadError("syntax", "", str(exc)) from None
    root = _Reader(raw)
    root.require_keys(_TOP_KEYS)
    version = raw.get("formatVersion")
    if version != FORMAT_VERSION:
        raise LoadError("schema", "/formatVersion",
                        f"unsupported format version {version!r}")

    project = Project(root.str_field("projectName"))
    ids: dict[str, str] = {}  # id -> pointer, for global uniqueness

    def register(eid, pointer):
        if not isinstance(eid, str) or not eid:
            raise LoadError("schema", pointer, "id must be a non-empty string")
        if eid in ids:
            raise LoadError("invariant", pointer,
                            f"duplicate element id {eid!r} (also at {ids[eid]})")
        ids[eid] = pointer
        return eid

    # enumerations
    for item in root.list_field("enumerations").items():
        item.require_keys(("id", "name", "literals"))
        eid = register(item.str_field("id"), f"{item.pointer}/id")
        lits = item.data["literals"]
        if (not isinstance(lits, list) or not lits
                or not all(isinstance(x, str) for x in lits)):
            raise LoadError("schema", f"{item.pointer}/literals",
                            "need a non-empty array of strings")
        if len(set(lits)) != len(lits):
            raise LoadError("invariant", f"{item.pointer}/literals",
                            "duplicate literals")
        project.enumerations[eid] = EnumerationDef(eid, item.str_field("name"),
                                                   list(lits))

    # classes (structure first, expressions later)
    expr_sites = []  # (pointer, class id, definition, field)
    for item in root.list_field("classes").items():
        item.require_keys(("id", "name", "abstract", "superclass",
                           "delegations", "attributes", "operations",
                           "constraints"))
        cid = register(item.str_field("id"), f"{item.pointer}/id")
        superclass = item.data["superclass"]
        if superclass is not None and not isinstance(superclass, str):
            raise LoadError("schema", f"{item.pointer}/superclass",
                            "expected a class id or null")
        cls = ClassDef(id=cid, name=item.str_field("name"),
                       abstract=item.bool_field("abstract"),
                       superclass=superclass)
        for d in item.list_field("delegations").items():
            d.require_keys(("id", "name", "target"))
            did = register(d.str_field("id"), f"{d.pointer}/id")
            cls.delegations.append(DelegationDef(did, d.str_field("name"),
                                                 d.str_field("target")))
        for a in item.list_field("attributes").items():
            derived_keys = ("id", "name", "type", "derived", "derivation")
            plain_keys = ("id", "name", "type", "derived")
            if not isinstance(a.data, dict):
                a.fail("schema", "expected an object")
            a.require_keys(derived_keys if "derivation" in a.data else plain_keys)
            aid = register(a.str_field("id"), f"{a.pointer}/id")
            derived = a.bool_field("derived")
            if derived != ("derivation" in a.data):
                a.fail("schema", "derived attributes need a 'derivation' "
                                 "expression; plain attributes must not have "
                                 "one")
            attr = AttributeDef(
                id=aid, name=a.str_field("name"),
                type=_typeref_from_json(a.data["type"], f"{a.pointer}/type"),
                derived=derived,
                derivation_src=a.str_field("derivation") if derived else None)
            cls.attributes.append(attr)
            if derived:
                expr_sites.append((f"{a.pointer}/derivation", cid, attr,
                                   "derivation"))
        for o in item.list_field("operations").items():
            o.require_keys(("id", "name", "params", "returnType", "body",
                            "monitored"))
            oid = register(o.str_field("id"), f"{o.pointer}/id")
            params = []
            for p in o.list_field("params").items():
                p.require_keys(("name", "type"))
                params.append(Param(p.str_field("name"),
                                    _typeref_from_json(p.data["type"],
                                                       f"{p.pointer}/type")))
            op = OperationDef(
                id=oid, name=o.str_field("name"), params=params,
                return_type=_typeref_from_json(o.data["returnType"],
                                               f"{o.pointer}/returnType"),
                body_src=o.str_field("body"),
                monitored=o.bool_field("monitored"))
            if op.monitored and op.params:
                o.fail("invariant", "monitored operations take no parameters")
            cls.operations.append(op)
            expr_sites.append((f"{o.pointer}/body", cid, op, "body"))
        for c in item.list_field("constraints").items():
            c.require_keys(("id", "name", "body", "message"))
            con_id = register(c.str_field("id"), f"{c.pointer}/id")
            con = ConstraintDef(id=con_id, name=c.str_field("name"),
                                body_src=c.str_field("body"),
                                message_src=c.str_field("message"))
            cls.constraints.append(con)
            expr_sites.append((f"{c.pointer}/body", cid, con, "body"))
            expr_sites.append((f"{c.pointer}/message", cid, con, "message"))
        project.classes[cid] = cls

    # associations
    for item in root.list_field("associations").items():
        item.require_keys(("id", "name", "ends"))
        aid = register(item.str_field("id"), f"{item.pointer}/id")
        ends_reader = item.list_field("ends")
        if len(ends_reader.data) != 2:
            ends_reader.fail("schema", "an association has exactly two ends")
        ends = []
        for e in ends_reader.items():
            e.require_keys(("class", "role", "multiplicity"))
            ends.append(AssociationEnd(
                e.str_field("class"), e.str_field("role"),
                _mult_from_str(e.data["multiplicity"],
                               f"{e.pointer}/multiplicity")))
        project.associations[aid] = AssociationDef(aid, item.str_field("name"),
                                                   (ends[0], ends[1]))

    # objects (slots decoded after classes are known)
    slot_sites = []
    for item in root.list_field("objects").items():
        item.require_keys(("id", "name", "class", "slots", "delegates"))
        oid = register(item.str_field("id"), f"{item.pointer}/id")
        obj = ObjectInst(id=oid, name=item.str_field("name"),
                         class_id=item.str_field("class"))
        if not isinstance(item.data["slots"], dict):
            raise LoadError("schema", f"{item.pointer}/slots",
                            "expected an object keyed by attribute name")
        if not isinstance(item.data["delegates"], dict):
            raise LoadError("schema", f"{item.pointer}/delegates",
                            "expected an object keyed by delegation name")
        slot_sites.append((item, obj))
        project.objects[oid] = obj

    # links
    for item in root.list_field("links").items():
        item.require_keys(("id", "association", "end1", "end2"))
        lid = register(item.str_field("id"), f"{item.pointer}/id")
        project.links[lid] = Link(lid, item.str_field("association"),
                                  item.str_field("end1"),
                                  item.str_field("end2"))

    # diagrams
    layouts = []
    for item in root.list_field("diagrams").items():
        item.require_keys(("name", "nodes"))
        layout = DiagramLayout(item.str_field("name"))
        for n in item.list_field("nodes").items():
            n.require_keys(("element", "x", "y"))
            element = n.str_field("element")
            x, y = n.data["x"], n.data["y"]
            if not all(isinstance(v, int) and not isinstance(v, bool)
                       for v in (x, y)):
                n.fail("schema", "node coordinates must be integers")
            layout.nodes.append(DiagramNode(element, x, y))
        layouts.append(layout)

    _validate_references(project, root, slot_sites, layouts)
    _validate_invariants(project, root)
    _check_expressions(project, expr_sites)
    _validate_conformance(project, root)
    project.seed_id_counter()
    engine.recompute_derived(project)
    return project, layouts


def _validate_references(project: Project, root: _Reader, slot_sites, layouts):
    for i, cls in enumerate(project.classes.values()):
        if cls.superclass is not None and cls.superclass not in project.classes:
            raise LoadError("reference", f"/classes/{i}/superclass",
                            f"unknown class {cls.superclass!r}")
        for j, dele in enumerate(cls.delegations):
            if dele.target not in project.classes:
                raise LoadError("reference",
                                f"/classes/{i}/delegations/{j}/target",
                                f"unknown class {dele.target!r}")
        for j, attr in enumerate(cls.attributes):
            _check_typeref(project, attr.type, f"/classes/{i}/attributes/{j}/type")
        for j, op in enumerate(cls.operations):
            _check_typeref(project, op.return_type,
                           f"/classes/{i}/operations/{j}/returnType")
            for k, param in enumerate(op.params):
                _check_typeref(project, param.type,
                               f"/classes/{i}/operations/{j}/params/{k}/type")
    for i, assoc in enumerate(project.associations.values()):
        for j, end in enumerate(assoc.ends):
            if end.class_id not in project.classes:
                raise LoadError("reference",
                                f"/associations/{i}/ends/{j}/class",
                                f"unknown class {end.class_id!r}")
    for i, link in enumerate(project.links.values()):
        if link.association not in project.associations:
            raise LoadError("reference", f"/links/{i}/association",
                            f"unknown association {link.association!r}")
        for key, end in (("end1", link.end1), ("end2", link.end2)):
            if end not in project.objects:
                raise LoadError("reference", f"/links/{i}/{key}",
                                f"unknown object {end!r}")
    for item, obj in slot_sites:
        if obj.class_id not in project.classes:
            raise LoadError("reference", f"{item.pointer}/class",
                            f"unknown class {obj.class_id!r}")
        effective = {a.name: a for a in
                     project.effective_attributes(obj.class_id)}
        for name, slot_data in item.data["slots"].items():
            pointer = f"{item.pointer}/slots/{name}"
            attr = effective.get(name)
            if attr is None:
                raise LoadError("reference", pointer,
                                f"'{obj.name}' has no attribute {name!r}")
            obj.slots[attr.id] = _slot_from_json(project, slot_data, pointer)
        declared = {d.name: d for d in
                    project.effective_delegations(obj.class_id)}
        for name, target in item.data["delegates"].items():
            pointer = f"{item.pointer}/delegates/{name}"
            if name not in declared:
                raise LoadError("reference", pointer,
                                f"'{obj.name}' declares no delegation {name!r}")
            if not isinstance(target, str):
                raise LoadError("schema", pointer,
                                "delegate target must be an object id; omit "
                                "the entry for unbound delegations")
            if target not in project.objects:
                raise LoadError("reference", pointer,
                                f"unknown object {target!r}")
            obj.delegates[name] = target
    for i, layout in enumerate(layouts):
        for j, node in enumerate(layout.nodes):
            if (node.element not in project.classes
                    and node.element not in project.objects):
                raise LoadError("reference",
                                f"/diagrams/{i}/nodes/{j}/element",
                                f"unknown element {node.element!r}")
    for item, obj in slot_sites:
        for ref_holder in obj.slots.values():
            value = ref_holder.value
            if isinstance(value, ObjectRef) and value.object_id not in project.objects:
                raise LoadError("reference", f"{item.pointer}/slots",
                                f"slot references unknown object "
                                f"{value.object_id!r}")
            if isinstance(value, EnumValue) and value.enumeration not in project.enumerations:
                raise LoadError("reference", f"{item.pointer}/slots",
                                f"slot references unknown enumeration "
                                f"{value.enumeration!r}")


def _slot_from_json(project: Project, data, pointer: str) -> Slot:
    if not isinstance(data, dict) or "state" not in data:
        raise LoadError("schema", pointer, "slot must be an object with a "
                                           "'state'")
    state = data["state"]
    if state not in ("unset", "entered", "computed"):
        raise LoadError("schema", pointer, f"unknown slot state {state!r}")
    allowed = {"state", "value"} if state != "unset" else {"state"}
    unknown = set(data) - allowed
    if unknown:
        raise LoadError("schema", pointer,
                        f"unknown slot key(s): {', '.join(sorted(unknown))}")
    if state == "unset":
        return Slot(attribute="", state="unset")
    if state == "entered" and "value" not in data:
        raise LoadError("schema", pointer, "entered slots need a value")
    value = (value_from_json(data["value"], f"{pointer}/value")
             if "value" in data else None)
    return Slot(attribute="", state=state, value=value)


def _validate_invariants(project: Project, root: _Reader):
    # shared namespace over classes, objects and enumerations
    seen: dict[str, str] = {}
    for kind, table in (("class", project.classes), ("object", project.objects),
                        ("enumeration", project.enumerations)):
        for el in table.values():
            if el.name in seen:
                raise LoadError("invariant", "/",
                                f"name {el.name!r} is used by both "
                                f"{seen[el.name]} and this {kind}")
            seen[el.name] = f"a {kind}"
    # acyclic generalization
    for i, cls in enumerate(project.classes.values()):
        chain_ids = set()
        cur = cls.id
        while cur is not None:
            if cur in chain_ids:
                raise LoadError("invariant", f"/classes/{i}/superclass",
                                f"generalization cycle through {cls.name!r}")
            chain_ids.add(cur)
            cur = project.classes[cur].superclass
    # effective feature uniqueness, role shadowing
    for i, cls in enumerate(project.classes.values()):
        names = []
        for c in project.superclass_chain(cls.id):
            names.extend(c.feature_names())
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise LoadError("invariant", f"/classes/{i}",
                            f"duplicate feature name(s) {sorted(dupes)} in "
                            f"the effective set of {cls.name!r}")
    # class-level delegation acyclicity
    for i, cls in enumerate(project.classes.values()):
        for j, dele in enumerate(cls.delegations):
            if _delegation_reaches(project, dele.target, cls.id):
                raise LoadError("invariant",
                                f"/classes/{i}/delegations/{j}",
                                f"class-level delegation cycle through "
                                f"{cls.name!r}")
    # role collisions
    for i, assoc in enumerate(project.associations.values()):
        if assoc.ends[0].role == assoc.ends[1].role:
            raise LoadError("invariant", f"/associations/{i}",
                            "both ends carry the same role name")
        for j, end in enumerate(assoc.ends):
            near = assoc.ends[1 - j].class_id
            for sub in (project.classes[near],
                        *project.subclasses_transitive(near)):
                if end.role in project.effective_feature_names(sub.id):
                    raise LoadError("invariant",
                                    f"/associations/{i}/ends/{j}/role",
                                    f"role {end.role!r} collides with a "
                                    f"feature of {sub.name!r}")
        # a role name must be navigable from one association only
    for i, cls in enumerate(project.classes.values()):
        roles = [assoc.ends[far].role
                 for assoc, far in project.visible_roles(cls.id)]
        dupes = {r for r in roles if roles.count(r) > 1}
        if dupes:
            raise LoadError("invariant", "/associations",
                            f"role name(s) {sorted(dupes)} navigable from "
                            f"{cls.name!r} more than once")
    # abstract classes have no direct instances; covered again by conformance
    for i, obj in enumerate(project.objects.values()):
        if project.classes[obj.class_id].abstract:
            raise LoadError("invariant", f"/objects/{i}/class",
                            f"'{obj.name}' instantiates abstract class")
    # links: end conformance and duplicates
    seen_links = set()
    for i, link in enumerate(project.links.values()):
        assoc = project.associations[link.association]
        for key, end_obj, end in (("end1", link.end1, assoc.ends[0]),
                                  ("end2", link.end2, assoc.ends[1])):
            obj = project.objects[end_obj]
            if not project.conforms(obj.class_id, end.class_id):
                raise LoadError("invariant", f"/links/{i}/{key}",
                                f"'{obj.name}' does not conform to role "
                                f"'{end.role}'")
        signature = (link.association, link.end1, link.end2)
        if signature in seen_links:
            raise LoadError("invariant", f"/links/{i}", "duplicate link")
        seen_links.add(signature)


def _check_expressions(project: Project, expr_sites):
    for pointer, class_id, definition, field in expr_sites:
        attr = "derivation" if field == "derivation" else field
        src = getattr(definition, f"{attr}_src")
        env = (_op_param_env(project, definition)
               if isinstance(definition, OperationDef) else None)
        try:
            tree = parse_expr(src)
            typecheck(tree, project, class_id, env)
            canonical = format_expr(tree)
            if canonical != src:
                # hand-written sources normalize on load, like kernel edits
                tree = parse_expr(canonical)
                setattr(definition, f"{attr}_src", canonical)
            descriptor = typecheck(tree, project, class_id, env)
        except ModelError as exc:
            raise LoadError("expression", pointer, exc.message) from None
        if field == "derivation":
            want = project.descriptor(definition.type)
            if not assignable(descriptor, want, project):
                raise LoadError("expression", pointer,
                                f"derivation has type {descriptor}, expected "
                                f"{want}")
            definition.derivation_ast = tree
        elif isinstance(definition, OperationDef):
            want = project.descriptor(definition.return_type)
            if not assignable(descriptor, want, project):
                raise LoadError("expression", pointer,
                                f"body has type {descriptor}, expected {want}")
            definition.body_ast = tree
        elif field == "body":
            if descriptor != td.BOOLEAN:
                raise LoadError("expression", pointer,
                                f"constraint body must be Boolean, got "
                                f"{descriptor}")
            definition.body_ast = tree
        else:
            if descriptor != td.STRING:
                raise LoadError("expression", pointer,
                                f"constraint message must be String, got "
                                f"{descriptor}")
            definition.message_ast = tree


def _validate_conformance(project: Project, root: _Reader):
    for i, obj in enumerate(project.objects.values()):
        # slot.attribute was left blank during decoding; fill it now
        for attr_id, slot in obj.slots.items():
            slot.attribute = attr_id
        findings = engine.check_conformance(project, obj.id)
        if findings:
            raise LoadError("invariant", f"/objects/{i}",
                            findings[0].message)


def _check_typeref(project: Project, tref: TypeRef, pointer: str):
    if tref.kind == "enumeration" and tref.ref not in project.enumerations:
        raise LoadError("reference", pointer,
                        f"unknown enumeration {tref.ref!r}")
    if tref.kind == "class" and tref.ref not in project.classes:
        raise LoadError("reference", pointer, f"unknown class {tref.ref!r}")


# ---------------------------------------------------------------------------
# Report export
# ---------------------------------------------------------------------------

def source_to_json(source: engine.Source) -> dict:
    if source.kind == "constraint":
        return {"kind": "constraint", "constraint": source.constraint}
    if source.kind == "multiplicity":
        return {"kind": "multiplicity", "association": source.association,
                "end": source.end}
    return {"kind": "conformance", "conformance": source.conformance}


def source_from_json(data: dict) -> engine.Source:
    kind = data["kind"]
    if kind == "constraint":
        return engine.Source("constraint", constraint=data["constraint"])
    if kind == "multiplicity":
        return engine.Source("multiplicity", association=data["association"],
                             end=data["end"])
    return engine.Source("conformance", conformance=data["conformance"])


def report_to_json(report: engine.ViolationReport) -> dict:
    return {"revision": report.revision,
            "entries": [{"object": v.object,
                         "source": source_to_json(v.source),
                         "status": v.status,
                         "message": v.message} for v in report.entries]}


def report_from_json(data: dict) -> engine.ViolationReport:
    return engine.ViolationReport(
        data["revision"],
        tuple(engine.Violation(e["object"], source_from_json(e["source"]),
                               e["status"], e["message"])
              for e in data["entries"]))


def result_to_json(result) -> dict:
    if is_undefined(result):
        return {"kind": "undefined", "reason": result.reason}
    return {"kind": "value", "value": value_to_json(result)}


def monitors_to_json(monitors: engine.MonitorSnapshot) -> dict:
    return {"entries": [{"object": m.object, "operation": m.operation,
                         "result": result_to_json(m.result)}
                        for m in monitors.entries]}


def _describe_source(source: engine.Source, project: Project | None) -> str:
    if source.kind == "constraint":
        label = source.constraint
        if project is not None:
            hit = project.find_feature(source.constraint)
            if hit:
                label = hit[1].name
        return f"constraint {label}"
    if source.kind == "multiplicity":
        label = source.association
        if project is not None and source.association in project.associations:
            label = project.associations[source.association].name
        return f"multiplicity {label}.{source.end}"
    return f"conformance {source.conformance}"


def export_report(report: engine.ViolationReport, format: str = "text",
                  project: Project | None = None) -> bytes:
    """Text: one line per entry. JSON: mirrors the report structure and
    re-parses to an equal report."""
    if format == "json":
        text = json.dumps(report_to_json(report), indent=2, ensure_ascii=False)
        return (text + "\n").encode("utf-8")
    lines = []
    for v in report.entries:
        label = v.object
        if project is not None and v.object in project.objects:
            label = project.objects[v.object].name
        status = "VIOLATED" if v.status == "violated" else "NOT-EVALUABLE"
        lines.append(f"{status} {label} "
                     f"{_describe_source(v.source, project)}: {v.message}")
    return ("".join(line + "\n" for line in lines)).encode("utf-8")
