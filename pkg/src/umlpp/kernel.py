"""Structural editing operations.

Every operation either completes fully or leaves the project untouched.
Cheap preconditions are checked up front; edits that can invalidate
expressions elsewhere (retyping, regeneralizing, retargeting) run against the
live project after taking a snapshot and roll back when revalidation fails.
After a FAILED guarded mutation the project state is restored from the
snapshot, so definition objects fetched before the call are stale; look
elements up again by id.

Renames never break references: elements point at each other by id, and
every expression source that mentions the old name is rewritten through its
resolved AST and re-rendered canonically.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

from umlpp.errors import (
    AbstractClass,
    ConformanceBreak,
    DelegateCycle,
    DelegationCycle,
    DerivedSlotWriteForbidden,
    DuplicateFeature,
    DuplicateLink,
    DuplicateLiteral,
    EmptyEnumeration,
    EndTypeMismatch,
    FeatureClash,
    GeneralizationCycle,
    InvalidName,
    MonitoredWithParams,
    NameTaken,
    NonConformingDelegate,
    RoleCollision,
    StillReferenced,
    TypeCheckError,
    TypeMismatch,
    UnknownClass,
    UnknownElement,
    UnknownFeature,
    UnknownSuperclass,
)
from umlpp.lang import ast as A
from umlpp.lang import types as td
from umlpp.lang.ast import format_expr, walk
from umlpp.lang.parser import KEYWORDS, parse
from umlpp.lang.typecheck import assignable, typecheck
from umlpp.model import (
    IDENT_RE,
    AssociationDef,
    AssociationEnd,
    AttributeDef,
    ClassDef,
    ConstraintDef,
    DelegationDef,
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
from umlpp.values import EnumValue, ObjectRef


# ---------------------------------------------------------------------------
# Summaries
# ---------------------------------------------------------------------------

@dataclass(slots=True)
class RewrittenSite:
    host: str    # id of the element owning the expression
    field: str   # derivation | body | message
    source: str  # new canonical source


@dataclass(slots=True)
class RenameSummary:
    element: str
    old_name: str
    new_name: str
    rewritten: list[RewrittenSite] = dc_field(default_factory=list)


@dataclass(slots=True)
class MigrationSummary:
    touched_objects: int = 0
    added_slots: int = 0
    removed_slots: int = 0
    cleared: list[tuple[str, str]] = dc_field(default_factory=list)   # (object, attr)
    coerced: list[tuple[str, str]] = dc_field(default_factory=list)
    unbound: list[tuple[str, str]] = dc_field(default_factory=list)   # (object, site)
    removed_links: list[str] = dc_field(default_factory=list)
    rewritten: list[RewrittenSite] = dc_field(default_factory=list)


# ---------------------------------------------------------------------------
# Shared validation helpers
# ---------------------------------------------------------------------------

def _check_name(name: str, what: str = "name"):
    if not IDENT_RE.match(name or ""):
        raise InvalidName(f"{what} {name!r} is not a valid identifier")
    if name in KEYWORDS:
        raise InvalidName(f"{what} {name!r} is a reserved word")


def _check_namespace_free(project: Project, name: str):
    if name in project.namespace_names():
        raise NameTaken(f"the name {name!r} is already in use", name=name)


def _subtree(project: Project, class_id: str) -> list[ClassDef]:
    return [project.require_class(class_id),
            *project.subclasses_transitive(class_id)]


def _visible_role_names(project: Project, class_id: str) -> set[str]:
    return {assoc.ends[far].role
            for assoc, far in project.visible_roles(class_id)}


def _check_feature_name_free(project: Project, class_id: str, name: str):
    """A feature name must be free in the effective feature set of the class
    and of every subclass that would inherit it, and must not shadow a
    navigable association role."""
    for cls in _subtree(project, class_id):
        if name in project.effective_feature_names(cls.id):
            raise DuplicateFeature(
                f"{cls.name} already has a feature named {name!r}", name=name)
        if name in _visible_role_names(project, cls.id):
            raise RoleCollision(
                f"{name!r} collides with an association role navigable from "
                f"{cls.name}", name=name)


def _valid_typeref(project: Project, tref: TypeRef):
    if tref.kind == "datatype":
        return
    if tref.kind == "enumeration":
        if tref.ref not in project.enumerations:
            raise UnknownElement(f"no enumeration with id {tref.ref!r}")
        return
    if tref.kind == "class":
        project.require_class(tref.ref)
        return
    raise TypeMismatch(f"bad type reference kind {tref.kind!r}")


# ---------------------------------------------------------------------------
# Expression management
# ---------------------------------------------------------------------------

def check_expression(project: Project, class_id: str, source: str,
                     param_env: dict | None = None):
    """Parse, type-check and canonicalize one expression in class context.
    Returns (canonical source, annotated ast, type descriptor)."""
    tree = parse(source)
    typecheck(tree, project, class_id, param_env)
    canonical = format_expr(tree)
    if canonical != source:
        tree = parse(canonical)
    descriptor = typecheck(tree, project, class_id, param_env)
    return canonical, tree, descriptor


def _op_param_env(project: Project, op: OperationDef) -> dict:
    return {p.name: project.descriptor(p.type) for p in op.params}


def revalidate_expressions(project: Project):
    """Re-parse and re-check every stored expression against the current
    structure, replacing the annotated trees. Raises TypeCheckError naming
    the offending host when an edit broke an expression elsewhere."""
    for cls, definition, field in project.expression_hosts():
        src = getattr(definition, "derivation_src" if field == "derivation"
                      else f"{field}_src")
        env = (_op_param_env(project, definition)
               if isinstance(definition, OperationDef) else None)
        try:
            tree = parse(src)
            descriptor = typecheck(tree, project, cls.id, env)
        except TypeCheckError as exc:
            raise TypeCheckError(
                f"{field} of {definition.name!r} in class {cls.name!r} no "
                f"longer checks: {exc.message}", reason=exc.reason,
                span=exc.span) from exc
        if field == "derivation":
            want = project.descriptor(definition.type)
            if not assignable(descriptor, want, project):
                raise TypeCheckError(
                    f"derivation of {definition.name!r} in class {cls.name!r} "
                    f"has type {descriptor}, expected {want}")
            definition.derivation_ast = tree
        elif isinstance(definition, OperationDef):
            want = project.descriptor(definition.return_type)
            if not assignable(descriptor, want, project):
                raise TypeCheckError(
                    f"body of {definition.name!r} in class {cls.name!r} has "
                    f"type {descriptor}, expected {want}")
            definition.body_ast = tree
        elif field == "body":
            if descriptor != td.BOOLEAN:
                raise TypeCheckError(
                    f"constraint {definition.name!r} in class {cls.name!r} "
                    f"must be Boolean, got {descriptor}",
                    reason="NonBooleanConstraint")
            definition.body_ast = tree
        else:
            if descriptor != td.STRING:
                raise TypeCheckError(
                    f"message of constraint {definition.name!r} in class "
                    f"{cls.name!r} must be String, got {descriptor}")
            definition.message_ast = tree


def _guarded(project: Project, mutate):
    """Run a mutation, then revalidate all expressions; roll back on any
    failure so the caller observes all-or-nothing behavior."""
    snap = project.snapshot()
    try:
        result = mutate()
        revalidate_expressions(project)
        return result
    except Exception:
        project.restore(snap)
        raise


def _rewrite_expressions(project: Project, touch) -> list[RewrittenSite]:
    """Apply ``touch(node) -> bool`` to every node of every stored
    expression; re-render hosts whose tree changed."""
    rewritten: list[RewrittenSite] = []
    for cls, definition, field in project.expression_hosts():
        attr = "derivation" if field == "derivation" else field
        tree = getattr(definition, f"{attr}_ast")
        changed = False
        for node in walk(tree):
            if touch(node):
                changed = True
        if changed:
            src = format_expr(tree)
            setattr(definition, f"{attr}_src", src)
            rewritten.append(RewrittenSite(definition.id, field, src))
    return rewritten


def _expression_references(project: Project, match) -> list[str]:
    """Hosts whose expression contains a node matched by ``match(node)``."""
    hits = []
    for cls, definition, field in project.expression_hosts():
        attr = "derivation" if field == "derivation" else field
        tree = getattr(definition, f"{attr}_ast")
        if any(match(node) for node in walk(tree)):
            hits.append(f"{field} of {definition.name!r} in class {cls.name!r}")
    return hits


# ---------------------------------------------------------------------------
# Classes
# ---------------------------------------------------------------------------

def create_class(project: Project, name: str, abstract: bool = False,
                 superclass: Optional[str] = None) -> ClassDef:
    _check_name(name, "class name")
    _check_namespace_free(project, name)
    if superclass is not None and superclass not in project.classes:
        raise UnknownSuperclass(f"no class with id {superclass!r}")
    cls = ClassDef(id=project.new_id(), name=name, abstract=abstract,
                   superclass=superclass)
    project.classes[cls.id] = cls
    project.invalidate()
    return cls


def set_abstract(project: Project, class_id: str, abstract: bool):
    cls = project.require_class(class_id)
    if abstract and any(o.class_id == class_id for o in project.objects.values()):
        raise AbstractClass(
            f"cannot make {cls.name!r} abstract: it has direct instances")
    cls.abstract = abstract


def set_generalization(project: Project, sub_id: str,
                       super_id: Optional[str]) -> MigrationSummary:
    sub = project.require_class(sub_id)
    if super_id is not None:
        if super_id not in project.classes:
            raise UnknownSuperclass(f"no class with id {super_id!r}")
        if super_id == sub_id or project.conforms(super_id, sub_id):
            raise GeneralizationCycle(
                f"{project.classes[super_id].name} already specializes "
                f"{sub.name}")

    def mutate():
        summary = MigrationSummary()
        before = {c.id: {a.id for a in project.effective_attributes(c.id)}
                  for c in _subtree(project, sub_id)}
        sub.superclass = super_id
        project.invalidate()
        _check_feature_uniqueness(project, sub_id)
        _check_delegations_acyclic(project)
        _check_instance_conformance(project)
        for cls_id, old_attrs in before.items():
            new_attrs = {a.id: a for a in project.effective_attributes(cls_id)}
            for obj in project.objects.values():
                if obj.class_id != cls_id:
                    continue
                summary.touched_objects += 1
                for attr_id in old_attrs - set(new_attrs):
                    if attr_id in obj.slots:
                        del obj.slots[attr_id]
                        summary.removed_slots += 1
                for attr_id, attr in new_attrs.items():
                    if attr_id not in obj.slots:
                        obj.slots[attr_id] = _fresh_slot(attr)
                        summary.added_slots += 1
        return summary

    return _guarded(project, mutate)


def _check_feature_uniqueness(project: Project, class_id: str):
    for cls in _subtree(project, class_id):
        names: list[str] = []
        for c in project.superclass_chain(cls.id):
            names.extend(c.feature_names())
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise FeatureClash(
                f"feature name(s) {sorted(dupes)} would clash in "
                f"{cls.name}", names=sorted(dupes))
        roles = _visible_role_names(project, cls.id)
        attr_clash = roles & {a.name for a in project.effective_attributes(cls.id)}
        if attr_clash:
            raise FeatureClash(
                f"attribute name(s) {sorted(attr_clash)} in {cls.name} would "
                f"shadow association role(s)", names=sorted(attr_clash))


def _check_delegations_acyclic(project: Project):
    """Regeneralizing can make an existing delegation reach back into its
    owner's subtree; the class-level graph must stay acyclic after every
    operation."""
    for cls in project.classes.values():
        for dele in cls.delegations:
            if _delegation_reaches(project, dele.target, cls.id):
                raise DelegationCycle(
                    f"the change closes a class-level delegation cycle "
                    f"through {cls.name!r}")


def _check_instance_conformance(project: Project):
    """Links, delegate bindings and object-typed slot values must survive a
    generalization change."""
    problems: list[str] = []
    for link in project.links.values():
        assoc = project.associations[link.association]
        for end_obj, end in ((link.end1, assoc.ends[0]), (link.end2, assoc.ends[1])):
            obj = project.objects[end_obj]
            if not project.conforms(obj.class_id, end.class_id):
                problems.append(f"link {link.id} end '{obj.name}' no longer "
                                f"conforms to role '{end.role}'")
    for obj in project.objects.values():
        declared = {d.name: d for d in project.effective_delegations(obj.class_id)}
        for name, target_id in obj.delegates.items():
            dele = declared.get(name)
            if dele is None:
                problems.append(f"'{obj.name}' binds delegation {name!r} that "
                                f"is no longer declared")
            elif target_id is not None:
                target = project.objects[target_id]
                if not project.conforms(target.class_id, dele.target):
                    problems.append(f"delegate '{name}' of '{obj.name}' no "
                                    f"longer conforms")
        for attr in project.effective_attributes(obj.class_id):
            slot = obj.slots.get(attr.id)
            if (slot is not None and slot.state == "entered"
                    and attr.type.kind == "class"
                    and not project.value_matches(slot.value, attr.type)):
                problems.append(f"slot '{attr.name}' of '{obj.name}' no "
                                f"longer conforms")
    if problems:
        raise ConformanceBreak("the change would break instance conformance",
                               problems=problems)


def remove_class(project: Project, class_id: str):
    cls = project.require_class(class_id)
    refs: list[str] = []
    for obj in project.objects.values():
        if obj.class_id == class_id:
            refs.append(f"object '{obj.name}'")
    for other in project.classes.values():
        if other.superclass == class_id:
            refs.append(f"subclass '{other.name}'")
        for dele in other.delegations:
            if dele.target == class_id:
                refs.append(f"delegation '{dele.name}' of class '{other.name}'")
        for attr in other.attributes:
            if attr.type.kind == "class" and attr.type.ref == class_id:
                refs.append(f"attribute '{attr.name}' of class '{other.name}'")
        for op in other.operations:
            typed = [op.return_type, *(p.type for p in op.params)]
            if any(t.kind == "class" and t.ref == class_id for t in typed):
                refs.append(f"operation '{op.name}' of class '{other.name}'")
    for assoc in project.associations.values():
        if any(end.class_id == class_id for end in assoc.ends):
            refs.append(f"association '{assoc.name}'")
    refs.extend(_expression_references(
        project, lambda n: isinstance(n, A.ExtentCall) and n.class_id == class_id))
    if refs:
        raise StillReferenced(f"class {cls.name!r} is still referenced",
                              references=refs)
    del project.classes[class_id]
    project.invalidate()


# ---------------------------------------------------------------------------
# Renaming
# ---------------------------------------------------------------------------

def rename_element(project: Project, element_id: str, new_name: str) -> RenameSummary:
    _check_name(new_name, "name")
    if element_id in project.classes:
        return _rename_classlike(project, project.classes[element_id], new_name,
                                 _rewrite_class_refs)
    if element_id in project.objects:
        return _rename_classlike(project, project.objects[element_id], new_name,
                                 None)
    if element_id in project.enumerations:
        return _rename_classlike(project, project.enumerations[element_id],
                                 new_name, _rewrite_enum_refs)
    if element_id in project.associations:
        assoc = project.associations[element_id]
        if any(a.name == new_name and a.id != element_id
               for a in project.associations.values()):
            raise NameTaken(f"an association named {new_name!r} exists")
        old = assoc.name
        assoc.name = new_name
        return RenameSummary(element_id, old, new_name)
    hit = project.find_feature(element_id)
    if hit is None:
        raise UnknownElement(f"no element with id {element_id!r}")
    return _rename_feature(project, *hit, new_name)


def _rename_classlike(project: Project, element, new_name: str,
                      rewriter) -> RenameSummary:
    if element.name == new_name:
        return RenameSummary(element.id, element.name, new_name)
    _check_namespace_free(project, new_name)
    old = element.name
    element.name = new_name
    rewritten = (_rewrite_expressions(project, lambda n: rewriter(n, element.id, new_name))
                 if rewriter else [])
    return RenameSummary(element.id, old, new_name, rewritten)


def _rewrite_class_refs(node, class_id: str, new_name: str) -> bool:
    if isinstance(node, A.ExtentCall) and node.class_id == class_id:
        node.class_name = new_name
        return True
    return False


def _rewrite_enum_refs(node, enum_id: str, new_name: str) -> bool:
    if isinstance(node, A.EnumLit) and node.enum_id == enum_id:
        node.enum_name = new_name
        return True
    return False


def _rename_feature(project: Project, owner: ClassDef, definition, kind: str,
                    new_name: str) -> RenameSummary:
    if definition.name == new_name:
        return RenameSummary(definition.id, new_name, new_name)
    _check_feature_name_free(project, owner.id, new_name)
    old = definition.name
    definition.name = new_name
    project.invalidate()
    rewritten: list[RewrittenSite] = []
    if kind == "attribute":
        rewritten = _rewrite_expressions(
            project, lambda n: _touch_nav(n, "attribute", definition.id, new_name))
    elif kind == "operation":
        def touch(n):
            if (isinstance(n, A.OpCall) and n.resolved
                    and n.resolved == ("operation", definition.id)):
                n.name = new_name
                return True
            return False
        rewritten = _rewrite_expressions(project, touch)
    elif kind == "delegation":
        rewritten = _rewrite_expressions(
            project, lambda n: _touch_nav(n, "delegation", definition.id, new_name))
        for obj in project.objects.values():
            if old not in obj.delegates:
                continue
            # unrelated classes may declare a same-named delegation; rekey
            # only bindings that resolve to this very definition
            eff = project.find_effective_delegation(obj.class_id, new_name)
            if eff is not None and eff.id == definition.id:
                obj.delegates[new_name] = obj.delegates.pop(old)
    return RenameSummary(definition.id, old, new_name, rewritten)


def _touch_nav(node, kind: str, element_id: str, new_name: str) -> bool:
    if (isinstance(node, A.Nav) and node.resolved
            and node.resolved[0] == kind and node.resolved[1] == element_id):
        node.name = new_name
        return True
    return False


def rename_role(project: Project, association_id: str, end_index: int,
                new_name: str) -> RenameSummary:
    """Association ends carry no element id of their own, so role renames
    address (association, end index)."""
    assoc = project.associations.get(association_id)
    if assoc is None:
        raise UnknownElement(f"no association with id {association_id!r}")
    if end_index not in (0, 1):
        raise UnknownElement(f"association end must be 0 or 1")
    _check_name(new_name, "role")
    end = assoc.ends[end_index]
    if end.role == new_name:
        return RenameSummary(association_id, new_name, new_name)
    _check_role_free(project, assoc, end_index, new_name,
                     other_role=assoc.ends[1 - end_index].role)
    old = end.role
    ends = list(assoc.ends)
    ends[end_index] = AssociationEnd(end.class_id, new_name, end.multiplicity)
    assoc.ends = (ends[0], ends[1])

    def touch(n):
        if (isinstance(n, A.Nav) and n.resolved
                and n.resolved[0] == "role"
                and n.resolved[1] == association_id
                and n.resolved[2] == end_index):
            n.name = new_name
            return True
        return False

    rewritten = _rewrite_expressions(project, touch)
    return RenameSummary(association_id, old, new_name, rewritten)


def rename_enum_literal(project: Project, enum_id: str, old: str,
                        new: str) -> RenameSummary:
    enum = project.enumerations.get(enum_id)
    if enum is None:
        raise UnknownElement(f"no enumeration with id {enum_id!r}")
    if old not in enum.literals:
        raise UnknownElement(f"{enum.name} has no literal {old!r}")
    _check_name(new, "literal")
    if new in enum.literals:
        raise DuplicateLiteral(f"{enum.name} already has literal {new!r}")
    enum.literals[enum.literals.index(old)] = new

    def touch(n):
        if (isinstance(n, A.EnumLit) and n.enum_id == enum_id
                and n.literal == old):
            n.literal = new
            return True
        return False

    rewritten = _rewrite_expressions(project, touch)
    for obj in project.objects.values():
        for slot in obj.slots.values():
            if (isinstance(slot.value, EnumValue)
                    and slot.value.enumeration == enum_id
                    and slot.value.literal == old):
                slot.value = EnumValue(enum_id, new)
    return RenameSummary(enum_id, old, new, rewritten)


# ---------------------------------------------------------------------------
# Attributes
# ---------------------------------------------------------------------------

def _fresh_slot(attr: AttributeDef) -> Slot:
    return Slot(attribute=attr.id,
                state="computed" if attr.derived else "unset")


def add_attribute(project: Project, class_id: str, name: str, type: TypeRef,
                  derived: bool = False,
                  derivation: Optional[str] = None) -> tuple[AttributeDef, MigrationSummary]:
    cls = project.require_class(class_id)
    _check_name(name, "attribute name")
    _check_feature_name_free(project, class_id, name)
    _valid_typeref(project, type)
    if derived != (derivation is not None):
        raise TypeMismatch("a derivation expression is required exactly when "
                           "the attribute is derived")

    def mutate():
        attr = AttributeDef(id=project.new_id(), name=name, type=type,
                            derived=derived)
        if derived:
            src, tree, descriptor = check_expression(project, class_id, derivation)
            want = project.descriptor(type)
            if not assignable(descriptor, want, project):
                raise TypeCheckError(
                    f"derivation has type {descriptor}, expected {want}")
            attr.derivation_src, attr.derivation_ast = src, tree
        cls.attributes.append(attr)
        project.invalidate()
        summary = MigrationSummary()
        for obj in project.objects.values():
            if project.conforms(obj.class_id, class_id):
                obj.slots[attr.id] = _fresh_slot(attr)
                summary.touched_objects += 1
                summary.added_slots += 1
        return attr, summary

    return _guarded(project, mutate)


def update_attribute(project: Project, attr_id: str,
                     rename: Optional[str] = None,
                     retype: Optional[TypeRef] = None,
                     set_derived: Optional[tuple] = None) -> MigrationSummary:
    """One change per call: rename, retype, or (derived, derivation) switch.
    Retyping coerces set slots only when lossless (Integer to Float);
    everything else clears to unset and lands in the summary."""
    hit = project.find_feature(attr_id)
    if hit is None or hit[2] != "attribute":
        raise UnknownElement(f"no attribute with id {attr_id!r}")
    cls, attr, _ = hit

    if rename is not None:
        rename_summary = rename_element(project, attr_id, rename)
        return MigrationSummary(rewritten=rename_summary.rewritten)

    if retype is not None:
        _valid_typeref(project, retype)

        def mutate():
            summary = MigrationSummary()
            attr.type = retype
            project.invalidate()
            for obj in project.objects.values():
                slot = obj.slots.get(attr_id)
                if slot is None:
                    continue
                if slot.state == "entered":
                    summary.touched_objects += 1
                    coerced = project.coerce_for_slot(slot.value, retype)
                    if coerced is None:
                        slot.state = "unset"
                        slot.value = None
                        summary.cleared.append((obj.id, attr_id))
                    elif coerced is not slot.value:
                        slot.value = coerced
                        summary.coerced.append((obj.id, attr_id))
                elif slot.state == "computed":
                    slot.value = None  # recomputed after the mutation
            return summary

        return _guarded(project, mutate)

    if set_derived is not None:
        derived, derivation = set_derived
        if derived != (derivation is not None):
            raise TypeMismatch("a derivation expression is required exactly "
                               "when the attribute is derived")

        def mutate():
            summary = MigrationSummary()
            if derived:
                src, tree, descriptor = check_expression(project, cls.id, derivation)
                want = project.descriptor(attr.type)
                if not assignable(descriptor, want, project):
                    raise TypeCheckError(
                        f"derivation has type {descriptor}, expected {want}")
                attr.derived = True
                attr.derivation_src, attr.derivation_ast = src, tree
            else:
                attr.derived = False
                attr.derivation_src = attr.derivation_ast = None
            project.invalidate()
            for obj in project.objects.values():
                slot = obj.slots.get(attr_id)
                if slot is None:
                    continue
                summary.touched_objects += 1
                if slot.state != "unset" and not derived:
                    summary.cleared.append((obj.id, attr_id))
                slot.state = "computed" if derived else "unset"
                slot.value = None
            return summary

        return _guarded(project, mutate)

    raise TypeMismatch("update_attribute needs rename, retype or set_derived")


def remove_attribute(project: Project, attr_id: str) -> MigrationSummary:
    hit = project.find_feature(attr_id)
    if hit is None or hit[2] != "attribute":
        raise UnknownElement(f"no attribute with id {attr_id!r}")
    cls, attr, _ = hit
    refs = _expression_references(
        project, lambda n: _nav_resolves_to(n, "attribute", attr_id))
    if refs:
        raise StillReferenced(
            f"attribute {attr.name!r} is still referenced", references=refs)

    def mutate():
        summary = MigrationSummary()
        cls.attributes.remove(attr)
        project.invalidate()
        for obj in project.objects.values():
            if attr_id in obj.slots:
                del obj.slots[attr_id]
                summary.touched_objects += 1
                summary.removed_slots += 1
        return summary

    return _guarded(project, mutate)


def _nav_resolves_to(node, kind: str, element_id: str) -> bool:
    return (isinstance(node, A.Nav) and node.resolved is not None
            and node.resolved[0] == kind and node.resolved[1] == element_id)


# ---------------------------------------------------------------------------
# Operations and constraints
# ---------------------------------------------------------------------------

def add_operation(project: Project, class_id: str, name: str,
                  params: list[tuple[str, TypeRef]], return_type: TypeRef,
                  body: str, monitored: bool = False) -> OperationDef:
    cls = project.require_class(class_id)
    _check_name(name, "operation name")
    _check_feature_name_free(project, class_id, name)
    if monitored and params:
        raise MonitoredWithParams(
            "monitored operations take no parameters: their value is "
            "recomputed on every state change")
    seen = set()
    for pname, ptype in params:
        _check_name(pname, "parameter name")
        if pname in seen:
            raise DuplicateFeature(f"duplicate parameter {pname!r}")
        seen.add(pname)
        _valid_typeref(project, ptype)
    _valid_typeref(project, return_type)
    op = OperationDef(id=project.new_id(), name=name,
                      params=[Param(n, t) for n, t in params],
                      return_type=return_type, body_src="", monitored=monitored)
    env = _op_param_env(project, op)
    src, tree, descriptor = check_expression(project, class_id, body, env)
    want = project.descriptor(return_type)
    if not assignable(descriptor, want, project):
        raise TypeCheckError(f"body has type {descriptor}, expected {want}")
    op.body_src, op.body_ast = src, tree
    cls.operations.append(op)
    project.invalidate()
    return op


def update_operation(project: Project, op_id: str,
                     body: Optional[str] = None,
                     return_type: Optional[TypeRef] = None,
                     params: Optional[list[tuple[str, TypeRef]]] = None,
                     monitored: Optional[bool] = None) -> OperationDef:
    hit = project.find_feature(op_id)
    if hit is None or hit[2] != "operation":
        raise UnknownElement(f"no operation with id {op_id!r}")
    cls, op, _ = hit

    def mutate():
        if params is not None:
            seen = set()
            for pname, ptype in params:
                _check_name(pname, "parameter name")
                if pname in seen:
                    raise DuplicateFeature(f"duplicate parameter {pname!r}")
                seen.add(pname)
                _valid_typeref(project, ptype)
            op.params = [Param(n, t) for n, t in params]
        if return_type is not None:
            _valid_typeref(project, return_type)
            op.return_type = return_type
        if monitored is not None:
            op.monitored = monitored
        if op.monitored and op.params:
            raise MonitoredWithParams(
                "monitored operations take no parameters")
        source = body if body is not None else op.body_src
        env = _op_param_env(project, op)
        src, tree, descriptor = check_expression(project, cls.id, source, env)
        want = project.descriptor(op.return_type)
        if not assignable(descriptor, want, project):
            raise TypeCheckError(f"body has type {descriptor}, expected {want}")
        op.body_src, op.body_ast = src, tree
        project.invalidate()
        return op

    return _guarded(project, mutate)


def remove_operation(project: Project, op_id: str):
    hit = project.find_feature(op_id)
    if hit is None or hit[2] != "operation":
        raise UnknownElement(f"no operation with id {op_id!r}")
    cls, op, _ = hit
    refs = _expression_references(
        project, lambda n: isinstance(n, A.OpCall) and n.resolved == ("operation", op_id))
    if refs:
        raise StillReferenced(f"operation {op.name!r} is still referenced",
                              references=refs)
    cls.operations.remove(op)
    project.invalidate()


def add_constraint(project: Project, class_id: str, name: str, body: str,
                   message: str) -> ConstraintDef:
    cls = project.require_class(class_id)
    _check_name(name, "constraint name")
    _check_feature_name_free(project, class_id, name)
    body_src, body_ast, body_type = check_expression(project, class_id, body)
    if body_type != td.BOOLEAN:
        raise TypeCheckError(f"constraint body must be Boolean, got {body_type}",
                             reason="NonBooleanConstraint")
    msg_src, msg_ast, msg_type = check_expression(project, class_id, message)
    if msg_type != td.STRING:
        raise TypeCheckError(f"constraint message must be String, got {msg_type}")
    con = ConstraintDef(id=project.new_id(), name=name, body_src=body_src,
                        message_src=msg_src, body_ast=body_ast,
                        message_ast=msg_ast)
    cls.constraints.append(con)
    project.invalidate()
    return con


def update_constraint(project: Project, constraint_id: str,
                      body: Optional[str] = None,
                      message: Optional[str] = None) -> ConstraintDef:
    hit = project.find_feature(constraint_id)
    if hit is None or hit[2] != "constraint":
        raise UnknownElement(f"no constraint with id {constraint_id!r}")
    cls, con, _ = hit
    if body is not None:
        src, tree, descriptor = check_expression(project, cls.id, body)
        if descriptor != td.BOOLEAN:
            raise TypeCheckError(
                f"constraint body must be Boolean, got {descriptor}",
                reason="NonBooleanConstraint")
        con.body_src, con.body_ast = src, tree
    if message is not None:
        src, tree, descriptor = check_expression(project, cls.id, message)
        if descriptor != td.STRING:
            raise TypeCheckError(
                f"constraint message must be String, got {descriptor}")
        con.message_src, con.message_ast = src, tree
    return con


def remove_constraint(project: Project, constraint_id: str):
    hit = project.find_feature(constraint_id)
    if hit is None or hit[2] != "constraint":
        raise UnknownElement(f"no constraint with id {constraint_id!r}")
    cls, con, _ = hit
    cls.constraints.remove(con)
    project.invalidate()


# ---------------------------------------------------------------------------
# Delegations
# ---------------------------------------------------------------------------

def declare_delegation(project: Project, class_id: str, name: str,
                       target_class_id: str) -> DelegationDef:
    project.require_class(class_id)
    target = project.classes.get(target_class_id)
    if target is None:
        raise UnknownClass(f"no class with id {target_class_id!r}")
    _check_name(name, "delegation name")
    _check_feature_name_free(project, class_id, name)
    if _delegation_reaches(project, target_class_id, class_id):
        raise DelegationCycle(
            f"delegating to {target.name!r} would close a class-level cycle")

    def mutate():
        dele = DelegationDef(id=project.new_id(), name=name,
                             target=target_class_id)
        project.require_class(class_id).delegations.append(dele)
        project.invalidate()
        return dele

    return _guarded(project, mutate)


def _delegation_reaches(project: Project, start: str, goal: str) -> bool:
    """True when ``goal`` (or a subclass, which inherits its delegations) is
    reachable from ``start`` along effective delegation target edges."""
    seen = set()
    frontier = [start]
    while frontier:
        current = frontier.pop()
        if current in seen:
            continue
        seen.add(current)
        if project.conforms(current, goal):
            return True
        for cls in project.superclass_chain(current):
            for dele in cls.delegations:
                frontier.append(dele.target)
    return False


def update_delegation(project: Project, delegation_id: str,
                      target: str) -> DelegationDef:
    hit = project.find_feature(delegation_id)
    if hit is None or hit[2] != "delegation":
        raise UnknownElement(f"no delegation with id {delegation_id!r}")
    cls, dele, _ = hit
    new_target = project.classes.get(target)
    if new_target is None:
        raise UnknownClass(f"no class with id {target!r}")

    def mutate():
        dele.target = target
        project.invalidate()
        if _delegation_reaches(project, target, cls.id):
            raise DelegationCycle("retargeting would close a class-level cycle")
        for obj in project.objects.values():
            bound = obj.delegates.get(dele.name)
            if bound is None:
                continue
            if not project.conforms(project.require_object(bound).class_id, target):
                raise NonConformingDelegate(
                    f"existing binding on '{obj.name}' does not conform to "
                    f"the new target; unbind it first")
        return dele

    return _guarded(project, mutate)


def remove_delegation(project: Project, delegation_id: str) -> MigrationSummary:
    hit = project.find_feature(delegation_id)
    if hit is None or hit[2] != "delegation":
        raise UnknownElement(f"no delegation with id {delegation_id!r}")
    cls, dele, _ = hit
    refs = _expression_references(
        project, lambda n: _nav_resolves_to(n, "delegation", delegation_id))
    if refs:
        raise StillReferenced(f"delegation {dele.name!r} is still referenced",
                              references=refs)

    def mutate():
        summary = MigrationSummary()
        cls.delegations.remove(dele)
        project.invalidate()
        for obj in project.objects.values():
            if (dele.name in obj.delegates
                    and project.find_effective_delegation(obj.class_id, dele.name) is None):
                del obj.delegates[dele.name]
                summary.unbound.append((obj.id, dele.name))
        return summary

    try:
        return _guarded(project, mutate)
    except TypeCheckError as exc:
        # an expression resolved through this delegation's fall-through
        raise StillReferenced(
            f"delegation {dele.name!r} is still needed: {exc.message}",
            references=[exc.message]) from exc


# ---------------------------------------------------------------------------
# Associations, enumerations
# ---------------------------------------------------------------------------

def _check_role_free(project: Project, assoc: AssociationDef | None,
                     end_index: int, role: str, other_role: str,
                     near_class: str | None = None):
    """The role must not collide with any effective feature (attributes
    foremost, but also navigable delegation names) or other roles visible
    from the opposite-end class or any of its subclasses."""
    if role == other_role:
        raise RoleCollision(f"both ends would be named {role!r}")
    if near_class is None:
        near_class = assoc.ends[1 - end_index].class_id
    for cls in _subtree(project, near_class):
        if role in project.effective_feature_names(cls.id):
            raise RoleCollision(
                f"role {role!r} collides with a feature of {cls.name}",
                role=role)
        for other, far in project.visible_roles(cls.id):
            if assoc is not None and other.id == assoc.id and far == end_index:
                continue
            if other.ends[far].role == role:
                raise RoleCollision(
                    f"role {role!r} is already navigable from {cls.name}",
                    role=role)


def create_association(project: Project, name: str,
                       end1: tuple[str, str, Multiplicity],
                       end2: tuple[str, str, Multiplicity]) -> AssociationDef:
    _check_name(name, "association name")
    if any(a.name == name for a in project.associations.values()):
        raise NameTaken(f"an association named {name!r} exists", name=name)
    for class_id, role, _mult in (end1, end2):
        project.require_class(class_id)
        _check_name(role, "role")
    _check_role_free(project, None, 0, end1[1], other_role=end2[1],
                     near_class=end2[0])
    _check_role_free(project, None, 1, end2[1], other_role=end1[1],
                     near_class=end1[0])

    def mutate():
        assoc = AssociationDef(
            id=project.new_id(), name=name,
            ends=(AssociationEnd(end1[0], end1[1], end1[2]),
                  AssociationEnd(end2[0], end2[1], end2[2])))
        project.associations[assoc.id] = assoc
        return assoc

    return _guarded(project, mutate)


def create_enumeration(project: Project, name: str,
                       literals: list[str]) -> EnumerationDef:
    _check_name(name, "enumeration name")
    _check_namespace_free(project, name)
    if not literals:
        raise EmptyEnumeration("an enumeration needs at least one literal")
    seen = set()
    for lit in literals:
        _check_name(lit, "literal")
        if lit in seen:
            raise DuplicateLiteral(f"duplicate literal {lit!r}", literal=lit)
        seen.add(lit)
    enum = EnumerationDef(id=project.new_id(), name=name,
                          literals=list(literals))
    project.enumerations[enum.id] = enum
    return enum


# ---------------------------------------------------------------------------
# Objects, slots, delegates, links
# ---------------------------------------------------------------------------

def instantiate(project: Project, class_id: str, object_name: str) -> ObjectInst:
    cls = project.require_class(class_id)
    if cls.abstract:
        raise AbstractClass(f"{cls.name!r} is abstract and cannot be "
                            f"instantiated")
    _check_name(object_name, "object name")
    _check_namespace_free(project, object_name)
    obj = ObjectInst(id=project.new_id(), name=object_name, class_id=class_id)
    for attr in project.effective_attributes(class_id):
        obj.slots[attr.id] = _fresh_slot(attr)
    project.objects[obj.id] = obj
    return obj


def remove_object(project: Project, object_id: str) -> MigrationSummary:
    obj = project.require_object(object_id)
    summary = MigrationSummary()
    for link in list(project.links.values()):
        if object_id in (link.end1, link.end2):
            del project.links[link.id]
            summary.removed_links.append(link.id)
    for other in project.objects.values():
        if other.id == object_id:
            continue
        for name, target in list(other.delegates.items()):
            if target == object_id:
                del other.delegates[name]
                summary.unbound.append((other.id, name))
        for slot in other.slots.values():
            if isinstance(slot.value, ObjectRef) and slot.value.object_id == object_id:
                slot.state = "unset"
                slot.value = None
                summary.cleared.append((other.id, slot.attribute))
    del project.objects[object_id]
    summary.touched_objects = 1
    return summary


CLEAR = object()  # sentinel: set_slot action "clear"


def set_slot(project: Project, object_id: str, attribute_name: str, value):
    """``value`` is a runtime value, or CLEAR to reset the slot to unset."""
    obj = project.require_object(object_id)
    attr = project.find_effective_attribute(obj.class_id, attribute_name)
    if attr is None:
        raise UnknownFeature(
            f"'{project.require_class(obj.class_id).name}' has no attribute "
            f"{attribute_name!r}", name=attribute_name)
    if attr.derived:
        raise DerivedSlotWriteForbidden(
            f"slot {attribute_name!r} is computed; its value cannot be "
            f"entered")
    slot = obj.slots[attr.id]
    if value is CLEAR:
        slot.state = "unset"
        slot.value = None
        return
    stored = project.coerce_for_slot(value, attr.type)
    if stored is None:
        raise TypeMismatch(
            f"value does not match the type of {attribute_name!r}",
            attribute=attribute_name)
    slot.state = "entered"
    slot.value = stored


def set_delegate(project: Project, object_id: str, delegation_name: str,
                 target: Optional[str]):
    obj = project.require_object(object_id)
    dele = project.find_effective_delegation(obj.class_id, delegation_name)
    if dele is None:
        raise UnknownFeature(
            f"'{project.require_class(obj.class_id).name}' declares no "
            f"delegation {delegation_name!r}", name=delegation_name)
    if target is None:
        obj.delegates.pop(delegation_name, None)
        return
    target_obj = project.require_object(target)
    if not project.conforms(target_obj.class_id, dele.target):
        raise NonConformingDelegate(
            f"'{target_obj.name}' is not an instance of the delegation's "
            f"target class")
    # would the binding close a cycle over bound delegates?
    frontier = [target]
    seen = set()
    while frontier:
        current = frontier.pop()
        if current == object_id:
            raise DelegateCycle(
                f"binding '{obj.name}.{delegation_name}' would close a "
                f"delegate cycle")
        node = project.objects.get(current)
        if node is None:
            continue
        for nxt in node.delegates.values():
            if nxt is not None and nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    obj.delegates[delegation_name] = target


def create_link(project: Project, association_id: str, obj1: str,
                obj2: str) -> Link:
    assoc = project.associations.get(association_id)
    if assoc is None:
        raise UnknownElement(f"no association with id {association_id!r}")
    o1 = project.require_object(obj1)
    o2 = project.require_object(obj2)
    if not project.conforms(o1.class_id, assoc.ends[0].class_id):
        raise EndTypeMismatch(
            f"'{o1.name}' does not conform to end '{assoc.ends[0].role}'")
    if not project.conforms(o2.class_id, assoc.ends[1].class_id):
        raise EndTypeMismatch(
            f"'{o2.name}' does not conform to end '{assoc.ends[1].role}'")
    for link in project.links.values():
        if (link.association == association_id and link.end1 == obj1
                and link.end2 == obj2):
            raise DuplicateLink(
                f"'{o1.name}' and '{o2.name}' are already linked over "
                f"'{assoc.name}'")
    link = Link(id=project.new_id(), association=association_id,
                end1=obj1, end2=obj2)
    project.links[link.id] = link
    return link


def remove_link(project: Project, link_id: str):
    if link_id not in project.links:
        raise UnknownElement(f"no link with id {link_id!r}")
    del project.links[link_id]


# ---------------------------------------------------------------------------
# Palette
# ---------------------------------------------------------------------------

def palette(project: Project) -> list[tuple[str, str]]:
    """Instantiable classes in definition order; abstract ones never appear."""
    return [(c.id, c.name) for c in project.classes.values() if not c.abstract]
