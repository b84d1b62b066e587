"""Execution semantics.

Feature resolution with delegation fall-through, operation invocation with
``self`` pinned to the receiver, derived-slot recomputation with a cycle
guard, and the full evaluation sweep that turns a project state into a
violation report plus a monitored-operation snapshot.

The sweep is deterministic: objects in creation order, features in effective
declaration order (root superclass first). ``after_mutation`` is literally a
recompute followed by ``full_report``, so the piggybacked report can never
drift from a from-scratch sweep.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Optional

from umlpp.errors import ArityMismatch, TypeMismatch, UnknownFeature
from umlpp.lang.evaluate import (
    DEFAULT_MAX_DEPTH,
    EvalContext,
    EvalResult,
    Undefined,
    evaluate,
    is_undefined,
)
from umlpp.model import ObjectInst, Project
from umlpp.values import ObjectRef

CYCLE_REASON = "derived dependency cycle"
RECURSION_REASON = "recursion limit exceeded"

# an engine depth of 256 costs several interpreter frames per hop; leave room
sys.setrecursionlimit(max(sys.getrecursionlimit(), 4000))

_NOT_FOUND = object()


def safe_evaluate(tree, ctx: EvalContext) -> EvalResult:
    """evaluate(), with interpreter stack exhaustion folded into the same
    Undefined the engine's own depth cap produces."""
    try:
        return evaluate(tree, ctx)
    except RecursionError:
        return Undefined(RECURSION_REASON)


# ---------------------------------------------------------------------------
# Feature resolution
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class FeatureResolution:
    name: str
    kind: str  # attribute | operation
    found: bool
    owner: Optional[str] = None  # owning class id
    via: Optional[str] = None    # own | inherited | delegate
    path: tuple[str, ...] = ()   # delegate objects walked, in hop order
    diagnostic: Optional[str] = None


def resolve_feature(project: Project, object_id: str, name: str,
                    kind: str = "attribute") -> FeatureResolution:
    """Lookup order: own class, superclass chain, then each declared
    delegation in declaration order (recursively through the bound delegate).
    First match wins."""
    obj = project.require_object(object_id)
    return _resolve(project, obj, name, kind, visited=set())


def _resolve(project: Project, obj: ObjectInst, name: str, kind: str,
             visited: set) -> FeatureResolution:
    for cls in project.superclass_chain(obj.class_id):
        features = cls.attributes if kind == "attribute" else cls.operations
        for f in features:
            if f.name == name:
                via = "own" if cls.id == obj.class_id else "inherited"
                return FeatureResolution(name, kind, True, owner=cls.id, via=via)
    visited.add(obj.id)
    unbound: list[str] = []
    for dele in project.effective_delegations(obj.class_id):
        target_id = obj.delegates.get(dele.name)
        if target_id is None:
            unbound.append(dele.name)
            continue
        if target_id in visited:
            continue
        delegate = project.objects.get(target_id)
        if delegate is None:
            continue
        inner = _resolve(project, delegate, name, kind, visited)
        if inner.found:
            return FeatureResolution(name, kind, True, owner=inner.owner,
                                     via="delegate",
                                     path=(delegate.id, *inner.path))
    diagnostic = None
    if unbound:
        diagnostic = (f"'{name}' unresolved: delegation "
                      f"'{unbound[0]}' is unbound")
    return FeatureResolution(name, kind, False, diagnostic=diagnostic)


# ---------------------------------------------------------------------------
# Evaluation hooks
# ---------------------------------------------------------------------------

class _Resolver:
    """navigate/call hooks for EvalContext. When a recompute is in flight,
    stale derived slots are computed on demand with an active-set guard."""

    def __init__(self, project: Project, recompute: "_RecomputeState | None" = None,
                 max_depth: int = DEFAULT_MAX_DEPTH):
        self.project = project
        self.recompute = recompute
        self.max_depth = max_depth

    def context(self, self_id: Optional[str], variables=None, depth: int = 0) -> EvalContext:
        return EvalContext(project=self.project, self_id=self_id,
                           navigate=self.navigate, call=self.call,
                           vars=dict(variables or {}), depth=depth,
                           max_depth=self.max_depth)

    # -- attribute / role / delegate navigation -----------------------------

    def navigate(self, ctx: EvalContext, object_id: str, name: str) -> EvalResult:
        obj = self.project.objects.get(object_id)
        if obj is None:
            return Undefined(f"unknown object '{object_id}'")
        result = self._navigate(ctx, obj, name, visited=set())
        if result is _NOT_FOUND:
            cls = self.project.classes.get(obj.class_id)
            unbound = self._first_unbound(obj, name)
            if unbound:
                return Undefined(f"'{name}' unresolved on '{obj.name}': "
                                 f"delegation '{unbound}' is unbound")
            return Undefined(f"'{cls.name if cls else obj.class_id}' has no "
                             f"feature '{name}'")
        return result

    def _first_unbound(self, obj: ObjectInst, name: str) -> Optional[str]:
        for dele in self.project.effective_delegations(obj.class_id):
            if obj.delegates.get(dele.name) is None:
                return dele.name
        return None

    def _navigate(self, ctx: EvalContext, obj: ObjectInst, name: str, visited: set):
        p = self.project
        attr = p.find_effective_attribute(obj.class_id, name)
        if attr is not None:
            return self._read_slot(ctx, obj, attr)
        hit = p.find_role(obj.class_id, name)
        if hit is not None:
            assoc, far = hit
            partners = p.link_partners(obj.id, assoc, far)
            end = assoc.ends[far]
            if end.multiplicity.upper is not None and end.multiplicity.upper <= 1:
                if not partners:
                    return Undefined(f"no link for role '{name}' on '{obj.name}'")
                return ObjectRef(partners[0])
            return tuple(ObjectRef(x) for x in partners)
        dele = p.find_effective_delegation(obj.class_id, name)
        if dele is not None:
            target_id = obj.delegates.get(dele.name)
            if target_id is None:
                return Undefined(f"delegate '{name}' of '{obj.name}' is unbound")
            return ObjectRef(target_id)
        visited.add(obj.id)
        for d in p.effective_delegations(obj.class_id):
            target_id = obj.delegates.get(d.name)
            if target_id is None or target_id in visited:
                continue
            delegate = p.objects.get(target_id)
            if delegate is None:
                continue
            inner = self._navigate(ctx, delegate, name, visited)
            if inner is not _NOT_FOUND:
                return inner
        return _NOT_FOUND

    def _read_slot(self, ctx: EvalContext, obj: ObjectInst, attr) -> EvalResult:
        slot = obj.slots.get(attr.id)
        if slot is None:
            return Undefined(f"missing slot '{attr.name}' on '{obj.name}'")
        if slot.state == "unset":
            return Undefined(f"unset slot '{attr.name}' on '{obj.name}'")
        if slot.state == "computed":
            if self.recompute is not None:
                return self.recompute.ensure(self, obj, attr, ctx.depth)
            if slot.value is None:
                return Undefined(f"derived slot '{attr.name}' on '{obj.name}' "
                                 f"has not been computed")
            return slot.value
        return slot.value

    # -- operation calls -----------------------------------------------------

    def call(self, ctx: EvalContext, object_id: str, op_name: str,
             args: list) -> EvalResult:
        p = self.project
        obj = p.objects.get(object_id)
        if obj is None:
            return Undefined(f"unknown object '{object_id}'")
        resolution = resolve_feature(p, object_id, op_name, "operation")
        if not resolution.found:
            return Undefined(resolution.diagnostic
                             or f"no operation '{op_name}' on '{obj.name}'")
        owner = p.require_class(resolution.owner)
        op = next(o for o in owner.operations if o.name == op_name)
        if ctx.depth + 1 > ctx.max_depth:
            return Undefined(RECURSION_REASON)
        # self stays the receiver: delegation rebinds lookup, not self
        child = self.context(object_id,
                             {param.name: value
                              for param, value in zip(op.params, args)},
                             depth=ctx.depth + 1)
        return safe_evaluate(op.body_ast, child)


@dataclass(slots=True)
class _RecomputeState:
    fresh: set = field(default_factory=set)
    active: set = field(default_factory=set)
    updates: list = field(default_factory=list)

    def ensure(self, resolver: _Resolver, obj: ObjectInst, attr, depth: int) -> EvalResult:
        key = (obj.id, attr.id)
        if key in self.fresh:
            return obj.slots[attr.id].value
        if key in self.active:
            return Undefined(f"{CYCLE_REASON} at '{obj.name}.{attr.name}'")
        if depth + 1 > resolver.max_depth:
            return Undefined(RECURSION_REASON)
        self.active.add(key)
        try:
            ctx = resolver.context(obj.id, depth=depth + 1)
            result = safe_evaluate(attr.derivation_ast, ctx)
        finally:
            self.active.discard(key)
        slot = obj.slots[attr.id]
        old = slot.value
        slot.value = result
        self.fresh.add(key)
        if old != result:
            self.updates.append((obj.id, attr.id, result))
        return result


# ---------------------------------------------------------------------------
# Public evaluation entry points
# ---------------------------------------------------------------------------

def make_context(project: Project, self_id: Optional[str] = None,
                 variables=None, max_depth: int = DEFAULT_MAX_DEPTH) -> EvalContext:
    return _Resolver(project, max_depth=max_depth).context(self_id, variables)


def invoke(project: Project, object_id: str, op_name: str, args: list,
           max_depth: int = DEFAULT_MAX_DEPTH) -> EvalResult:
    """Run an operation by user request. Unlike expression evaluation this
    validates the call shape and raises; the body itself still evaluates to
    a value or Undefined."""
    obj = project.require_object(object_id)
    resolution = resolve_feature(project, object_id, op_name, "operation")
    if not resolution.found:
        raise UnknownFeature(
            resolution.diagnostic or f"'{obj.name}' has no operation '{op_name}'",
            object=object_id, operation=op_name)
    owner = project.require_class(resolution.owner)
    op = next(o for o in owner.operations if o.name == op_name)
    if len(args) != len(op.params):
        raise ArityMismatch(
            f"{op_name}() takes {len(op.params)} argument(s) "
            f"({', '.join(p.name for p in op.params)}), got {len(args)}",
            expected=[p.name for p in op.params])
    coerced = []
    for param, value in zip(op.params, args):
        stored = project.coerce_for_slot(value, param.type)
        if stored is None:
            raise TypeMismatch(f"argument {param.name!r} does not match its "
                               f"declared type", param=param.name)
        coerced.append(stored)
    resolver = _Resolver(project, max_depth=max_depth)
    ctx = resolver.context(object_id,
                           {p.name: v for p, v in zip(op.params, coerced)})
    return safe_evaluate(op.body_ast, ctx)


def recompute_derived(project: Project,
                      max_depth: int = DEFAULT_MAX_DEPTH) -> list:
    """Recompute every derived slot. Dependencies resolve on demand; cycles
    terminate with an Undefined cache entry instead of oscillating. Returns
    (object id, attribute id, result) for every slot whose cache changed."""
    state = _RecomputeState()
    resolver = _Resolver(project, recompute=state, max_depth=max_depth)
    for obj in project.objects.values():
        for attr in project.effective_attributes(obj.class_id):
            if attr.derived and attr.id in obj.slots:
                state.ensure(resolver, obj, attr, depth=0)
    return state.updates


# ---------------------------------------------------------------------------
# Violation report and monitor snapshot
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class MutationTransaction:
    """One committed kernel mutation: what ran and the revision it made."""
    op: str
    arguments: str = ""
    revision: int = 0


@dataclass(frozen=True, slots=True)
class Source:
    kind: str  # constraint | multiplicity | conformance
    constraint: Optional[str] = None      # constraint id
    association: Optional[str] = None     # association id
    end: Optional[str] = None             # role name of the checked end
    conformance: Optional[str] = None     # finding kind


@dataclass(frozen=True, slots=True)
class Violation:
    object: str
    source: Source
    status: str  # violated | not-evaluable
    message: str


@dataclass(frozen=True, slots=True)
class ViolationReport:
    revision: int
    entries: tuple[Violation, ...]


@dataclass(frozen=True, slots=True)
class MonitorEntry:
    object: str
    operation: str  # operation id
    result: EvalResult


@dataclass(frozen=True, slots=True)
class MonitorSnapshot:
    entries: tuple[MonitorEntry, ...]


def check_conformance(project: Project, object_id: str) -> list[Violation]:
    """Structural validity of one object. The kernel maintains all of this;
    findings can only appear for hand-edited documents, which makes this the
    load-time validator."""
    obj = project.require_object(object_id)
    findings: list[Violation] = []

    def finding(kind: str, message: str):
        findings.append(Violation(obj.id, Source("conformance", conformance=kind),
                                  "violated", message))

    cls = project.classes.get(obj.class_id)
    if cls is None:
        finding("unknown-class", f"'{obj.name}' instantiates missing class "
                                 f"'{obj.class_id}'")
        return findings
    if cls.abstract:
        finding("abstract-class", f"'{obj.name}' instantiates abstract class "
                                  f"'{cls.name}'")
    effective = {a.id: a for a in project.effective_attributes(obj.class_id)}
    for attr_id in obj.slots:
        if attr_id not in effective:
            finding("orphan-slot", f"'{obj.name}' has a slot for unknown "
                                   f"attribute '{attr_id}'")
    for attr_id, attr in effective.items():
        slot = obj.slots.get(attr_id)
        if slot is None:
            finding("missing-slot", f"'{obj.name}' lacks a slot for "
                                    f"'{attr.name}'")
            continue
        if attr.derived and slot.state == "entered":
            finding("slot-state", f"derived slot '{attr.name}' on '{obj.name}' "
                                  f"holds an entered value")
        if not attr.derived and slot.state == "computed":
            finding("slot-state", f"slot '{attr.name}' on '{obj.name}' is "
                                  f"marked computed but the attribute is not "
                                  f"derived")
        if slot.state == "entered" and not project.value_matches(slot.value, attr.type):
            finding("type", f"slot '{attr.name}' on '{obj.name}' holds a value "
                            f"of the wrong type")
    declared = {d.name: d for d in project.effective_delegations(obj.class_id)}
    for name, target_id in obj.delegates.items():
        dele = declared.get(name)
        if dele is None:
            finding("delegate-unknown", f"'{obj.name}' binds undeclared "
                                        f"delegation '{name}'")
            continue
        if target_id is None:
            continue
        target = project.objects.get(target_id)
        if target is None:
            finding("delegate-missing", f"delegate '{name}' of '{obj.name}' "
                                        f"references missing object "
                                        f"'{target_id}'")
        elif not project.conforms(target.class_id, dele.target):
            finding("delegate-nonconforming",
                    f"delegate '{name}' of '{obj.name}' does not conform to "
                    f"its target class")
    if _delegate_cycle(project, obj):
        finding("delegate-cycle", f"'{obj.name}' participates in a delegate "
                                  f"cycle")
    return findings


def _delegate_cycle(project: Project, obj: ObjectInst) -> bool:
    seen = set()
    frontier = [obj.id]
    while frontier:
        current = frontier.pop()
        node = project.objects.get(current)
        if node is None:
            continue
        for target in node.delegates.values():
            if target is None:
                continue
            if target == obj.id:
                return True
            if target not in seen:
                seen.add(target)
                frontier.append(target)
    return False


def check_multiplicities(project: Project) -> list[Violation]:
    """Every object against every association end whose opposite end accepts
    the object's class: lower <= link count <= upper."""
    findings: list[Violation] = []
    for obj in project.objects.values():
        findings.extend(_multiplicities_for(project, obj))
    return findings


def _multiplicities_for(project: Project, obj: ObjectInst) -> list[Violation]:
    findings = []
    for assoc in project.associations.values():
        for far in (1, 0):
            near = 1 - far
            if not project.conforms(obj.class_id, assoc.ends[near].class_id):
                continue
            end = assoc.ends[far]
            count = len(project.link_partners(obj.id, assoc, far))
            if not end.multiplicity.admits(count):
                findings.append(Violation(
                    obj.id,
                    Source("multiplicity", association=assoc.id, end=end.role),
                    "violated",
                    f"role '{end.role}': expected {end.multiplicity} link(s), "
                    f"found {count}"))
    return findings


def _derived_failures(project: Project, obj: ObjectInst) -> list[Violation]:
    findings = []
    for attr in project.effective_attributes(obj.class_id):
        if not attr.derived:
            continue
        slot = obj.slots.get(attr.id)
        if slot is None or not is_undefined(slot.value):
            continue
        reason = slot.value.reason
        if reason.startswith(CYCLE_REASON) or reason.startswith(RECURSION_REASON):
            findings.append(Violation(
                obj.id, Source("conformance", conformance="derived-slot"),
                "not-evaluable", f"derived slot '{attr.name}': {reason}"))
    return findings


def full_report(project: Project, revision: int = 0,
                max_depth: int = DEFAULT_MAX_DEPTH) -> tuple[ViolationReport, MonitorSnapshot]:
    """From-scratch deterministic sweep over the whole project: conformance,
    derived-slot failures, constraints with custom messages, multiplicities,
    and all monitored operation values."""
    resolver = _Resolver(project, max_depth=max_depth)
    entries: list[Violation] = []
    monitors: list[MonitorEntry] = []
    for obj in project.objects.values():
        entries.extend(check_conformance(project, obj.id))
        entries.extend(_derived_failures(project, obj))
        for con in project.effective_constraints(obj.class_id):
            ctx = resolver.context(obj.id)
            outcome = safe_evaluate(con.body_ast, ctx)
            if outcome is True:
                continue
            source = Source("constraint", constraint=con.id)
            if is_undefined(outcome):
                entries.append(Violation(obj.id, source, "not-evaluable",
                                         outcome.reason))
                continue
            message = safe_evaluate(con.message_ast, resolver.context(obj.id))
            if is_undefined(message) or not isinstance(message, str):
                message = con.name  # fallback when the message itself fails
            entries.append(Violation(obj.id, source, "violated", message))
        entries.extend(_multiplicities_for(project, obj))
        for op in project.effective_operations(obj.class_id):
            if op.monitored:
                result = safe_evaluate(op.body_ast, resolver.context(obj.id))
                monitors.append(MonitorEntry(obj.id, op.id, result))
    return (ViolationReport(revision, tuple(entries)),
            MonitorSnapshot(tuple(monitors)))


def after_mutation(project: Project, txn: "MutationTransaction | int",
                   max_depth: int = DEFAULT_MAX_DEPTH) -> tuple[ViolationReport, MonitorSnapshot]:
    """Post-mutation hook: refresh derived slots, then sweep. The result is
    identical to calling full_report on the same state. ``txn`` is the
    committed transaction (or just its revision number)."""
    revision = txn.revision if isinstance(txn, MutationTransaction) else txn
    recompute_derived(project, max_depth)
    return full_report(project, revision, max_depth)
