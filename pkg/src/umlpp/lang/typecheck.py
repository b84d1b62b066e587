"""Static type checker.

Resolves navigation and call names against a project snapshot and annotates
the tree: every node gets a ``type`` descriptor, navigation and call nodes
additionally record what they resolved to (attribute/role/delegation ids).
Those annotations drive rename rewriting and the evaluator's dispatch.

Feature lookup mirrors runtime resolution: own effective attributes, then
visible association roles, then delegation names, then the features of
delegation target classes (typed optimistically, since a delegate may or may
not be bound at run time).
"""

from __future__ import annotations

from umlpp.errors import TypeCheckError
from umlpp.lang import ast
from umlpp.lang import types as td


def _err(msg: str, node: ast.Expr, reason: str = "TypeError"):
    raise TypeCheckError(msg, reason=reason, span=node.span)


def assignable(value: td.TypeDescriptor, target: td.TypeDescriptor, project) -> bool:
    if value == target:
        return True
    if value == td.INTEGER and target == td.FLOAT:
        return True
    if value.kind == "Object" and target.kind == "Object":
        return project.conforms(value.ref, target.ref)
    if value.kind == "Collection" and target.kind == "Collection":
        return assignable(value.elem, target.elem, project)
    return False


def _comparable(a: td.TypeDescriptor, b: td.TypeDescriptor, project) -> bool:
    if td.is_numeric(a) and td.is_numeric(b):
        return True
    if a.kind != b.kind:
        return False
    if a.kind == "Object":
        return True  # identity comparison across any object types
    if a.kind == "Enum":
        return a.ref == b.ref
    if a.kind == "Collection":
        return _comparable(a.elem, b.elem, project)
    return True


def _unify(a: td.TypeDescriptor, b: td.TypeDescriptor, project, node) -> td.TypeDescriptor:
    if a == b:
        return a
    if td.is_numeric(a) and td.is_numeric(b):
        return td.FLOAT
    if a.kind == "Object" and b.kind == "Object":
        for cls in project.superclass_chain(a.ref):
            if project.conforms(b.ref, cls.id):
                return td.object_type(cls.id)
    if a.kind == "Collection" and b.kind == "Collection":
        return td.collection(_unify(a.elem, b.elem, project, node))
    _err(f"branches have incompatible types {a} and {b}", node, "OperandMismatch")


class Checker:
    def __init__(self, project, context_class_id: str, param_env=None):
        self.project = project
        self.context_class = context_class_id
        self.env: dict[str, td.TypeDescriptor] = dict(param_env or {})

    # -- feature lookup ----------------------------------------------------

    def resolve_nav(self, class_id: str, name: str, visited=None):
        """Returns (resolution tuple, descriptor) or None.

        Resolution tuples: ("attribute", attr_id), ("role", assoc_id, far),
        ("delegation", delegation_id).
        """
        p = self.project
        attr = p.find_effective_attribute(class_id, name)
        if attr is not None:
            return ("attribute", attr.id), p.descriptor(attr.type)
        role = p.find_role(class_id, name)
        if role is not None:
            assoc, far = role
            end = assoc.ends[far]
            target = td.object_type(end.class_id)
            if end.multiplicity.upper is not None and end.multiplicity.upper <= 1:
                return ("role", assoc.id, far), target
            return ("role", assoc.id, far), td.collection(target)
        dele = p.find_effective_delegation(class_id, name)
        if dele is not None:
            return ("delegation", dele.id), td.object_type(dele.target)
        # fall through into delegation targets, optimistically
        if visited is None:
            visited = set()
        if class_id in visited:
            return None
        visited.add(class_id)
        for d in p.effective_delegations(class_id):
            hit = self.resolve_nav(d.target, name, visited)
            if hit is not None:
                return hit
        return None

    def resolve_operation(self, class_id: str, name: str, visited=None):
        p = self.project
        op = p.find_effective_operation(class_id, name)
        if op is not None:
            return op
        if visited is None:
            visited = set()
        if class_id in visited:
            return None
        visited.add(class_id)
        for d in p.effective_delegations(class_id):
            hit = self.resolve_operation(d.target, name, visited)
            if hit is not None:
                return hit
        return None

    # -- checking ------------------------------------------------------------

    def check(self, e: ast.Expr) -> td.TypeDescriptor:
        t = self._check(e)
        e.type = t
        return t

    def _check(self, e: ast.Expr) -> td.TypeDescriptor:
        p = self.project
        if isinstance(e, ast.IntLit):
            return td.INTEGER
        if isinstance(e, ast.FloatLit):
            return td.FLOAT
        if isinstance(e, ast.StringLit):
            return td.STRING
        if isinstance(e, ast.BoolLit):
            return td.BOOLEAN
        if isinstance(e, ast.DateLit):
            return td.DATE
        if isinstance(e, ast.MoneyLit):
            return td.MONETARY
        if isinstance(e, ast.EnumLit):
            enum = p.enum_by_name(e.enum_name)
            if enum is None:
                _err(f"unknown enumeration {e.enum_name!r}", e, "UnknownEnum")
            if e.literal not in enum.literals:
                _err(f"{e.literal!r} is not a literal of {e.enum_name}", e,
                     "UnknownLiteral")
            e.enum_id = enum.id
            return td.enum_type(enum.id)
        if isinstance(e, ast.SelfRef):
            return td.object_type(self.context_class)
        if isinstance(e, ast.VarRef):
            t = self.env.get(e.name)
            if t is None:
                if p.class_by_name(e.name) is not None:
                    _err(f"class {e.name!r} used as a value; "
                         f"did you mean {e.name}.allInstances()?", e,
                         "UnknownVariable")
                _err(f"unknown variable {e.name!r}", e, "UnknownVariable")
            return t
        if isinstance(e, ast.Nav):
            target = self.check(e.target)
            if target.kind != "Object":
                _err(f"cannot navigate {e.name!r} on {target}", e, "NotAnObject")
            hit = self.resolve_nav(target.ref, e.name)
            if hit is None:
                cls = p.require_class(target.ref)
                _err(f"{cls.name} has no feature {e.name!r}", e, "UnknownFeature")
            e.resolved, t = hit
            return t
        if isinstance(e, ast.ExtentCall):
            cls = p.class_by_name(e.class_name)
            if cls is None:
                _err(f"unknown class {e.class_name!r}", e, "UnknownClass")
            e.class_id = cls.id
            return td.collection(td.object_type(cls.id))
        if isinstance(e, ast.OpCall):
            return self._check_opcall(e)
        if isinstance(e, ast.Unary):
            t = self.check(e.operand)
            if e.op == "not":
                if t != td.BOOLEAN:
                    _err(f"'not' needs a Boolean, got {t}", e, "OperandMismatch")
                return td.BOOLEAN
            if td.is_numeric(t) or t == td.MONETARY:
                return t
            _err(f"cannot negate {t}", e, "OperandMismatch")
        if isinstance(e, ast.Binary):
            return self._check_binary(e)
        if isinstance(e, ast.IfThenElse):
            cond = self.check(e.cond)
            if cond != td.BOOLEAN:
                _err(f"'if' condition must be Boolean, got {cond}", e,
                     "OperandMismatch")
            return _unify(self.check(e.then), self.check(e.els), p, e)
        if isinstance(e, ast.LetIn):
            value = self.check(e.value)
            saved = self.env.get(e.var)
            self.env[e.var] = value
            try:
                return self.check(e.body)
            finally:
                if saved is None:
                    del self.env[e.var]
                else:
                    self.env[e.var] = saved
        if isinstance(e, ast.CollectionOp):
            return self._check_collection_op(e)
        if isinstance(e, ast.IsUndefined):
            self.check(e.operand)
            return td.BOOLEAN
        raise TypeError(f"unhandled node {type(e).__name__}")

    def _check_opcall(self, e: ast.OpCall) -> td.TypeDescriptor:
        p = self.project
        target = self.check(e.target)
        arg_types = [self.check(a) for a in e.args]
        builtins = {
            "Monetary": {"amount": ([], td.FLOAT), "currency": ([], td.STRING)},
            "String": {"size": ([], td.INTEGER)},
        }
        if target.kind == "Collection":
            _err(f"use '->' for collection operations, not '.{e.name}()'", e,
                 "NotAnObject")
        if e.name == "toString" and not e.args:
            e.resolved = ("builtin", "toString")
            return td.STRING
        table = builtins.get(target.kind, {})
        if e.name in table:
            params, ret = table[e.name]
            if len(arg_types) != len(params):
                _err(f"{e.name}() takes {len(params)} arguments", e, "ArityMismatch")
            e.resolved = ("builtin", e.name)
            return ret
        if target.kind != "Object":
            _err(f"{target} has no operation {e.name!r}", e, "UnknownFeature")
        op = self.resolve_operation(target.ref, e.name)
        if op is None:
            cls = p.require_class(target.ref)
            _err(f"{cls.name} has no operation {e.name!r}", e, "UnknownFeature")
        if len(arg_types) != len(op.params):
            _err(f"{e.name}() takes {len(op.params)} arguments, got {len(arg_types)}",
                 e, "ArityMismatch")
        for given, param in zip(arg_types, op.params):
            want = p.descriptor(param.type)
            if not assignable(given, want, p):
                _err(f"argument {param.name!r} of {e.name}(): expected {want}, "
                     f"got {given}", e, "BadArgument")
        e.resolved = ("operation", op.id)
        return p.descriptor(op.return_type)

    def _check_binary(self, e: ast.Binary) -> td.TypeDescriptor:
        p = self.project
        left = self.check(e.left)
        right = self.check(e.right)
        op = e.op
        if op in ("and", "or", "implies"):
            if left != td.BOOLEAN or right != td.BOOLEAN:
                _err(f"'{op}' needs Booleans, got {left} and {right}", e,
                     "OperandMismatch")
            return td.BOOLEAN
        if op in ("=", "<>"):
            if not _comparable(left, right, p):
                _err(f"cannot compare {left} with {right}", e, "OperandMismatch")
            return td.BOOLEAN
        if op in ("<", "<=", ">", ">="):
            ordered = (
                (td.is_numeric(left) and td.is_numeric(right))
                or (left == right and left.kind in ("Monetary", "Date", "String"))
            )
            if not ordered:
                _err(f"cannot order {left} and {right}", e, "OperandMismatch")
            return td.BOOLEAN
        if op == "mod":
            if left == td.INTEGER and right == td.INTEGER:
                return td.INTEGER
            _err(f"'mod' needs Integers, got {left} and {right}", e,
                 "OperandMismatch")
        if op == "/":
            if td.is_numeric(left) and td.is_numeric(right):
                return td.FLOAT
            _err(f"cannot divide {left} by {right}", e, "OperandMismatch")
        if op == "+":
            if td.is_numeric(left) and td.is_numeric(right):
                return td.FLOAT if td.FLOAT in (left, right) else td.INTEGER
            if left == td.MONETARY and right == td.MONETARY:
                return td.MONETARY
            if left == td.STRING and right == td.STRING:
                return td.STRING
            _err(f"cannot add {left} and {right}", e, "OperandMismatch")
        if op == "-":
            if td.is_numeric(left) and td.is_numeric(right):
                return td.FLOAT if td.FLOAT in (left, right) else td.INTEGER
            if left == td.MONETARY and right == td.MONETARY:
                return td.MONETARY
            _err(f"cannot subtract {right} from {left}", e, "OperandMismatch")
        if op == "*":
            if td.is_numeric(left) and td.is_numeric(right):
                return td.FLOAT if td.FLOAT in (left, right) else td.INTEGER
            if left == td.MONETARY and right == td.INTEGER:
                return td.MONETARY
            if left == td.INTEGER and right == td.MONETARY:
                return td.MONETARY
            _err(f"cannot multiply {left} by {right}", e, "OperandMismatch")
        raise TypeError(f"unhandled operator {op!r}")

    def _check_collection_op(self, e: ast.CollectionOp) -> td.TypeDescriptor:
        p = self.project
        target = self.check(e.target)
        if target.kind != "Collection":
            _err(f"'->{e.op}' needs a collection, got {target}", e,
                 "NotACollection")
        elem = target.elem
        if e.op == "size":
            return td.INTEGER
        if e.op in ("isEmpty", "notEmpty"):
            return td.BOOLEAN
        if e.op == "sum":
            if td.is_numeric(elem) or elem == td.MONETARY:
                return elem
            _err(f"cannot sum a collection of {elem}", e, "OperandMismatch")
        if e.op == "includes":
            arg = self.check(e.arg)
            if not _comparable(arg, elem, p):
                _err(f"includes(): cannot compare {arg} with elements of {elem}",
                     e, "OperandMismatch")
            return td.BOOLEAN
        # binder ops
        saved = self.env.get(e.var)
        self.env[e.var] = elem
        try:
            body = self.check(e.body)
        finally:
            if saved is None:
                del self.env[e.var]
            else:
                self.env[e.var] = saved
        if e.op in ("forAll", "exists"):
            if body != td.BOOLEAN:
                _err(f"'{e.op}' body must be Boolean, got {body}", e,
                     "OperandMismatch")
            return td.BOOLEAN
        if e.op in ("select", "reject"):
            if body != td.BOOLEAN:
                _err(f"'{e.op}' body must be Boolean, got {body}", e,
                     "OperandMismatch")
            return target
        if e.op == "collect":
            return td.collection(body)
        raise TypeError(f"unhandled collection op {e.op!r}")


def typecheck(expr: ast.Expr, project, context_class_id: str,
              param_env: dict[str, td.TypeDescriptor] | None = None) -> td.TypeDescriptor:
    """Check and annotate; returns the root descriptor or raises
    TypeCheckError with a source span."""
    return Checker(project, context_class_id, param_env).check(expr)
