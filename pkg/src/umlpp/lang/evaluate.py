"""Three-valued expression evaluator.

Every failure mode (unset slot, division by zero, currency mismatch, missing
delegate, recursion limit) produces an Undefined result with a diagnostic
reason instead of an exception, so half-built objects evaluate to "not
evaluable" rather than crashing an interactive session.

Undefined propagates through every operator except ``isUndefined`` and the
short-circuit cases of ``and``/``or`` that are already decided by the left
operand. Evaluation order is strictly left to right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date
from typing import Callable, Optional, Union

from umlpp.lang import ast
from umlpp.lang import types as td
from umlpp.values import EnumValue, Money, ObjectRef, values_equal

DEFAULT_MAX_DEPTH = 256


@dataclass(frozen=True, slots=True)
class Undefined:
    reason: str
    span: ast.Span = ast.NO_SPAN

    def __str__(self) -> str:
        return f"undefined: {self.reason}"


EvalResult = Union[object, Undefined]  # a runtime value or Undefined


def is_undefined(r: EvalResult) -> bool:
    return isinstance(r, Undefined)


@dataclass(slots=True)
class EvalContext:
    """Everything the evaluator needs: a project snapshot, the object bound
    to ``self``, a variable environment, and the feature-resolution hooks
    supplied by the execution engine (they implement delegation)."""

    project: object
    self_id: Optional[str]
    navigate: Callable[["EvalContext", str, str], EvalResult]
    call: Callable[["EvalContext", str, str, list], EvalResult]
    vars: dict[str, EvalResult] = field(default_factory=dict)
    depth: int = 0
    max_depth: int = DEFAULT_MAX_DEPTH


def evaluate(e: ast.Expr, ctx: EvalContext) -> EvalResult:
    result = _eval(e, ctx)
    # control-flow joins can produce an Integer where the static type says
    # Float; widen so runtime types always match the checked descriptor
    if (isinstance(result, int) and not isinstance(result, bool)
            and isinstance(e.type, td.TypeDescriptor) and e.type == td.FLOAT):
        return float(result)
    return result


def _bad_float(x: float, e: ast.Expr) -> Optional[Undefined]:
    if math.isinf(x) or math.isnan(x):
        return Undefined("float overflow", e.span)
    return None


def _eval(e: ast.Expr, ctx: EvalContext) -> EvalResult:
    if isinstance(e, ast.IntLit):
        return e.value
    if isinstance(e, ast.FloatLit):
        return e.value
    if isinstance(e, ast.StringLit):
        return e.value
    if isinstance(e, ast.BoolLit):
        return e.value
    if isinstance(e, ast.DateLit):
        return e.value
    if isinstance(e, ast.MoneyLit):
        return e.value
    if isinstance(e, ast.EnumLit):
        enum_id = e.enum_id
        if enum_id is None:
            enum = ctx.project.enum_by_name(e.enum_name)
            if enum is None:
                return Undefined(f"unknown enumeration '{e.enum_name}'", e.span)
            enum_id = enum.id
        return EnumValue(enum_id, e.literal)
    if isinstance(e, ast.SelfRef):
        if ctx.self_id is None:
            return Undefined("no object bound to self", e.span)
        return ObjectRef(ctx.self_id)
    if isinstance(e, ast.VarRef):
        if e.name in ctx.vars:
            return ctx.vars[e.name]
        return Undefined(f"unknown variable '{e.name}'", e.span)
    if isinstance(e, ast.Nav):
        target = evaluate(e.target, ctx)
        if is_undefined(target):
            return target
        if not isinstance(target, ObjectRef):
            return Undefined(f"cannot navigate '{e.name}' on a non-object", e.span)
        return ctx.navigate(ctx, target.object_id, e.name)
    if isinstance(e, ast.ExtentCall):
        cls = (ctx.project.classes.get(e.class_id) if e.class_id
               else ctx.project.class_by_name(e.class_name))
        if cls is None:
            return Undefined(f"unknown class '{e.class_name}'", e.span)
        return tuple(ObjectRef(o.id) for o in ctx.project.instances_of(cls.id))
    if isinstance(e, ast.OpCall):
        return _eval_opcall(e, ctx)
    if isinstance(e, ast.Unary):
        operand = evaluate(e.operand, ctx)
        if is_undefined(operand):
            return operand
        if e.op == "not":
            return not operand
        if isinstance(operand, Money):
            return -operand
        result = -operand
        if isinstance(result, float):
            return _bad_float(result, e) or result
        return result
    if isinstance(e, ast.Binary):
        return _eval_binary(e, ctx)
    if isinstance(e, ast.IfThenElse):
        cond = evaluate(e.cond, ctx)
        if is_undefined(cond):
            return cond
        return evaluate(e.then if cond else e.els, ctx)
    if isinstance(e, ast.LetIn):
        # bindings may hold Undefined; uses propagate at the use site, which
        # keeps isUndefined(x) workable on let-bound names
        value = evaluate(e.value, ctx)
        saved = e.var in ctx.vars
        old = ctx.vars.get(e.var)
        ctx.vars[e.var] = value
        try:
            return evaluate(e.body, ctx)
        finally:
            if saved:
                ctx.vars[e.var] = old
            else:
                del ctx.vars[e.var]
    if isinstance(e, ast.CollectionOp):
        return _eval_collection(e, ctx)
    if isinstance(e, ast.IsUndefined):
        return is_undefined(evaluate(e.operand, ctx))
    raise TypeError(f"unhandled node {type(e).__name__}")


def _to_string(value, ctx: EvalContext) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, date):
        return value.isoformat()
    if isinstance(value, Money):
        return str(value)
    if isinstance(value, EnumValue):
        enum = ctx.project.enumerations.get(value.enumeration)
        name = enum.name if enum else value.enumeration
        return f"{name}::{value.literal}"
    if isinstance(value, ObjectRef):
        obj = ctx.project.objects.get(value.object_id)
        return obj.name if obj else value.object_id
    return str(value)


def _eval_opcall(e: ast.OpCall, ctx: EvalContext) -> EvalResult:
    target = evaluate(e.target, ctx)
    if is_undefined(target):
        return target
    args: list[EvalResult] = []
    for a in e.args:
        v = evaluate(a, ctx)
        if is_undefined(v):
            return v
        args.append(v)
    if e.resolved and e.resolved[0] == "builtin":
        name = e.resolved[1]
        if name == "toString":
            return _to_string(target, ctx)
        if name == "amount":
            return float(target.amount)
        if name == "currency":
            return target.currency
        if name == "size":
            return len(target)
        return Undefined(f"unknown builtin '{name}'", e.span)
    if not isinstance(target, ObjectRef):
        return Undefined(f"cannot call '{e.name}' on a non-object", e.span)
    return ctx.call(ctx, target.object_id, e.name, args)


def _eval_binary(e: ast.Binary, ctx: EvalContext) -> EvalResult:
    op = e.op
    left = evaluate(e.left, ctx)
    if op == "and":
        if left is False:
            return False
        if is_undefined(left):
            return left
        right = evaluate(e.right, ctx)
        return right
    if op == "or":
        if left is True:
            return True
        if is_undefined(left):
            return left
        right = evaluate(e.right, ctx)
        return right
    if is_undefined(left):
        return left
    right = evaluate(e.right, ctx)
    if is_undefined(right):
        return right
    if op == "implies":
        return (not left) or right
    if op == "=":
        return values_equal(left, right)
    if op == "<>":
        return not values_equal(left, right)
    if op in ("<", "<=", ">", ">="):
        if isinstance(left, Money):
            if not left.same_currency(right):
                return Undefined(
                    f"currency mismatch: {left.currency} vs {right.currency}",
                    e.span)
            left, right = left.amount, right.amount
        table = {"<": left.__lt__, "<=": left.__le__,
                 ">": left.__gt__, ">=": left.__ge__}
        result = table[op](right)
        if result is NotImplemented:
            return Undefined(f"cannot order operands of '{op}'", e.span)
        return bool(result)
    if op == "+":
        if isinstance(left, str):
            return left + right
        if isinstance(left, Money):
            if not left.same_currency(right):
                return Undefined(
                    f"currency mismatch: {left.currency} vs {right.currency}",
                    e.span)
            return left + right
        result = left + right
        if isinstance(result, float):
            return _bad_float(result, e) or result
        return result
    if op == "-":
        if isinstance(left, Money):
            if not left.same_currency(right):
                return Undefined(
                    f"currency mismatch: {left.currency} vs {right.currency}",
                    e.span)
            return left - right
        result = left - right
        if isinstance(result, float):
            return _bad_float(result, e) or result
        return result
    if op == "*":
        if isinstance(left, Money):
            return left.scaled(right)
        if isinstance(right, Money):
            return right.scaled(left)
        result = left * right
        if isinstance(result, float):
            return _bad_float(result, e) or result
        return result
    if op == "/":
        if right == 0:
            return Undefined("division by zero", e.span)
        result = left / right
        return _bad_float(result, e) or result
    if op == "mod":
        if right == 0:
            return Undefined("division by zero", e.span)
        return left % right
    raise TypeError(f"unhandled operator {op!r}")


def _eval_collection(e: ast.CollectionOp, ctx: EvalContext) -> EvalResult:
    target = evaluate(e.target, ctx)
    if is_undefined(target):
        return target
    items: tuple = target
    if e.op == "size":
        return len(items)
    if e.op == "isEmpty":
        return len(items) == 0
    if e.op == "notEmpty":
        return len(items) > 0
    if e.op == "sum":
        return _sum_items(items, e)
    if e.op == "includes":
        needle = evaluate(e.arg, ctx)
        if is_undefined(needle):
            return needle
        return any(values_equal(needle, x) for x in items)
    # binder ops, left to right; forAll/exists stop at the first deciding or
    # undefined element, exactly like a chain of and/or
    saved = e.var in ctx.vars
    old = ctx.vars.get(e.var)
    try:
        if e.op in ("forAll", "exists"):
            stop_on = e.op == "exists"  # exists stops on true, forAll on false
            for item in items:
                ctx.vars[e.var] = item
                r = evaluate(e.body, ctx)
                if is_undefined(r):
                    return r
                if r is stop_on:
                    return stop_on
            return not stop_on
        if e.op in ("select", "reject"):
            keep = e.op == "select"
            picked = []
            for item in items:
                ctx.vars[e.var] = item
                r = evaluate(e.body, ctx)
                if is_undefined(r):
                    return r
                if r is keep:
                    picked.append(item)
            return tuple(picked)
        if e.op == "collect":
            out = []
            for item in items:
                ctx.vars[e.var] = item
                r = evaluate(e.body, ctx)
                if is_undefined(r):
                    return r
                out.append(r)
            return tuple(out)
    finally:
        if saved:
            ctx.vars[e.var] = old
        elif e.var in ctx.vars:
            del ctx.vars[e.var]
    raise TypeError(f"unhandled collection op {e.op!r}")


def _sum_items(items: tuple, e: ast.CollectionOp) -> EvalResult:
    if not items:
        elem = e.type
        if elem == td.MONETARY:
            return Undefined("sum of an empty monetary collection", e.span)
        return 0.0 if elem == td.FLOAT else 0
    first = items[0]
    if isinstance(first, Money):
        total = first
        for x in items[1:]:
            if not total.same_currency(x):
                return Undefined(
                    f"currency mismatch: {total.currency} vs {x.currency}",
                    e.span)
            total = total + x
        return total
    total = sum(items)
    if isinstance(total, float):
        return _bad_float(total, e) or total
    return total
