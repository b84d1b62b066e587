"""Expression AST.

Nodes compare structurally: source spans and resolution annotations (filled
in by the type checker) are excluded from equality, so parse(format(e)) == e
holds for any well-formed tree.

Navigation is a single node kind; whether a name is an attribute, an
association role or a delegation is decided during type checking and recorded
in ``Nav.resolved``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from typing import Optional

from umlpp.values import Money

Span = tuple[int, int]  # [start, end) character offsets into the source

NO_SPAN: Span = (0, 0)


@dataclass(eq=False)
class Expr:
    span: Span = field(default=NO_SPAN, compare=False)
    # static type descriptor, set by the type checker
    type: object = field(default=None, compare=False)


def _node(cls):
    """Dataclass decorator for AST nodes: structural eq, span/type excluded."""
    return dataclass(eq=True, repr=True)(cls)


@_node
class IntLit(Expr):
    value: int = 0


@_node
class FloatLit(Expr):
    value: float = 0.0


@_node
class StringLit(Expr):
    value: str = ""


@_node
class BoolLit(Expr):
    value: bool = False


@_node
class DateLit(Expr):
    value: date = date(1970, 1, 1)


@_node
class MoneyLit(Expr):
    value: Money = None


@_node
class EnumLit(Expr):
    enum_name: str = ""
    literal: str = ""
    enum_id: Optional[str] = field(default=None, compare=False)


@_node
class SelfRef(Expr):
    pass


@_node
class VarRef(Expr):
    name: str = ""


@_node
class Nav(Expr):
    """``target.name``: attribute read, role navigation or delegate access."""
    target: Expr = None
    name: str = ""
    # ("attribute", attr_id) | ("role", assoc_id, end_index) |
    # ("delegation", delegation_id)
    resolved: Optional[tuple] = field(default=None, compare=False)


@_node
class OpCall(Expr):
    """``target.name(args)``: user operation or built-in method."""
    target: Expr = None
    name: str = ""
    args: list[Expr] = field(default_factory=list)
    # ("operation", op_id) | ("builtin", name)
    resolved: Optional[tuple] = field(default=None, compare=False)


@_node
class ExtentCall(Expr):
    """``ClassName.allInstances()``"""
    class_name: str = ""
    class_id: Optional[str] = field(default=None, compare=False)


@_node
class Unary(Expr):
    op: str = ""  # "-" | "not"
    operand: Expr = None


@_node
class Binary(Expr):
    op: str = ""  # + - * / mod < <= > >= = <> and or implies
    left: Expr = None
    right: Expr = None


@_node
class IfThenElse(Expr):
    cond: Expr = None
    then: Expr = None
    els: Expr = None


@_node
class LetIn(Expr):
    var: str = ""
    value: Expr = None
    body: Expr = None


COLLECTION_OPS_PLAIN = ("size", "isEmpty", "notEmpty", "sum")
COLLECTION_OPS_ARG = ("includes",)
COLLECTION_OPS_BODY = ("forAll", "exists", "select", "reject", "collect")


@_node
class CollectionOp(Expr):
    """``target->op(...)``; body ops carry an explicit bound variable."""
    target: Expr = None
    op: str = ""
    arg: Optional[Expr] = None      # includes only
    var: Optional[str] = None       # body ops only
    body: Optional[Expr] = None


@_node
class IsUndefined(Expr):
    """The one operator that does not propagate an undefined operand."""
    operand: Expr = None


def children(e: Expr) -> list[Expr]:
    if isinstance(e, Nav):
        return [e.target]
    if isinstance(e, OpCall):
        return [e.target, *e.args]
    if isinstance(e, Unary):
        return [e.operand]
    if isinstance(e, Binary):
        return [e.left, e.right]
    if isinstance(e, IfThenElse):
        return [e.cond, e.then, e.els]
    if isinstance(e, LetIn):
        return [e.value, e.body]
    if isinstance(e, CollectionOp):
        out = [e.target]
        if e.arg is not None:
            out.append(e.arg)
        if e.body is not None:
            out.append(e.body)
        return out
    if isinstance(e, IsUndefined):
        return [e.operand]
    return []


def walk(e: Expr):
    yield e
    for c in children(e):
        yield from walk(c)


# ---------------------------------------------------------------------------
# Canonical formatter
# ---------------------------------------------------------------------------

# binding strength, loosest first; unary "not" sits between "and" and the
# comparisons, so `not a < b` prints and re-parses as not (a < b)
_PREC = {
    "implies": 1,
    "or": 2,
    "and": 3,
    "not": 4,
    "=": 5, "<>": 5, "<": 5, "<=": 5, ">": 5, ">=": 5,
    "+": 6, "-": 6,
    "*": 7, "/": 7, "mod": 7,
    "neg": 8,
}
_POSTFIX = 9
_RIGHT_ASSOC = {"implies"}
_COMPARISONS = {"=", "<>", "<", "<=", ">", ">=" }


def _escape(s: str) -> str:
    out = s.replace("\\", "\\\\").replace("'", "\\'")
    out = out.replace("\n", "\\n").replace("\t", "\\t")
    return out


def _fmt(e: Expr, min_prec: int) -> str:
    text, prec = _fmt_prec(e)
    if prec < min_prec:
        return f"({text})"
    return text


def _fmt_prec(e: Expr) -> tuple[str, int]:
    if isinstance(e, IntLit):
        return str(e.value), _POSTFIX
    if isinstance(e, FloatLit):
        return repr(e.value), _POSTFIX
    if isinstance(e, StringLit):
        return f"'{_escape(e.value)}'", _POSTFIX
    if isinstance(e, BoolLit):
        return ("true" if e.value else "false"), _POSTFIX
    if isinstance(e, DateLit):
        return f"@{e.value.isoformat()}", _POSTFIX
    if isinstance(e, MoneyLit):
        return str(e.value), _POSTFIX
    if isinstance(e, EnumLit):
        return f"{e.enum_name}::{e.literal}", _POSTFIX
    if isinstance(e, SelfRef):
        return "self", _POSTFIX
    if isinstance(e, VarRef):
        return e.name, _POSTFIX
    if isinstance(e, Nav):
        return f"{_fmt(e.target, _POSTFIX)}.{e.name}", _POSTFIX
    if isinstance(e, OpCall):
        args = ", ".join(_fmt(a, 0) for a in e.args)
        return f"{_fmt(e.target, _POSTFIX)}.{e.name}({args})", _POSTFIX
    if isinstance(e, ExtentCall):
        return f"{e.class_name}.allInstances()", _POSTFIX
    if isinstance(e, CollectionOp):
        target = _fmt(e.target, _POSTFIX)
        if e.op in COLLECTION_OPS_BODY:
            return f"{target}->{e.op}({e.var} | {_fmt(e.body, 0)})", _POSTFIX
        if e.op in COLLECTION_OPS_ARG:
            return f"{target}->{e.op}({_fmt(e.arg, 0)})", _POSTFIX
        return f"{target}->{e.op}()", _POSTFIX
    if isinstance(e, IsUndefined):
        return f"isUndefined({_fmt(e.operand, 0)})", _POSTFIX
    if isinstance(e, Unary):
        if e.op == "not":
            return f"not {_fmt(e.operand, _PREC['not'] + 1)}", _PREC["not"]
        return f"-{_fmt(e.operand, _PREC['neg'])}", _PREC["neg"]
    if isinstance(e, Binary):
        prec = _PREC[e.op]
        if e.op in _COMPARISONS:
            # comparisons do not chain; operands print at the next level up
            left = _fmt(e.left, prec + 1)
            right = _fmt(e.right, prec + 1)
        elif e.op in _RIGHT_ASSOC:
            left = _fmt(e.left, prec + 1)
            right = _fmt(e.right, prec)
        else:
            left = _fmt(e.left, prec)
            right = _fmt(e.right, prec + 1)
        return f"{left} {e.op} {right}", prec
    if isinstance(e, IfThenElse):
        return (f"if {_fmt(e.cond, 0)} then {_fmt(e.then, 0)} "
                f"else {_fmt(e.els, 0)} endif"), _POSTFIX
    if isinstance(e, LetIn):
        return f"let {e.var} = {_fmt(e.value, 1)} in {_fmt(e.body, 0)}", 0
    raise TypeError(f"cannot format {type(e).__name__}")


def format_expr(e: Expr) -> str:
    """Canonical source: parse(format_expr(e)) is structurally equal to e."""
    return _fmt(e, 0)


# ---------------------------------------------------------------------------
# Reference extraction
# ---------------------------------------------------------------------------

def references(e: Expr) -> set[tuple[str, str]]:
    """All external names the expression depends on, as (kind, name) pairs.

    Requires a type-checked tree: navigation and call nodes are classified
    from their resolution annotations.
    """
    out: set[tuple[str, str]] = set()
    for node in walk(e):
        if isinstance(node, Nav):
            kind = node.resolved[0] if node.resolved else "attribute"
            out.add((kind, node.name))
        elif isinstance(node, OpCall):
            if node.resolved and node.resolved[0] == "operation":
                out.add(("operation", node.name))
        elif isinstance(node, ExtentCall):
            out.add(("class", node.class_name))
        elif isinstance(node, EnumLit):
            out.add(("enum-literal", f"{node.enum_name}::{node.literal}"))
    return out
