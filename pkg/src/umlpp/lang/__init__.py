"""Embedded constraint/operation expression language.

Submodules: ast (node types, canonical formatter, reference extraction),
parser (lexer + recursive descent), types (static type descriptors),
typecheck (resolver/checker), evaluate (three-valued evaluator).
"""

from umlpp.lang.parser import parse
from umlpp.lang.ast import format_expr, references
from umlpp.lang.typecheck import typecheck
from umlpp.lang.evaluate import EvalContext, EvalResult, Undefined, evaluate

__all__ = [
    "parse",
    "format_expr",
    "references",
    "typecheck",
    "evaluate",
    "EvalContext",
    "EvalResult",
    "Undefined",
]
