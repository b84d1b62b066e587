"""Lexer and recursive-descent parser for the expression language.

Grammar, loosest binding first:

    expr        ::= implies
    implies     ::= or ("implies" implies)?          right associative
    or          ::= and ("or" and)*
    and         ::= notexpr ("and" notexpr)*
    notexpr     ::= "not" notexpr | comparison
    comparison  ::= additive (cmpop additive)?       no chaining
    additive    ::= multiplicative (("+"|"-") multiplicative)*
    multiplicative ::= unary (("*"|"/"|"mod") unary)*
    unary       ::= "-" unary | postfix
    postfix     ::= primary ("." NAME call? | "->" collop)*
    primary     ::= literal | "self" | NAME "::" NAME | NAME
                  | "isUndefined" "(" expr ")" | "(" expr ")"
                  | "if" expr "then" expr "else" expr "endif"
                  | "let" NAME "=" expr "in" expr

Literals: 42, 3.5, 'text', true, @2024-05-01, 12.50 EUR (decimal amount
followed by a three-letter uppercase currency code), Genre::Horror.
``Name.allInstances()`` on a bare identifier is the class extent.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date
from decimal import Decimal

from umlpp.errors import ParseError
from umlpp.lang import ast
from umlpp.values import Money

KEYWORDS = {
    "self", "true", "false", "and", "or", "not", "implies",
    "if", "then", "else", "endif", "let", "in", "mod", "isUndefined",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<date>@\d{4}-\d{2}-\d{2})
  | (?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>'(?:\\.|[^'\\])*')
  | (?P<op>->|::|<=|>=|<>|[-+*/<>=().,|])
    """,
    re.VERBOSE,
)

_CURRENCY_RE = re.compile(r"^[A-Z]{3}$")


@dataclass(slots=True)
class Token:
    kind: str  # name | kw | int | float | string | date | op | eof
    text: str
    start: int
    end: int


def _line_col(source: str, pos: int) -> tuple[int, int]:
    line = source.count("\n", 0, pos) + 1
    last_nl = source.rfind("\n", 0, pos)
    return line, pos - last_nl


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if not m:
            line, col = _line_col(source, pos)
            raise ParseError(
                f"unexpected character {source[pos]!r}", line, col,
                span=(pos, pos + 1))
        pos = m.end()
        if m.lastgroup == "ws":
            continue
        text = m.group()
        if m.lastgroup == "number":
            kind = "float" if ("." in text or "e" in text or "E" in text) else "int"
        elif m.lastgroup == "name":
            kind = "kw" if text in KEYWORDS else "name"
        else:
            kind = m.lastgroup
        tokens.append(Token(kind, text, m.start(), m.end()))
    tokens.append(Token("eof", "", n, n))
    return tokens


def _unescape(raw: str, source: str) -> str:
    body = raw[1:-1]
    out = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\":
            i += 1
            esc = body[i]
            out.append({"n": "\n", "t": "\t", "'": "'", "\\": "\\"}.get(esc, esc))
        else:
            out.append(c)
        i += 1
    return "".join(out)


class Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.pos = 0

    # -- token plumbing ------------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.cur
        return tok.kind == kind and (text is None or tok.text == text)

    def eat(self, kind: str, text: str | None = None) -> Token:
        if not self.at(kind, text):
            self.fail({text or kind})
        return self.advance()

    def fail(self, expected: set[str]):
        tok = self.cur
        line, col = _line_col(self.source, tok.start)
        shown = tok.text or "end of input"
        raise ParseError(
            f"unexpected {shown!r}, expected one of: {', '.join(sorted(expected))}",
            line, col, expected=expected, span=(tok.start, tok.end))

    # -- grammar -------------------------------------------------------------

    def parse(self) -> ast.Expr:
        e = self.expression()
        if not self.at("eof"):
            self.fail({"end of input"})
        return e

    def expression(self) -> ast.Expr:
        return self.implies()

    def implies(self) -> ast.Expr:
        left = self.or_expr()
        if self.at("kw", "implies"):
            self.advance()
            right = self.implies()
            return ast.Binary(span=(left.span[0], right.span[1]),
                              op="implies", left=left, right=right)
        return left

    def or_expr(self) -> ast.Expr:
        left = self.and_expr()
        while self.at("kw", "or"):
            self.advance()
            right = self.and_expr()
            left = ast.Binary(span=(left.span[0], right.span[1]),
                              op="or", left=left, right=right)
        return left

    def and_expr(self) -> ast.Expr:
        left = self.not_expr()
        while self.at("kw", "and"):
            self.advance()
            right = self.not_expr()
            left = ast.Binary(span=(left.span[0], right.span[1]),
                              op="and", left=left, right=right)
        return left

    def not_expr(self) -> ast.Expr:
        if self.at("kw", "not"):
            start = self.advance().start
            operand = self.not_expr()
            return ast.Unary(span=(start, operand.span[1]), op="not",
                             operand=operand)
        return self.comparison()

    def comparison(self) -> ast.Expr:
        left = self.additive()
        if self.cur.kind == "op" and self.cur.text in ("=", "<>", "<", "<=", ">", ">="):
            op = self.advance().text
            right = self.additive()
            return ast.Binary(span=(left.span[0], right.span[1]),
                              op=op, left=left, right=right)
        return left

    def additive(self) -> ast.Expr:
        left = self.multiplicative()
        while self.cur.kind == "op" and self.cur.text in ("+", "-"):
            op = self.advance().text
            right = self.multiplicative()
            left = ast.Binary(span=(left.span[0], right.span[1]),
                              op=op, left=left, right=right)
        return left

    def multiplicative(self) -> ast.Expr:
        left = self.unary()
        while (self.cur.kind == "op" and self.cur.text in ("*", "/")) \
                or self.at("kw", "mod"):
            op = self.advance().text
            right = self.unary()
            left = ast.Binary(span=(left.span[0], right.span[1]),
                              op=op, left=left, right=right)
        return left

    def unary(self) -> ast.Expr:
        if self.at("op", "-"):
            start = self.advance().start
            operand = self.unary()
            return ast.Unary(span=(start, operand.span[1]), op="-",
                             operand=operand)
        return self.postfix()

    def postfix(self) -> ast.Expr:
        e = self.primary()
        while True:
            if self.at("op", "."):
                self.advance()
                name = self.eat("name").text
                if self.at("op", "("):
                    args = self.call_args()
                    if (name == "allInstances" and not args
                            and isinstance(e, ast.VarRef)):
                        e = ast.ExtentCall(span=(e.span[0], self.tokens[self.pos - 1].end),
                                           class_name=e.name)
                    else:
                        e = ast.OpCall(span=(e.span[0], self.tokens[self.pos - 1].end),
                                       target=e, name=name, args=args)
                else:
                    e = ast.Nav(span=(e.span[0], self.tokens[self.pos - 1].end),
                                target=e, name=name)
            elif self.at("op", "->"):
                self.advance()
                e = self.collection_op(e)
            else:
                return e

    def call_args(self) -> list[ast.Expr]:
        self.eat("op", "(")
        args: list[ast.Expr] = []
        if not self.at("op", ")"):
            args.append(self.expression())
            while self.at("op", ","):
                self.advance()
                args.append(self.expression())
        self.eat("op", ")")
        return args

    def collection_op(self, target: ast.Expr) -> ast.Expr:
        name_tok = self.eat("name")
        op = name_tok.text
        self.eat("op", "(")
        if op in ast.COLLECTION_OPS_PLAIN:
            self.eat("op", ")")
            return ast.CollectionOp(span=(target.span[0], self.tokens[self.pos - 1].end),
                                    target=target, op=op)
        if op in ast.COLLECTION_OPS_ARG:
            arg = self.expression()
            self.eat("op", ")")
            return ast.CollectionOp(span=(target.span[0], self.tokens[self.pos - 1].end),
                                    target=target, op=op, arg=arg)
        if op in ast.COLLECTION_OPS_BODY:
            var = self.eat("name").text
            self.eat("op", "|")
            body = self.expression()
            self.eat("op", ")")
            return ast.CollectionOp(span=(target.span[0], self.tokens[self.pos - 1].end),
                                    target=target, op=op, var=var, body=body)
        self.pos -= 2  # rewind to the op name for the error position
        self.fail(set(ast.COLLECTION_OPS_PLAIN) | set(ast.COLLECTION_OPS_ARG)
                  | set(ast.COLLECTION_OPS_BODY))

    def primary(self) -> ast.Expr:
        tok = self.cur
        if tok.kind == "int":
            self.advance()
            money = self.maybe_currency(tok, Decimal(tok.text))
            if money:
                return money
            return ast.IntLit(span=(tok.start, tok.end), value=int(tok.text))
        if tok.kind == "float":
            self.advance()
            money = self.maybe_currency(tok, Decimal(tok.text))
            if money:
                return money
            return ast.FloatLit(span=(tok.start, tok.end), value=float(tok.text))
        if tok.kind == "string":
            self.advance()
            return ast.StringLit(span=(tok.start, tok.end),
                                 value=_unescape(tok.text, self.source))
        if tok.kind == "date":
            self.advance()
            y, m, d = tok.text[1:].split("-")
            try:
                day = date(int(y), int(m), int(d))
            except ValueError:
                line, col = _line_col(self.source, tok.start)
                raise ParseError(f"invalid date {tok.text!r}", line, col,
                                 span=(tok.start, tok.end)) from None
            return ast.DateLit(span=(tok.start, tok.end), value=day)
        if tok.kind == "kw":
            if tok.text == "true" or tok.text == "false":
                self.advance()
                return ast.BoolLit(span=(tok.start, tok.end),
                                   value=tok.text == "true")
            if tok.text == "self":
                self.advance()
                return ast.SelfRef(span=(tok.start, tok.end))
            if tok.text == "isUndefined":
                self.advance()
                self.eat("op", "(")
                operand = self.expression()
                end = self.eat("op", ")").end
                return ast.IsUndefined(span=(tok.start, end), operand=operand)
            if tok.text == "if":
                self.advance()
                cond = self.expression()
                self.eat("kw", "then")
                then = self.expression()
                self.eat("kw", "else")
                els = self.expression()
                end = self.eat("kw", "endif").end
                return ast.IfThenElse(span=(tok.start, end), cond=cond,
                                      then=then, els=els)
            if tok.text == "let":
                self.advance()
                var = self.eat("name").text
                self.eat("op", "=")
                value = self.expression()
                self.eat("kw", "in")
                body = self.expression()
                return ast.LetIn(span=(tok.start, body.span[1]), var=var,
                                 value=value, body=body)
            self.fail({"expression"})
        if tok.kind == "name":
            self.advance()
            if self.at("op", "::"):
                self.advance()
                lit = self.eat("name")
                return ast.EnumLit(span=(tok.start, lit.end),
                                   enum_name=tok.text, literal=lit.text)
            return ast.VarRef(span=(tok.start, tok.end), name=tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            e = self.expression()
            self.eat("op", ")")
            return e
        self.fail({"expression"})

    def maybe_currency(self, number_tok: Token, amount: Decimal) -> ast.MoneyLit | None:
        tok = self.cur
        if tok.kind == "name" and _CURRENCY_RE.match(tok.text):
            self.advance()
            return ast.MoneyLit(span=(number_tok.start, tok.end),
                                value=Money(amount, tok.text))
        return None


def parse(source: str) -> ast.Expr:
    """Parse a single expression; raises ParseError with line/column."""
    return Parser(source).parse()
