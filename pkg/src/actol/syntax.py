"""Tokens, expression trees and the expression parser shared by program,
predicate and ranking files."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

ARITH_OPS = ("+", "-", "*", "/")
CMP_OPS = ("<", "<=", ">", ">=", "==", "!=")
NEGATED_CMP = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}
SWAPPED_CMP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "==": "==", "!=": "!="}


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(f"{where}{message}")


# ---------------------------------------------------------------------------
# expression trees


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Input:
    """Nondeterministic integer source, written ``input()``."""

    def __str__(self) -> str:
        return "input()"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"

    def __str__(self) -> str:
        return f"{_wrap(self.left, self.op, False)} {self.op} {_wrap(self.right, self.op, True)}"


Expr = Union[Var, Const, Input, BinOp]

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _wrap(e: Expr, parent: str, right: bool) -> str:
    if isinstance(e, BinOp):
        p, q = _PREC[e.op], _PREC[parent]
        if p < q or (right and p == q):
            return f"({e})"
    if isinstance(e, Const) and e.value < 0:
        return f"({e.value})"
    return str(e)


@dataclass(frozen=True)
class Cmp:
    op: str
    left: Expr
    right: Expr

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class And:
    left: "BExpr"
    right: "BExpr"

    def __str__(self) -> str:
        return f"{_bwrap(self.left, And)} && {_bwrap(self.right, And)}"


@dataclass(frozen=True)
class Or:
    left: "BExpr"
    right: "BExpr"

    def __str__(self) -> str:
        return f"{_bwrap(self.left, Or)} || {_bwrap(self.right, Or)}"


@dataclass(frozen=True)
class Not:
    arg: "BExpr"

    def __str__(self) -> str:
        return f"!({self.arg})"


@dataclass(frozen=True)
class BoolConst:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


BExpr = Union[Cmp, And, Or, Not, BoolConst]


def _bwrap(e: BExpr, parent: type) -> str:
    if isinstance(e, (And, Or)) and not isinstance(e, parent):
        return f"({e})"
    return str(e)


def expr_vars(e: Expr | BExpr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, (BinOp, Cmp, And, Or)):
        return expr_vars(e.left) | expr_vars(e.right)
    if isinstance(e, Not):
        return expr_vars(e.arg)
    return set()


def expr_ops(e: Expr | BExpr) -> set[str]:
    """Arithmetic operators applied anywhere inside ``e``."""
    if isinstance(e, BinOp):
        return {e.op} | expr_ops(e.left) | expr_ops(e.right)
    if isinstance(e, (Cmp, And, Or)):
        return expr_ops(e.left) | expr_ops(e.right)
    if isinstance(e, Not):
        return expr_ops(e.arg)
    return set()


def has_input(e: Expr) -> bool:
    if isinstance(e, Input):
        return True
    if isinstance(e, BinOp):
        return has_input(e.left) or has_input(e.right)
    return False


def rename_expr(e, mapping: dict[str, str]):
    if isinstance(e, Var):
        return Var(mapping.get(e.name, e.name))
    if isinstance(e, BinOp):
        return BinOp(e.op, rename_expr(e.left, mapping), rename_expr(e.right, mapping))
    if isinstance(e, Cmp):
        return Cmp(e.op, rename_expr(e.left, mapping), rename_expr(e.right, mapping))
    if isinstance(e, And):
        return And(rename_expr(e.left, mapping), rename_expr(e.right, mapping))
    if isinstance(e, Or):
        return Or(rename_expr(e.left, mapping), rename_expr(e.right, mapping))
    if isinstance(e, Not):
        return Not(rename_expr(e.arg, mapping))
    return e


def negate(b: BExpr) -> BExpr:
    """Push a negation through ``b`` (negation normal form, comparisons flipped)."""
    if isinstance(b, Cmp):
        return Cmp(NEGATED_CMP[b.op], b.left, b.right)
    if isinstance(b, And):
        return Or(negate(b.left), negate(b.right))
    if isinstance(b, Or):
        return And(negate(b.left), negate(b.right))
    if isinstance(b, Not):
        return nnf(b.arg)
    return BoolConst(not b.value)


def nnf(b: BExpr) -> BExpr:
    if isinstance(b, Not):
        return negate(b.arg)
    if isinstance(b, And):
        return And(nnf(b.left), nnf(b.right))
    if isinstance(b, Or):
        return Or(nnf(b.left), nnf(b.right))
    return b


def dnf(b: BExpr) -> list[list[Cmp]]:
    """Disjunctive normal form as a list of comparison conjunctions.

    ``[]`` is false, ``[[]]`` is true.
    """
    b = nnf(b)
    if isinstance(b, Cmp):
        return [[b]]
    if isinstance(b, BoolConst):
        return [[]] if b.value else []
    if isinstance(b, Or):
        return dnf(b.left) + dnf(b.right)
    left, right = dnf(b.left), dnf(b.right)
    return [l + r for l in left for r in right]


# ---------------------------------------------------------------------------
# lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>:=|<=|>=|==|!=|&&|\|\||[-+*/<>!(){}\[\];:,=])
    """,
    re.VERBOSE | re.DOTALL,
)

KEYWORDS = {"int", "if", "else", "while", "input", "ERR"}


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "op", "kw", "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        value = m.group()
        col = pos - line_start + 1
        if kind in ("ws",):
            pass
        elif kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "comment":
            newlines = value.count("\n")
            if newlines:
                line += newlines
                line_start = pos + value.rfind("\n") + 1
        elif kind == "ident" and value in KEYWORDS:
            tokens.append(Token("kw", value, line, col))
        else:
            tokens.append(Token(kind, value, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def peek_at(self, offset: int) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek
        return tok.kind in ("op", "kw") and tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.peek
        if not self.at(text):
            found = tok.text or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", tok.line, tok.col)
        return self.next()

    def error(self, message: str) -> ParseError:
        tok = self.peek
        return ParseError(message, tok.line, tok.col)


# ---------------------------------------------------------------------------
# expression parser


class ExprParser:
    """Recursive-descent parser for arithmetic and boolean expressions.

    ``check_var`` is called on every variable reference so callers can
    reject undeclared names with a positioned error.
    """

    def __init__(self, ts: TokenStream, check_var=None, allow_input: bool = False):
        self.ts = ts
        self.check_var = check_var
        self.allow_input = allow_input

    def expr(self) -> Expr:
        left = self.term()
        while self.ts.at("+") or self.ts.at("-"):
            op = self.ts.next().text
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.ts.at("*") or self.ts.at("/"):
            op = self.ts.next().text
            left = BinOp(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.ts.accept("-"):
            arg = self.unary()
            if isinstance(arg, Const):
                return Const(-arg.value)
            return BinOp("-", Const(0), arg)
        return self.primary()

    def primary(self) -> Expr:
        tok = self.ts.peek
        if tok.kind == "int":
            self.ts.next()
            return Const(int(tok.text))
        if tok.kind == "ident":
            self.ts.next()
            if self.ts.at("["):
                raise ParseError(f"array read {tok.text}[...] is not supported", tok.line, tok.col)
            if self.check_var is not None:
                self.check_var(tok)
            return Var(tok.text)
        if tok.kind == "kw" and tok.text == "input":
            if not self.allow_input:
                raise ParseError("input() is only allowed as a whole right-hand side", tok.line, tok.col)
            self.ts.next()
            self.ts.expect("(")
            self.ts.expect(")")
            return Input()
        if self.ts.accept("("):
            e = self.expr()
            self.ts.expect(")")
            return e
        found = tok.text or "end of input"
        raise ParseError(f"expected expression, found {found!r}", tok.line, tok.col)

    def bexpr(self) -> BExpr:
        left = self.band()
        while self.ts.accept("||"):
            left = Or(left, self.band())
        return left

    def band(self) -> BExpr:
        left = self.bunary()
        while self.ts.accept("&&"):
            left = And(left, self.bunary())
        return left

    def bunary(self) -> BExpr:
        if self.ts.accept("!"):
            return Not(self.bunary())
        if self.ts.at("("):
            # either a parenthesised boolean or a comparison whose left side
            # starts with '('; try the boolean reading first
            saved = self.ts.pos
            try:
                self.ts.next()
                inner = self.bexpr()
                self.ts.expect(")")
                if not (self.ts.peek.kind == "op" and self.ts.peek.text in CMP_OPS):
                    return inner
            except ParseError:
                pass
            self.ts.pos = saved
        return self.comparison()

    def comparison(self) -> Cmp:
        left = self.expr()
        tok = self.ts.peek
        if not (tok.kind == "op" and tok.text in CMP_OPS + ("=",)):
            found = tok.text or "end of input"
            raise ParseError(f"expected comparison operator, found {found!r}", tok.line, tok.col)
        self.ts.next()
        op = "==" if tok.text == "=" else tok.text
        return Cmp(op, left, self.expr())


def parse_expr(text: str) -> Expr:
    ts = TokenStream(tokenize(text))
    e = ExprParser(ts).expr()
    if ts.peek.kind != "eof":
        raise ts.error(f"unexpected {ts.peek.text!r}")
    return e


def parse_bexpr(text: str) -> BExpr:
    ts = TokenStream(tokenize(text))
    e = ExprParser(ts).bexpr()
    if ts.peek.kind != "eof":
        raise ts.error(f"unexpected {ts.peek.text!r}")
    return e


def iter_subexprs(e: Expr) -> Iterator[Expr]:
    yield e
    if isinstance(e, BinOp):
        yield from iter_subexprs(e.left)
        yield from iter_subexprs(e.right)
