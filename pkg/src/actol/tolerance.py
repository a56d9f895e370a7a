"""Tolerance constraints: extraction from a fixpoint, mapping onto the adder
signature (x, y) -> z, and the ``.tc.smt2`` text format."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union

from .abstraction import ATS
from .frontend import RESERVED_NAMES, Assign, Edge, binary_operands
from .logic import BOTTOM, Atom, Conjunction, Entailment, LinExpr, entails
from .syntax import Const, ParseError, Var

log = logging.getLogger(__name__)

Operand = Union[str, int]


@dataclass(frozen=True)
class ToleranceConstraint:
    edge: Edge
    op: str
    pairs: tuple[tuple[Conjunction, Conjunction], ...]
    program_vars: tuple[str, ...] = ()

    @property
    def statement(self) -> Assign:
        return self.edge.stm  # type: ignore[return-value]


def extract(ats: ATS, op: str) -> list[ToleranceConstraint]:
    """One constraint per edge ``u := v op w`` whose source state is not Bottom."""
    out = []
    for t in ats.transitions:
        shape = binary_operands(t.edge.stm)
        if shape is None or shape[0] != op:
            continue
        if t.pre.bottom:
            continue
        if t.post.bottom:
            log.warning("dropping %s: post-state is false", t.edge)
            continue
        out.append(ToleranceConstraint(t.edge, op, ((t.pre, t.post),), ats.cfa.variables))
    return out


@dataclass(frozen=True)
class Signature:
    """How the hardware ports relate to the statement ``target := x_src op y_src``."""

    x: Operand
    y: Operand
    target: str
    side: tuple[str, ...] = ()

    @property
    def z(self) -> str:
        return f"{self.target}@1"


@dataclass
class MappedConstraint:
    statement: str
    op: str
    signature: Signature
    pairs: list[tuple[Conjunction, Conjunction]]
    location: str = ""

    @property
    def side_vars(self) -> tuple[str, ...]:
        return self.signature.side

    def same_as(self, other: "MappedConstraint") -> bool:
        return (self.signature == other.signature and self.op == other.op
                and self.statement == other.statement and self.pairs == other.pairs)


def _operand(e) -> Operand:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Const):
        return e.value
    raise ValueError(f"operand {e} is neither variable nor constant")


def _map_pair(pre: Conjunction, post: Conjunction, v: Operand, w: Operand, u: str):
    # pre: operands become x, y; facts about the target's old value are dropped
    operand_vars = {o for o in (v, w) if isinstance(o, str)}
    pre_lits = [q for q in pre.literals if u in operand_vars or u not in q.vars]
    rename = {}
    extra: list[Atom] = []
    if isinstance(v, str):
        rename[v] = "x"
    else:
        extra.append(Atom.of("x", "==", v))
    if isinstance(w, str):
        if w == v:
            extra.append(Atom.of("x", "==", "y"))
        else:
            rename[w] = "y"
    else:
        extra.append(Atom.of("y", "==", w))
    mpre = Conjunction(q.rename(rename) for q in pre_lits) & extra
    # post: the target becomes z; unchanged operands keep their port names
    post_rename = {u: "z"}
    post_rename.update({o: n for o, n in rename.items() if o != u})
    mapped = [q.rename(post_rename) for q in post.literals]
    if w == v and isinstance(v, str) and v != u:
        mapped = [q.rename({"y": "x"}) for q in mapped]
    kept = [q for q in mapped if "z" in q.vars or entails(mpre, q) is not Entailment.PROVED]
    return mpre, Conjunction(kept)


def map_to_signature(tc: ToleranceConstraint) -> MappedConstraint:
    shape = binary_operands(tc.statement)
    if shape is None:
        raise ValueError(f"{tc.statement} is not of the form u := v op w")
    op, a, b = shape
    clash = RESERVED_NAMES & set(tc.program_vars)
    if clash:
        raise ValueError(f"hardware port name(s) {sorted(clash)} used as program variables")
    v, w, u = _operand(a), _operand(b), tc.statement.target
    pairs = [_map_pair(pre, post, v, w, u) for pre, post in tc.pairs]
    side: set[str] = set()
    for pre, post in pairs:
        side |= (pre.vars | post.vars) - RESERVED_NAMES
    sig = Signature(v, w, u, tuple(sorted(side)))
    loc = f"{tc.edge.src} -> {tc.edge.dst}"
    return MappedConstraint(str(tc.statement), op, sig, pairs, loc)


# ---------------------------------------------------------------------------
# SMT-LIB-like text form


def _smt_const(c: int) -> str:
    return str(c) if c >= 0 else f"(- {-c})"


def _smt_term(t: LinExpr) -> str:
    pos: list[str] = []
    neg: list[str] = []
    for v, c in t.coeffs:
        (pos if c > 0 else neg).append(v if abs(c) == 1 else f"(* {abs(c)} {v})")
    if t.const > 0:
        pos.append(str(t.const))
    elif t.const < 0:
        neg.append(str(-t.const))
    if not neg:
        if not pos:
            return "0"
        return pos[0] if len(pos) == 1 else f"(+ {' '.join(pos)})"
    head = "0" if not pos else pos[0] if len(pos) == 1 else f"(+ {' '.join(pos)})"
    if not pos and len(neg) == 1 and neg[0].isdigit():
        return f"(- {neg[0]})"
    return f"(- {head} {' '.join(neg)})"


def smt_atom(q: Atom) -> str:
    l, r = _smt_term(q.lhs), _smt_term(q.rhs)
    return {
        "<=": f"(<= {l} {r})", "<": f"(< {l} {r})",
        ">=": f"(<= {r} {l})", ">": f"(< {r} {l})",
        "==": f"(= {l} {r})", "!=": f"(not (= {l} {r}))",
    }[q.cmp]


def smt_conjunction(c: Conjunction) -> str:
    if c.bottom:
        return "false"
    if not c.literals:
        return "true"
    if len(c.literals) == 1:
        return smt_atom(c.literals[0])
    return "(and " + " ".join(smt_atom(q) for q in c.literals) + ")"


def _sig_operand(o: Operand) -> str:
    return _smt_const(o) if isinstance(o, int) else o


def dumps(mc: MappedConstraint) -> str:
    sig = mc.signature
    side = " ".join(sig.side)
    lines = [
        f"; statement: {mc.statement}",
        f"; operator: {mc.op}",
    ]
    if mc.location:
        lines.append(f"; edge: {mc.location}")
    lines.append(
        f"(set-info :signature ((x {_sig_operand(sig.x)}) (y {_sig_operand(sig.y)}) "
        f"(z {sig.z}) (side{' ' + side if side else ''})))"
    )
    for i, (pre, post) in enumerate(mc.pairs):
        lines.append(f"(define-fun Q_{2 * i + 1} () Bool {smt_conjunction(pre)})")
        lines.append(f"(define-fun Q_{2 * i + 2} () Bool {smt_conjunction(post)})")
    return "\n".join(lines) + "\n"


def serialize(mc: MappedConstraint, path: str | Path) -> None:
    Path(path).write_text(dumps(mc))


class ConstraintParseError(ParseError):
    pass


_TOKEN = re.compile(r"\s*(?:(;[^\n]*)|(\()|(\))|([^\s();]+))")


@dataclass
class _Sym:
    text: str
    line: int
    col: int


@dataclass
class _List:
    items: list = field(default_factory=list)
    line: int = 0
    col: int = 0


def _read_sexprs(text: str) -> tuple[list[_List | _Sym], dict[str, str]]:
    """Top-level S-expressions plus ``; key: value`` header comments."""
    comments: dict[str, str] = {}
    stack: list[_List] = [_List()]
    pos = 0
    line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def where(offset: int) -> tuple[int, int]:
        lo, hi = 0, len(line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if line_starts[mid] <= offset:
                lo = mid
            else:
                hi = mid - 1
        return lo + 1, offset - line_starts[lo] + 1

    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            if text[pos:].strip() == "":
                break
            line, col = where(pos)
            raise ConstraintParseError("unexpected character", line, col)
        pos = m.end()
        comment, lpar, rpar, sym = m.groups()
        start = m.start(m.lastindex) if m.lastindex else pos
        line, col = where(start)
        if comment is not None:
            body = comment[1:].strip()
            if ":" in body:
                key, _, value = body.partition(":")
                comments.setdefault(key.strip(), value.strip())
        elif lpar:
            stack.append(_List([], line, col))
        elif rpar:
            if len(stack) == 1:
                raise ConstraintParseError("unbalanced ')'", line, col)
            done = stack.pop()
            stack[-1].items.append(done)
        elif sym:
            stack[-1].items.append(_Sym(sym, line, col))
    if len(stack) != 1:
        open_list = stack[-1]
        raise ConstraintParseError("unbalanced '('", open_list.line, open_list.col)
    return stack[0].items, comments


def _err(node, message: str) -> ConstraintParseError:
    return ConstraintParseError(message, node.line, node.col)


def _int(node) -> int | None:
    if isinstance(node, _Sym) and re.fullmatch(r"\d+", node.text):
        return int(node.text)
    if (isinstance(node, _List) and len(node.items) == 2 and isinstance(node.items[0], _Sym)
            and node.items[0].text == "-"):
        inner = _int(node.items[1])
        if inner is not None:
            return -inner
    return None


def _term(node) -> LinExpr:
    c = _int(node)
    if c is not None:
        return LinExpr.constant(c)
    if isinstance(node, _Sym):
        if not re.fullmatch(r"[A-Za-z_][\w@']*", node.text):
            raise _err(node, f"bad symbol {node.text!r}")
        return LinExpr.var(node.text)
    if not node.items or not isinstance(node.items[0], _Sym):
        raise _err(node, "expected an arithmetic term")
    head, args = node.items[0].text, [_term(a) for a in node.items[1:]]
    if head == "+" and args:
        out = LinExpr()
        for a in args:
            out = out + a
        return out
    if head == "-" and len(args) == 1:
        return -args[0]
    if head == "-" and args:
        out = args[0]
        for a in args[1:]:
            out = out - a
        return out
    if head == "*" and len(args) == 2:
        if args[0].is_constant():
            return args[1].scale(args[0].const)
        if args[1].is_constant():
            return args[0].scale(args[1].const)
        raise _err(node, "nonlinear product")
    raise _err(node, f"unsupported term operator {head!r}")


_REL = {"<=": "<=", "<": "<", "=": "==", ">=": ">=", ">": ">"}


def _atom(node) -> Atom:
    if not isinstance(node, _List) or not node.items or not isinstance(node.items[0], _Sym):
        raise _err(node, "expected a comparison")
    head = node.items[0].text
    if head == "not" and len(node.items) == 2:
        return _atom(node.items[1]).negate()
    if head in _REL and len(node.items) == 3:
        return Atom(_term(node.items[1]), _REL[head], _term(node.items[2]))
    raise _err(node, f"unsupported predicate {head!r}")


def _conjunction(node) -> Conjunction:
    if isinstance(node, _Sym):
        if node.text == "true":
            return Conjunction()
        if node.text == "false":
            return BOTTOM
        raise _err(node, f"expected a formula, got {node.text!r}")
    if node.items and isinstance(node.items[0], _Sym) and node.items[0].text == "and":
        return Conjunction(_atom(a) for a in node.items[1:])
    return Conjunction([_atom(node)])


def _operand_node(node) -> Operand:
    c = _int(node)
    if c is not None:
        return c
    if isinstance(node, _Sym):
        return node.text
    raise _err(node, "expected a variable or constant")


def loads(text: str) -> MappedConstraint:
    forms, comments = _read_sexprs(text)
    signature: Signature | None = None
    defs: dict[int, Conjunction] = {}
    for form in forms:
        if not isinstance(form, _List) or not form.items or not isinstance(form.items[0], _Sym):
            raise _err(form, "expected a command")
        head = form.items[0].text
        if head == "set-info":
            if len(form.items) != 3 or not isinstance(form.items[1], _Sym) \
                    or form.items[1].text != ":signature" or not isinstance(form.items[2], _List):
                raise _err(form, "malformed set-info")
            entries: dict[str, list] = {}
            for entry in form.items[2].items:
                if not isinstance(entry, _List) or not entry.items or not isinstance(entry.items[0], _Sym):
                    raise _err(entry, "malformed signature entry")
                entries[entry.items[0].text] = entry.items[1:]
            try:
                x, = entries["x"]
                y, = entries["y"]
                z, = entries["z"]
            except (KeyError, ValueError):
                raise _err(form, "signature needs exactly one x, y and z") from None
            if not isinstance(z, _Sym) or not z.text.endswith("@1"):
                raise _err(z, "z must name the target as <var>@1")
            side = tuple(s.text for s in entries.get("side", []) if isinstance(s, _Sym))
            signature = Signature(_operand_node(x), _operand_node(y), z.text[:-2], side)
        elif head == "define-fun":
            items = form.items
            if (len(items) != 5 or not isinstance(items[1], _Sym) or not isinstance(items[2], _List)
                    or items[2].items or not isinstance(items[3], _Sym) or items[3].text != "Bool"):
                raise _err(form, "malformed define-fun")
            m = re.fullmatch(r"Q_(\d+)", items[1].text)
            if not m:
                raise _err(items[1], "definitions must be named Q_<n>")
            defs[int(m.group(1))] = _conjunction(items[4])
        else:
            raise _err(form, f"unknown command {head!r}")
    if signature is None:
        raise ConstraintParseError("missing signature", 1, 1)
    if not defs or sorted(defs) != list(range(1, len(defs) + 1)) or len(defs) % 2:
        raise ConstraintParseError("definitions must come in Q_1/Q_2, Q_3/Q_4, ... pairs", 1, 1)
    pairs = [(defs[i], defs[i + 1]) for i in range(1, len(defs), 2)]
    return MappedConstraint(comments.get("statement", ""), comments.get("operator", "+"),
                            signature, pairs, comments.get("edge", ""))


def parse(path: str | Path) -> MappedConstraint:
    return loads(Path(path).read_text())


def mapped_constraints(ats: ATS, op: str) -> list[MappedConstraint]:
    return [map_to_signature(tc) for tc in extract(ats, op)]


def constant_equalities(mc: MappedConstraint) -> Iterable[Atom]:
    """Equalities ``x == c`` / ``y == c`` implied by constant operands."""
    if isinstance(mc.signature.x, int):
        yield Atom.of("x", "==", mc.signature.x)
    if isinstance(mc.signature.y, int):
        yield Atom.of("y", "==", mc.signature.y)
