"""Program parsing into control-flow automata and the CFA-level transformations
(three-address-code normalization, loop-start detection, ranking-function
instrumentation)."""

from __future__ import annotations

import logging
import re
from collections import deque
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Union

import networkx as nx

from .syntax import (
    BExpr,
    BinOp,
    Cmp,
    Const,
    Expr,
    ExprParser,
    Input,
    Not,
    ParseError,
    Token,
    TokenStream,
    Var,
    expr_ops,
    expr_vars,
    parse_bexpr,
    parse_expr,
    rename_expr,
    tokenize,
)

log = logging.getLogger(__name__)

RESERVED_NAMES = frozenset({"x", "y", "z"})
TEMP_PREFIX = "__t"


class UnsupportedControlFlow(Exception):
    pass


class InstrumentationError(Exception):
    pass


# ---------------------------------------------------------------------------
# statements and automata


@dataclass(frozen=True)
class Assume:
    cond: BExpr

    def __str__(self) -> str:
        return f"assume {self.cond}"


@dataclass(frozen=True)
class Assign:
    target: str
    expr: Expr

    def __str__(self) -> str:
        return f"{self.target} := {self.expr}"


@dataclass(frozen=True)
class Skip:
    label: str = ""

    def __str__(self) -> str:
        return f"skip {self.label}".rstrip()


Statement = Union[Assume, Assign, Skip]


def statement_vars(stm: Statement) -> set[str]:
    if isinstance(stm, Assume):
        return expr_vars(stm.cond)
    if isinstance(stm, Assign):
        return {stm.target} | expr_vars(stm.expr)
    return set()


def binary_operands(stm: Statement) -> tuple[str, Expr, Expr] | None:
    """``(op, a, b)`` when ``stm`` has the 3AC shape ``v := a op b``."""
    if isinstance(stm, Assign) and isinstance(stm.expr, BinOp):
        e = stm.expr
        if isinstance(e.left, (Var, Const)) and isinstance(e.right, (Var, Const)):
            return e.op, e.left, e.right
    return None


@dataclass(frozen=True)
class Edge:
    src: int
    stm: Statement
    dst: int

    def __str__(self) -> str:
        return f"{self.src} -> {self.dst} : {self.stm}"


@dataclass(frozen=True)
class CFA:
    locations: frozenset[int]
    initial: int
    edges: tuple[Edge, ...]
    errors: frozenset[int]
    variables: tuple[str, ...]
    arrays: tuple[tuple[str, int], ...] = ()
    # source line of each `while` -> its loop-head location
    loop_lines: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.initial not in self.locations:
            raise ValueError("initial location missing")
        if not self.errors <= self.locations:
            raise ValueError("error location missing")
        for e in self.edges:
            if e.src not in self.locations or e.dst not in self.locations:
                raise ValueError(f"edge endpoint missing: {e}")

    @cached_property
    def _out(self) -> dict[int, list[Edge]]:
        out: dict[int, list[Edge]] = {l: [] for l in self.locations}
        for e in self.edges:
            out[e.src].append(e)
        return out

    @cached_property
    def _in(self) -> dict[int, list[Edge]]:
        inc: dict[int, list[Edge]] = {l: [] for l in self.locations}
        for e in self.edges:
            inc[e.dst].append(e)
        return inc

    def out_edges(self, loc: int) -> list[Edge]:
        return self._out[loc]

    def in_edges(self, loc: int) -> list[Edge]:
        return self._in[loc]

    def graph(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(self.locations)
        for e in self.edges:
            g.add_edge(e.src, e.dst, label=str(e.stm))
        return g

    def next_location(self) -> int:
        return max(self.locations) + 1

    def exits(self) -> list[int]:
        return sorted(l for l in self.locations if not self._out[l] and l not in self.errors)


# ---------------------------------------------------------------------------
# program parser

@dataclass
class _SAssign:
    target: str
    expr: Expr


@dataclass
class _SSkip:
    label: str


@dataclass
class _SIf:
    cond: BExpr
    then: list
    other: list


@dataclass
class _SWhile:
    cond: BExpr
    body: list
    line: int


@dataclass
class _SErr:
    line: int


class _ProgramParser:
    def __init__(self, text: str):
        self.ts = TokenStream(tokenize(text))
        self.scalars: list[str] = []
        self.arrays: dict[str, int] = {}
        # reported after the whole text parses so syntax errors come first
        self.reserved: list[Token] = []

    def _check_var(self, tok: Token) -> None:
        if tok.text in self.arrays:
            raise ParseError(f"array {tok.text!r} used as a scalar", tok.line, tok.col)
        if tok.text not in self.scalars:
            raise ParseError(f"undeclared variable {tok.text!r}", tok.line, tok.col)

    def _exprs(self, allow_input: bool = False) -> ExprParser:
        return ExprParser(self.ts, self._check_var, allow_input)

    def _ident(self) -> Token:
        tok = self.ts.peek
        if tok.kind != "ident":
            raise ParseError(f"expected identifier, found {tok.text or 'end of input'!r}", tok.line, tok.col)
        return self.ts.next()

    def declaration(self) -> None:
        self.ts.expect("int")
        tok = self._ident()
        name = tok.text
        if name in self.scalars or name in self.arrays:
            raise ParseError(f"duplicate declaration of {name!r}", tok.line, tok.col)
        if name in RESERVED_NAMES or name.startswith("__"):
            self.reserved.append(tok)
        if self.ts.accept("["):
            size = self.ts.peek
            if size.kind != "int":
                raise ParseError("expected array size", size.line, size.col)
            self.ts.next()
            self.ts.expect("]")
            self.arrays[name] = int(size.text)
        else:
            self.scalars.append(name)
        self.ts.expect(";")

    def block(self) -> list:
        self.ts.expect("{")
        stmts = []
        while not self.ts.at("}"):
            if self.ts.peek.kind == "eof":
                raise self.ts.error("unterminated block")
            stmts.append(self.statement())
        self.ts.expect("}")
        return stmts

    def statement(self):
        tok = self.ts.peek
        if self.ts.accept("if"):
            self.ts.expect("(")
            cond = self._exprs().bexpr()
            self.ts.expect(")")
            then = self.block()
            other = self.block() if self.ts.accept("else") else []
            return _SIf(cond, then, other)
        if self.ts.accept("while"):
            self.ts.expect("(")
            cond = self._exprs().bexpr()
            self.ts.expect(")")
            return _SWhile(cond, self.block(), tok.line)
        if self.ts.accept("ERR"):
            self.ts.expect(":")
            self.ts.expect(";")
            return _SErr(tok.line)
        if tok.kind == "kw" and tok.text == "int":
            raise ParseError("declarations must precede statements", tok.line, tok.col)
        name = self._ident()
        if self.ts.accept("["):
            if name.text not in self.arrays:
                raise ParseError(f"{name.text!r} is not an array", name.line, name.col)
            index = self._exprs().expr()
            self.ts.expect("]")
            self.ts.expect(":=")
            value = self._exprs().expr()
            self.ts.expect(";")
            return _SSkip(f"{name.text}[{index}] := {value};")
        self._check_var(name)
        self.ts.expect(":=")
        expr = self._exprs(allow_input=True).expr()
        if _contains_input(expr) and not isinstance(expr, Input):
            raise ParseError("input() must be the whole right-hand side", name.line, name.col)
        self.ts.expect(";")
        return _SAssign(name.text, expr)

    def program(self):
        while self.ts.at("int"):
            self.declaration()
        stmts = []
        while self.ts.peek.kind != "eof":
            stmts.append(self.statement())
        if self.reserved:
            tok = self.reserved[0]
            raise ParseError(f"{tok.text!r} is a reserved name", tok.line, tok.col)
        return stmts


def _contains_input(e: Expr) -> bool:
    if isinstance(e, Input):
        return True
    if isinstance(e, BinOp):
        return _contains_input(e.left) or _contains_input(e.right)
    return False


def _negation(cond: BExpr) -> BExpr:
    return cond.arg if isinstance(cond, Not) else Not(cond)


class _Builder:
    """Emits edges for structured statements; joins are resolved by merging
    locations with a union-find at the end."""

    def __init__(self):
        self.count = 0
        self.edges: list[tuple[int, Statement, int]] = []
        self.errors: set[int] = set()
        self.loop_lines: dict[int, int] = {}
        self.parent: dict[int, int] = {}

    def fresh(self) -> int:
        loc = self.count
        self.count += 1
        self.parent[loc] = loc
        return loc

    def find(self, loc: int) -> int:
        while self.parent[loc] != loc:
            self.parent[loc] = self.parent[self.parent[loc]]
            loc = self.parent[loc]
        return loc

    def merge(self, loc: int, into: int) -> None:
        self.parent[self.find(loc)] = self.find(into)

    def seq(self, stmts: list, src: int) -> int | None:
        cur: int | None = src
        for s in stmts:
            if cur is None:
                # dead code after ERR; it becomes unreachable and is pruned
                cur = self.fresh()
            cur = self.stmt(s, cur)
        return cur

    def stmt(self, s, src: int) -> int | None:
        if isinstance(s, _SAssign):
            dst = self.fresh()
            self.edges.append((src, Assign(s.target, s.expr), dst))
            return dst
        if isinstance(s, _SSkip):
            dst = self.fresh()
            self.edges.append((src, Skip(s.label), dst))
            return dst
        if isinstance(s, _SErr):
            self.errors.add(src)
            return None
        if isinstance(s, _SIf):
            t = self.fresh()
            self.edges.append((src, Assume(s.cond), t))
            e = self.fresh()
            self.edges.append((src, Assume(_negation(s.cond)), e))
            then_end = self.seq(s.then, t)
            else_end = self.seq(s.other, e)
            if then_end is None:
                return else_end
            if else_end is not None:
                self.merge(else_end, then_end)
            return then_end
        if isinstance(s, _SWhile):
            head = src
            self.loop_lines[s.line] = head
            body = self.fresh()
            self.edges.append((head, Assume(s.cond), body))
            body_end = self.seq(s.body, body)
            if body_end is not None:
                self.merge(body_end, head)
            exit_ = self.fresh()
            self.edges.append((head, Assume(_negation(s.cond)), exit_))
            return exit_
        raise TypeError(s)


def parse_program(text: str) -> CFA:
    """Parse mini-language source into a CFA."""
    parser = _ProgramParser(text)
    stmts = parser.program()
    b = _Builder()
    entry = cur = b.fresh()
    for name, size in parser.arrays.items():
        nxt = b.fresh()
        b.edges.append((cur, Skip(f"int {name}[{size}];"), nxt))
        cur = nxt
    b.seq(stmts, cur)
    edges = [Edge(b.find(s), stm, b.find(d)) for s, stm, d in b.edges]
    errors = {b.find(l) for l in b.errors}
    loops = {line: b.find(l) for line, l in b.loop_lines.items()}
    return _finish(b.find(entry), edges, errors, tuple(parser.scalars),
                   tuple(parser.arrays.items()), loops)


def _finish(entry: int, edges: list[Edge], errors: set[int], variables: tuple[str, ...],
            arrays: tuple, loops: dict[int, int]) -> CFA:
    """Prune unreachable locations and renumber in breadth-first order."""
    out: dict[int, list[Edge]] = {}
    for e in edges:
        out.setdefault(e.src, []).append(e)
    order = {entry: 0}
    queue = deque([entry])
    while queue:
        loc = queue.popleft()
        for e in out.get(loc, []):
            if e.dst not in order:
                order[e.dst] = len(order)
                queue.append(e.dst)
    all_locs = {entry} | {e.src for e in edges} | {e.dst for e in edges} | errors
    dropped = all_locs - order.keys()
    if dropped:
        log.warning("pruned %d unreachable location(s)", len(dropped))
    kept = [Edge(order[e.src], e.stm, order[e.dst]) for e in edges if e.src in order]
    return CFA(
        locations=frozenset(order.values()),
        initial=0,
        edges=tuple(kept),
        errors=frozenset(order[l] for l in errors if l in order),
        variables=variables,
        arrays=arrays,
        loop_lines=tuple(sorted((line, order[l]) for line, l in loops.items() if l in order)),
    )


# ---------------------------------------------------------------------------
# textual CFA form (pretty printer and reader)


def format_cfa(cfa: CFA) -> str:
    lines = [f"vars: {' '.join(cfa.variables)}"]
    if cfa.arrays:
        lines.append("arrays: " + " ".join(f"{n}[{s}]" for n, s in cfa.arrays))
    lines.append(f"init: {cfa.initial}")
    lines.append("errors: " + " ".join(str(l) for l in sorted(cfa.errors)))
    for line, loc in cfa.loop_lines:
        lines.append(f"loop: {line} {loc}")
    lonely = cfa.locations - {e.src for e in cfa.edges} - {e.dst for e in cfa.edges}
    lonely -= {cfa.initial} | set(cfa.errors)
    if lonely:
        lines.append("locations: " + " ".join(str(l) for l in sorted(lonely)))
    for e in cfa.edges:
        lines.append(str(e))
    return "\n".join(lines) + "\n"


_EDGE_RE = re.compile(r"^(\d+)\s*->\s*(\d+)\s*:\s*(.*)$")


def parse_cfa(text: str) -> CFA:
    """Read the format produced by :func:`format_cfa`."""
    variables: tuple[str, ...] = ()
    arrays: list[tuple[str, int]] = []
    initial = 0
    errors: set[int] = set()
    extra: set[int] = set()
    loops: dict[int, int] = {}
    edges: list[Edge] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        try:
            m = _EDGE_RE.match(line)
            if m:
                edges.append(Edge(int(m.group(1)), _parse_statement(m.group(3)), int(m.group(2))))
                continue
            key, _, rest = line.partition(":")
            rest = rest.split()
            if key == "vars":
                variables = tuple(rest)
            elif key == "arrays":
                for item in rest:
                    name, size = item.rstrip("]").split("[")
                    arrays.append((name, int(size)))
            elif key == "init":
                initial = int(rest[0])
            elif key == "errors":
                errors = {int(t) for t in rest}
            elif key == "loop":
                loops[int(rest[0])] = int(rest[1])
            elif key == "locations":
                extra = {int(t) for t in rest}
            else:
                raise ParseError(f"unrecognised line {line!r}")
        except ParseError as exc:
            raise ParseError(exc.message, lineno, exc.col) from None
        except (ValueError, IndexError):
            raise ParseError(f"malformed line {line!r}", lineno, 1) from None
    locs = {initial} | errors | extra | {e.src for e in edges} | {e.dst for e in edges}
    return CFA(frozenset(locs), initial, tuple(edges), frozenset(errors), variables,
               tuple(arrays), tuple(sorted(loops.items())))


def _parse_statement(text: str) -> Statement:
    text = text.strip()
    if text == "skip" or text.startswith("skip "):
        return Skip(text[4:].strip())
    if text.startswith("assume "):
        return Assume(parse_bexpr(text[7:]))
    target, sep, rhs = text.partition(":=")
    if not sep:
        raise ParseError(f"bad statement {text!r}")
    rhs = rhs.strip()
    if rhs == "input()":
        return Assign(target.strip(), Input())
    return Assign(target.strip(), parse_expr(rhs))


# ---------------------------------------------------------------------------
# three-address code


def _is_atomic(e: Expr) -> bool:
    return isinstance(e, (Var, Const, Input))


def is_linear_expr(e: Expr) -> bool:
    if isinstance(e, (Var, Const)):
        return True
    if isinstance(e, BinOp):
        if e.op in ("+", "-"):
            return is_linear_expr(e.left) and is_linear_expr(e.right)
        if e.op == "*":
            return (is_linear_expr(e.left) and is_linear_expr(e.right)
                    and (not expr_vars(e.left) or not expr_vars(e.right)))
    return False


class _Fresh:
    def __init__(self, cfa: CFA):
        self.next_loc = cfa.next_location()
        used = set(cfa.variables)
        self.next_tmp = 0
        while f"{TEMP_PREFIX}{self.next_tmp}" in used:
            self.next_tmp += 1
        self.used = used
        self.new_vars: list[str] = []

    def loc(self) -> int:
        l = self.next_loc
        self.next_loc += 1
        return l

    def tmp(self) -> str:
        while f"{TEMP_PREFIX}{self.next_tmp}" in self.used:
            self.next_tmp += 1
        name = f"{TEMP_PREFIX}{self.next_tmp}"
        self.next_tmp += 1
        self.used.add(name)
        self.new_vars.append(name)
        return name


def _flatten(e: Expr, fresh: _Fresh, out: list[Assign]) -> Expr:
    """Emit temporaries for every operator application below the root; return
    the root with atomic operands."""
    if _is_atomic(e):
        return e
    left = _hoist(e.left, fresh, out)
    right = _hoist(e.right, fresh, out)
    return BinOp(e.op, left, right)


def _hoist(e: Expr, fresh: _Fresh, out: list[Assign]) -> Expr:
    if _is_atomic(e):
        return e
    root = _flatten(e, fresh, out)
    t = fresh.tmp()
    out.append(Assign(t, root))
    return Var(t)


def normalize_3ac(cfa: CFA, approx_ops: Iterable[str] = ("+",)) -> CFA:
    """Decompose compound expressions so each operator sits alone in some
    ``v := a op b``.

    Comparison sides inside assumes are hoisted into temporaries when they
    use an operator from ``approx_ops`` or are not linear.
    """
    approx = set(approx_ops)
    fresh = _Fresh(cfa)
    edges: list[Edge] = []

    def chain(src: int, stms: list[Statement], dst: int) -> None:
        cur = src
        for i, stm in enumerate(stms):
            nxt = dst if i == len(stms) - 1 else fresh.loc()
            edges.append(Edge(cur, stm, nxt))
            cur = nxt

    by_src: dict[int, list[Edge]] = {}
    for e in cfa.edges:
        by_src.setdefault(e.src, []).append(e)

    for src in sorted(by_src):
        group = by_src[src]
        assumes = [e for e in group if isinstance(e.stm, Assume)]
        others = [e for e in group if not isinstance(e.stm, Assume)]
        for e in others:
            if isinstance(e.stm, Assign) and not _is_atomic(e.stm.expr):
                pre: list[Assign] = []
                root = _flatten(e.stm.expr, fresh, pre)
                chain(e.src, pre + [Assign(e.stm.target, root)], e.dst)
            else:
                edges.append(e)
        if not assumes:
            continue
        hoisted: dict[Expr, Var] = {}
        pre = []

        def side(ex: Expr) -> Expr:
            if _is_atomic(ex):
                return ex
            if not (expr_ops(ex) & approx) and is_linear_expr(ex):
                return ex
            if ex not in hoisted:
                hoisted[ex] = _hoist(ex, fresh, pre)
            return hoisted[ex]

        def rewrite(b: BExpr) -> BExpr:
            if isinstance(b, Cmp):
                return Cmp(b.op, side(b.left), side(b.right))
            if isinstance(b, Not):
                return Not(rewrite(b.arg))
            if hasattr(b, "left"):
                return type(b)(rewrite(b.left), rewrite(b.right))
            return b

        rewritten = [Edge(e.src, Assume(rewrite(e.stm.cond)), e.dst) for e in assumes]
        if pre:
            mid = fresh.loc()
            chain(src, pre, mid)
            rewritten = [Edge(mid, e.stm, e.dst) for e in rewritten]
        edges.extend(rewritten)

    locs = set(cfa.locations) | {e.src for e in edges} | {e.dst for e in edges}
    return replace(cfa, locations=frozenset(locs), edges=tuple(edges),
                   variables=cfa.variables + tuple(fresh.new_vars))


def is_3ac(cfa: CFA, approx_ops: Iterable[str] = ("+",)) -> bool:
    approx = set(approx_ops)
    for e in cfa.edges:
        if isinstance(e.stm, Assign) and not _is_atomic(e.stm.expr):
            if binary_operands(e.stm) is None:
                return False
        if isinstance(e.stm, Assume):
            for c in _comparisons(e.stm.cond):
                for s in (c.left, c.right):
                    if not _is_atomic(s) and ((expr_ops(s) & approx) or not is_linear_expr(s)):
                        return False
    return True


def _comparisons(b: BExpr) -> list[Cmp]:
    if isinstance(b, Cmp):
        return [b]
    if isinstance(b, Not):
        return _comparisons(b.arg)
    if hasattr(b, "left"):
        return _comparisons(b.left) + _comparisons(b.right)
    return []


# ---------------------------------------------------------------------------
# loops


@dataclass(frozen=True)
class Loop:
    header: int
    start: int            # first location of the body
    exit: int             # target of the negated loop condition
    body: frozenset[int]  # natural loop, header included
    back_edges: tuple[Edge, ...]


def _is_assume_pair(edges: list[Edge]) -> bool:
    if len(edges) != 2 or not all(isinstance(e.stm, Assume) for e in edges):
        return False
    a, b = edges[0].stm.cond, edges[1].stm.cond
    return a == _negation(b) or b == _negation(a)


def find_loops(cfa: CFA) -> list[Loop]:
    """Natural loops of a reducible CFA, each with its body start.

    The body start is found by following the single-successor chain from the
    header (hoisted condition temporaries) to the first assume pair that has
    one successor inside the loop and one outside.
    """
    g = nx.DiGraph()
    g.add_nodes_from(cfa.locations)
    g.add_edges_from((e.src, e.dst) for e in cfa.edges)
    idom = nx.immediate_dominators(g, cfa.initial)

    def dominates(h: int, n: int) -> bool:
        while True:
            if n == h:
                return True
            if idom[n] == n:
                return False
            n = idom[n]

    back: dict[int, list[Edge]] = {}
    forward = nx.DiGraph()
    forward.add_nodes_from(cfa.locations)
    for e in cfa.edges:
        if e.src in idom and dominates(e.dst, e.src):
            back.setdefault(e.dst, []).append(e)
        else:
            forward.add_edge(e.src, e.dst)
    if not nx.is_directed_acyclic_graph(forward):
        raise UnsupportedControlFlow("irreducible control flow")

    loops = []
    for header in sorted(back):
        body = {header}
        stack = [e.src for e in back[header]]
        while stack:
            n = stack.pop()
            if n not in body:
                body.add(n)
                stack.extend(e.src for e in cfa.in_edges(n))
        cur, seen = header, set()
        start = exit_ = None
        while cur not in seen:
            seen.add(cur)
            outs = cfa.out_edges(cur)
            if _is_assume_pair(outs):
                inside = [e for e in outs if e.dst in body]
                outside = [e for e in outs if e.dst not in body]
                if len(inside) == 1 and len(outside) == 1:
                    start, exit_ = inside[0].dst, outside[0].dst
                break
            if len(outs) != 1 or outs[0].dst not in body:
                break
            cur = outs[0].dst
        if start is None:
            raise UnsupportedControlFlow(f"loop at location {header} has no conditional split")
        loops.append(Loop(header, start, exit_, frozenset(body), tuple(back[header])))
    return loops


def detect_loop_starts(cfa: CFA) -> set[int]:
    return {lp.start for lp in find_loops(cfa)}


# ---------------------------------------------------------------------------
# termination instrumentation


@dataclass(frozen=True)
class RankingSpec:
    """Ranking function for one loop: ``loop`` is a source line of the
    ``while`` (int) or a location label ``L<n>`` (str)."""

    loop: int | str
    rank: Expr


def parse_ranking(text: str) -> list[RankingSpec]:
    specs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.match(r"^at\s+(\S+)\s+rank\s+(.+)$", line)
        if not m:
            raise ParseError("expected 'at <label-or-line> rank <expr>'", lineno, 1)
        where = m.group(1)
        loop: int | str
        if where.isdigit():
            loop = int(where)
        elif re.fullmatch(r"L\d+", where):
            loop = where
        else:
            raise ParseError(f"bad loop reference {where!r}", lineno, 1)
        try:
            rank = parse_expr(m.group(2))
        except ParseError as exc:
            raise ParseError(exc.message, lineno, m.start(2) + exc.col) from None
        if not is_linear_expr(rank):
            raise ParseError("ranking function must be linear", lineno, m.start(2) + 1)
        specs.append(RankingSpec(loop, rank))
    return specs


def _resolve_loop(cfa: CFA, loops: list[Loop], spec: RankingSpec) -> Loop:
    if isinstance(spec.loop, int):
        heads = dict(cfa.loop_lines)
        if spec.loop not in heads:
            raise InstrumentationError(f"no while loop on line {spec.loop}")
        matches = [lp for lp in loops if lp.header == heads[spec.loop]]
    else:
        loc = int(spec.loop[1:])
        matches = [lp for lp in loops if lp.start == loc]
    if not matches:
        raise InstrumentationError(f"{spec.loop} is not a loop start")
    return matches[0]


def instrument_termination(cfa: CFA, specs: list[RankingSpec]) -> CFA:
    """Turn ranking-function obligations into reachable-ERR checks.

    At the body start: ``if (!(rank >= 0)) ERR`` followed by ``old_v := v``
    for the rank variables the loop may change; after each iteration (on
    every back edge): ``if (!(rank < rank[v := old_v])) ERR``.
    """
    if not specs:
        return cfa
    for spec in specs:
        unknown = expr_vars(spec.rank) - set(cfa.variables)
        if unknown:
            raise InstrumentationError(f"rank uses undeclared variable(s) {sorted(unknown)}")
    # resolve every spec against the original numbering; loop starts survive
    # instrumentation of other loops because locations are never renumbered
    starts = [_resolve_loop(cfa, find_loops(cfa), s).start for s in specs]

    for spec, start in zip(specs, starts):
        loop = next(lp for lp in find_loops(cfa) if lp.start == start)
        changed = {e.stm.target for e in cfa.edges
                   if isinstance(e.stm, Assign) and e.src in loop.body and e.dst in loop.body}
        rank_vars = _ordered_vars(spec.rank)
        copies = [v for v in rank_vars if v in changed]
        names = set(cfa.variables)
        old: dict[str, str] = {}
        for v in copies:
            name = f"old_{v}"
            k = 1
            while name in names:
                name = f"old_{v}_{k}"
                k += 1
            names.add(name)
            old[v] = name

        next_loc = cfa.next_location()

        def fresh() -> int:
            nonlocal next_loc
            next_loc += 1
            return next_loc - 1

        back = set(loop.back_edges)
        check = fresh()
        errors = set(cfa.errors)
        bound = Cmp(">=", spec.rank, Const(0))
        err1, cur = fresh(), fresh()
        errors.add(err1)
        edges = [Edge(start, Assume(Not(bound)), err1), Edge(start, Assume(bound), cur)]
        for v in copies:
            nxt = fresh()
            edges.append(Edge(cur, Assign(old[v], Var(v)), nxt))
            cur = nxt
        for e in cfa.edges:
            src = cur if e.src == start else e.src
            dst = check if e in back else e.dst
            edges.append(Edge(src, e.stm, dst))
        decrease = Cmp("<", spec.rank, rename_expr(spec.rank, old))
        err2 = fresh()
        errors.add(err2)
        edges += [Edge(check, Assume(Not(decrease)), err2), Edge(check, Assume(decrease), loop.header)]

        locs = set(cfa.locations) | {e.src for e in edges} | {e.dst for e in edges}
        cfa = replace(cfa, locations=frozenset(locs), edges=tuple(edges), errors=frozenset(errors),
                      variables=cfa.variables + tuple(old[v] for v in copies))
    return cfa


def _ordered_vars(e: Expr) -> list[str]:
    seen: list[str] = []

    def walk(n):
        if isinstance(n, Var) and n.name not in seen:
            seen.append(n.name)
        elif isinstance(n, BinOp):
            walk(n.left)
            walk(n.right)

    walk(e)
    return seen


def count_op(cfa: CFA, op: str) -> int:
    return sum(1 for e in cfa.edges if (b := binary_operands(e.stm)) is not None and b[0] == op)
