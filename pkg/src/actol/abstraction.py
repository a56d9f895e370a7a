"""Cartesian predicate abstraction over a global predicate set: abstraction of
concrete states, abstract post, the worklist fixpoint and DOT export."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .frontend import CFA, Assign, Assume, Edge, Skip, Statement
from .logic import (
    BOTTOM,
    Atom,
    Conjunction,
    Entailment,
    LinExpr,
    NonlinearError,
    Refutation,
    atom_from_cmp,
    entails,
    linearize,
    refute,
)
from .syntax import Input, dnf

Predicates = Sequence[Atom]


def literal_universe(preds: Predicates) -> list[Atom]:
    """P followed-pairwise by its negations: p1, !p1, p2, !p2, ..."""
    out: list[Atom] = []
    for p in preds:
        out += [p, p.negate()]
    return out


def alpha(states: Iterable[Mapping[str, int]], preds: Predicates) -> Conjunction:
    """Literals of P and their negations that hold in every given state."""
    states = list(states)
    if not states:
        return BOTTOM
    return Conjunction(q for q in literal_universe(preds) if all(q.evaluate(s) for s in states))


def closure(a: Conjunction, preds: Predicates) -> Conjunction:
    """All literals over P that are provably entailed by ``a``."""
    if a.bottom:
        return a
    if refute(a) is Refutation.UNSAT:
        return BOTTOM
    return Conjunction(q for q in literal_universe(preds) if entails(a, q) is Entailment.PROVED)


def reduce(a: Conjunction) -> Conjunction:
    """Drop literals entailed by the remaining ones, scanning from the last."""
    if a.bottom:
        return a
    lits = list(a.literals)
    for i in range(len(lits) - 1, -1, -1):
        rest = Conjunction(lits[:i] + lits[i + 1:])
        if entails(rest, lits[i]) is Entailment.PROVED:
            del lits[i]
    return Conjunction(lits)


def _post_closure(a: Conjunction, stm: Statement, preds: Predicates) -> Conjunction:
    if a.bottom:
        return a
    if isinstance(stm, Skip):
        return closure(a, preds)
    if isinstance(stm, Assume):
        result: Conjunction | None = None
        for disjunct in dnf(stm.cond):
            atoms = []
            for c in disjunct:
                try:
                    atoms.append(atom_from_cmp(c))
                except NonlinearError:
                    pass  # dropping a conjunct over-approximates
            post = closure(a & atoms, preds)
            if post.bottom:
                continue
            result = post if result is None else join_closures(result, post)
        return BOTTOM if result is None else result
    if isinstance(stm, Assign):
        v = stm.target
        primed = v + "'"
        ctx = a
        if not isinstance(stm.expr, Input):
            try:
                ctx = a & [Atom(LinExpr.var(primed), "==", linearize(stm.expr))]
            except NonlinearError:
                pass  # unconstrained new value
        if refute(ctx) is Refutation.UNSAT:
            return BOTTOM
        kept = []
        for q in literal_universe(preds):
            if v in q.vars:
                if entails(ctx, q.rename({v: primed})) is Entailment.PROVED:
                    kept.append(q)
            elif entails(ctx, q) is Entailment.PROVED:
                kept.append(q)
        return Conjunction(kept)
    raise TypeError(f"not a statement: {stm!r}")


def abstract_post(a: Conjunction, stm: Statement, preds: Predicates) -> Conjunction:
    """Cartesian post: the predicate literals provable after ``stm`` from ``a``,
    in reduced form."""
    return reduce(_post_closure(a, stm, preds))


def join_closures(a: Conjunction, b: Conjunction) -> Conjunction:
    if a.bottom:
        return b
    if b.bottom:
        return a
    return Conjunction(q for q in a.literals if q in b)


def join(a: Conjunction, b: Conjunction, preds: Predicates) -> Conjunction:
    """Literals over P entailed by both arguments; Bottom is the identity."""
    return reduce(join_closures(closure(a, preds), closure(b, preds)))


@dataclass(frozen=True)
class Transition:
    edge: Edge
    pre: Conjunction
    post: Conjunction


@dataclass
class ATS:
    cfa: CFA
    preds: tuple[Atom, ...]
    states: dict[int, Conjunction]
    transitions: list[Transition] = field(default_factory=list)
    iterations: int = 0

    @property
    def initial(self) -> tuple[Conjunction, int]:
        return self.states[self.cfa.initial], self.cfa.initial


def build_ats(cfa: CFA, preds: Predicates) -> ATS:
    """Worklist fixpoint with one joined state per location.

    States are kept as closures (every provable literal) during iteration so
    that joins are plain intersections and the iteration is monotone; the
    recorded states are reduced.
    """
    preds = tuple(preds)
    s0 = {v: 0 for v in cfa.variables}
    closures: dict[int, Conjunction] = {cfa.initial: alpha([s0], preds)}
    work = deque([cfa.initial])
    queued = {cfa.initial}
    iterations = 0
    while work:
        loc = work.popleft()
        queued.discard(loc)
        iterations += 1
        src = closures[loc]
        for e in cfa.out_edges(loc):
            post = _post_closure(src, e.stm, preds)
            old = closures.get(e.dst)
            new = post if old is None else join_closures(old, post)
            if old is None or new != old:
                closures[e.dst] = new
                if e.dst not in queued:
                    queued.add(e.dst)
                    work.append(e.dst)
    states = {loc: reduce(c) for loc, c in sorted(closures.items())}
    transitions = [
        Transition(e, states[e.src], states[e.dst])
        for e in cfa.edges
        if e.src in states and not states[e.src].bottom
    ]
    return ATS(cfa, preds, states, transitions, iterations)


def is_error_free(ats: ATS) -> bool:
    return all(ats.states.get(loc, BOTTOM).bottom for loc in ats.cfa.errors)


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(ats: ATS) -> str:
    """Graph of locations annotated with their fixpoint conjunction."""
    lines = ["digraph ats {", "  node [shape=box];"]
    for loc in sorted(ats.cfa.locations):
        state = ats.states.get(loc)
        text = "unreached" if state is None else str(state)
        shape = ", style=bold, color=red" if loc in ats.cfa.errors else ""
        lines.append(f'  n{loc} [label="{loc}: {_dot_escape(text)}"{shape}];')
    for e in ats.cfa.edges:
        lines.append(f'  n{e.src} -> n{e.dst} [label="{_dot_escape(str(e.stm))}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
