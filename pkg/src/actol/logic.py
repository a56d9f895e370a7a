"""Linear integer atoms, conjunctions of literals, the replacement operator and a
Fourier-Motzkin refutation procedure used as a sound entailment oracle."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .syntax import NEGATED_CMP, SWAPPED_CMP, BinOp, Cmp, Const, Expr, ParseError, Var, parse_bexpr

NEQ_SPLIT_LIMIT = 12
FM_CONSTRAINT_LIMIT = 4000


class NonlinearError(ValueError):
    pass


# ---------------------------------------------------------------------------
# linear terms


@dataclass(frozen=True)
class LinExpr:
    """``sum(c * v) + const`` with integer coefficients; ``coeffs`` is sorted
    by variable name and holds no zeros."""

    coeffs: tuple[tuple[str, int], ...] = ()
    const: int = 0

    @staticmethod
    def var(name: str, coeff: int = 1) -> "LinExpr":
        return LinExpr(((name, coeff),) if coeff else ())

    @staticmethod
    def constant(c: int) -> "LinExpr":
        return LinExpr((), c)

    @staticmethod
    def from_dict(coeffs: Mapping[str, int], const: int = 0) -> "LinExpr":
        return LinExpr(tuple(sorted((v, c) for v, c in coeffs.items() if c)), const)

    def as_dict(self) -> dict[str, int]:
        return dict(self.coeffs)

    def __add__(self, other: "LinExpr") -> "LinExpr":
        d = self.as_dict()
        for v, c in other.coeffs:
            d[v] = d.get(v, 0) + c
        return LinExpr.from_dict(d, self.const + other.const)

    def __neg__(self) -> "LinExpr":
        return self.scale(-1)

    def __sub__(self, other: "LinExpr") -> "LinExpr":
        return self + (-other)

    def scale(self, k: int) -> "LinExpr":
        return LinExpr.from_dict({v: c * k for v, c in self.coeffs}, self.const * k)

    @property
    def vars(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.coeffs)

    def is_constant(self) -> bool:
        return not self.coeffs

    def rename(self, mapping: Mapping[str, str]) -> "LinExpr":
        d: dict[str, int] = {}
        for v, c in self.coeffs:
            w = mapping.get(v, v)
            d[w] = d.get(w, 0) + c
        return LinExpr.from_dict(d, self.const)

    def evaluate(self, env: Mapping[str, int]) -> int:
        return sum(c * env[v] for v, c in self.coeffs) + self.const

    def __str__(self) -> str:
        parts: list[str] = []
        for v, c in self.coeffs:
            mag = abs(c)
            body = v if mag == 1 else f"{mag} * {v}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        if self.const or not parts:
            if not parts:
                parts.append(str(self.const))
            else:
                parts.append(("+ " if self.const > 0 else "- ") + str(abs(self.const)))
        return " ".join(parts)


def linearize(e: Expr) -> LinExpr:
    """Convert an arithmetic expression to a linear term or raise NonlinearError."""
    if isinstance(e, Var):
        return LinExpr.var(e.name)
    if isinstance(e, Const):
        return LinExpr.constant(e.value)
    if isinstance(e, BinOp):
        left, right = linearize(e.left), linearize(e.right)
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if e.op == "*":
            if left.is_constant():
                return right.scale(left.const)
            if right.is_constant():
                return left.scale(right.const)
        if e.op == "/" and left.is_constant() and right.is_constant() and right.const:
            return LinExpr.constant(_c_div(left.const, right.const))
    raise NonlinearError(f"nonlinear term {e}")


def _c_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


# ---------------------------------------------------------------------------
# atoms

CMPS = ("<", "<=", ">", ">=", "==", "!=")


@dataclass(frozen=True)
class Atom:
    """A comparison ``lhs cmp rhs`` between linear terms; doubles as a literal
    (negation flips the comparison, so no separate polarity is stored)."""

    lhs: LinExpr
    cmp: str
    rhs: LinExpr

    def __post_init__(self):
        if self.cmp not in CMPS:
            raise ValueError(f"unknown comparison {self.cmp!r}")

    @staticmethod
    def of(lhs: LinExpr | str | int, cmp: str, rhs: LinExpr | str | int) -> "Atom":
        return Atom(_lin(lhs), cmp, _lin(rhs))

    def negate(self) -> "Atom":
        return Atom(self.lhs, NEGATED_CMP[self.cmp], self.rhs)

    def swap(self) -> "Atom":
        return Atom(self.rhs, SWAPPED_CMP[self.cmp], self.lhs)

    @property
    def vars(self) -> frozenset[str]:
        return self.lhs.vars | self.rhs.vars

    def rename(self, mapping: Mapping[str, str]) -> "Atom":
        return Atom(self.lhs.rename(mapping), self.cmp, self.rhs.rename(mapping))

    def term(self) -> LinExpr:
        return self.lhs - self.rhs

    def evaluate(self, env: Mapping[str, int]) -> bool:
        return _compare(self.lhs.evaluate(env) - self.rhs.evaluate(env), self.cmp)

    def key(self) -> tuple:
        return canonical(self)

    def __str__(self) -> str:
        return f"{self.lhs} {self.cmp} {self.rhs}"


def _lin(v: LinExpr | str | int) -> LinExpr:
    if isinstance(v, LinExpr):
        return v
    if isinstance(v, str):
        return LinExpr.var(v)
    return LinExpr.constant(v)


def _compare(diff: int, cmp: str) -> bool:
    return {
        "<": diff < 0, "<=": diff <= 0, ">": diff > 0,
        ">=": diff >= 0, "==": diff == 0, "!=": diff != 0,
    }[cmp]


TRUE_KEY = ("T",)
FALSE_KEY = ("F",)


@lru_cache(maxsize=None)
def canonical(atom: Atom) -> tuple:
    """Normal form ``(rel, coeffs, const)`` meaning ``sum + const rel 0`` with
    rel in {<=, ==, !=}; strict comparisons are tightened over the integers."""
    t = atom.term()
    cmp = atom.cmp
    if cmp == "<":
        t, rel = t + LinExpr.constant(1), "<="
    elif cmp == ">":
        t, rel = -t + LinExpr.constant(1), "<="
    elif cmp == ">=":
        t, rel = -t, "<="
    else:
        rel = cmp
    if t.is_constant():
        return TRUE_KEY if _compare(t.const, "<=" if rel == "<=" else rel) else FALSE_KEY
    g = 0
    for _, c in t.coeffs:
        g = math.gcd(g, c)
    if rel == "<=":
        coeffs = tuple((v, c // g) for v, c in t.coeffs)
        return ("<=", coeffs, -((-t.const) // g))
    g = math.gcd(g, t.const)
    sign = 1 if t.coeffs[0][1] > 0 else -1
    return (rel, tuple((v, sign * c // g) for v, c in t.coeffs), sign * t.const // g)


def negate_key(key: tuple) -> tuple:
    if key == TRUE_KEY:
        return FALSE_KEY
    if key == FALSE_KEY:
        return TRUE_KEY
    rel, coeffs, const = key
    if rel == "==":
        return ("!=", coeffs, const)
    if rel == "!=":
        return ("==", coeffs, const)
    # not (t <= 0)  <=>  -t + 1 <= 0
    return ("<=", tuple((v, -c) for v, c in coeffs), -const + 1)


# ---------------------------------------------------------------------------
# conjunctions


class Conjunction:
    """A set of literals (empty = true) or the distinguished Bottom.

    Literal order is kept for printing; equality and hashing are by the
    canonical set of literals.
    """

    __slots__ = ("literals", "bottom", "_keys")

    def __init__(self, literals: Iterable[Atom] = (), bottom: bool = False):
        lits: list[Atom] = []
        keys: set[tuple] = set()
        if not bottom:
            for lit in literals:
                k = canonical(lit)
                if k == TRUE_KEY or k in keys:
                    continue
                if k == FALSE_KEY or negate_key(k) in keys:
                    bottom = True
                    break
                keys.add(k)
                lits.append(lit)
        self.bottom = bottom
        self.literals: tuple[Atom, ...] = () if bottom else tuple(lits)
        self._keys = frozenset() if bottom else frozenset(keys)

    @property
    def keys(self) -> frozenset:
        return self._keys

    @property
    def vars(self) -> frozenset[str]:
        out: set[str] = set()
        for lit in self.literals:
            out |= lit.vars
        return frozenset(out)

    def __iter__(self):
        return iter(self.literals)

    def __len__(self) -> int:
        return len(self.literals)

    def __contains__(self, atom: Atom) -> bool:
        return canonical(atom) in self._keys

    def __eq__(self, other) -> bool:
        if not isinstance(other, Conjunction):
            return NotImplemented
        return self.bottom == other.bottom and self._keys == other._keys

    def __hash__(self) -> int:
        return hash((self.bottom, self._keys))

    def __and__(self, other: "Conjunction | Iterable[Atom]") -> "Conjunction":
        if isinstance(other, Conjunction):
            if self.bottom or other.bottom:
                return BOTTOM
            return Conjunction(self.literals + other.literals)
        return Conjunction(self.literals + tuple(other), self.bottom)

    def rename(self, mapping: Mapping[str, str]) -> "Conjunction":
        if self.bottom:
            return self
        return Conjunction(lit.rename(mapping) for lit in self.literals)

    def holds(self, env: Mapping[str, int]) -> bool:
        return not self.bottom and all(lit.evaluate(env) for lit in self.literals)

    def __repr__(self) -> str:
        if self.bottom:
            return "Conjunction(bottom)"
        return f"Conjunction({[str(l) for l in self.literals]})"

    def __str__(self) -> str:
        if self.bottom:
            return "false"
        if not self.literals:
            return "true"
        return " && ".join(str(l) for l in self.literals)


BOTTOM = Conjunction(bottom=True)
TRUE = Conjunction()


def substitute(q: Conjunction, mapping: Sequence[tuple[str | int, str]]) -> Conjunction:
    """Apply replacements ``old -> new`` left to right.

    A variable entry renames every occurrence; a constant entry ``c -> v``
    adds the literal ``v == c``. Replacement variables must not already
    occur in ``q``.
    """
    if q.bottom:
        return q
    clash = {new for _, new in mapping} & q.vars
    if clash:
        raise ValueError(f"replacement variable(s) {sorted(clash)} already occur")
    out = q
    for old, new in mapping:
        if isinstance(old, int):
            out = out & [Atom.of(new, "==", old)]
        else:
            out = out.rename({old: new})
    return out


# ---------------------------------------------------------------------------
# decision procedure


class Refutation(enum.Enum):
    UNSAT = "unsat"
    MAYBE_SAT = "maybe-sat"


class Entailment(enum.Enum):
    PROVED = "proved"
    UNKNOWN = "unknown"


def refute(c: Conjunction) -> Refutation:
    """Fourier-Motzkin over the rationals with integer tightening.

    UNSAT is trustworthy; MAYBE_SAT may hide integer infeasibility.
    """
    if c.bottom:
        return Refutation.UNSAT
    return Refutation.UNSAT if _refute_keys(c.keys) else Refutation.MAYBE_SAT


def entails(ctx: Conjunction, q: Atom) -> Entailment:
    if ctx.bottom:
        return Entailment.PROVED
    k = canonical(q)
    if k == TRUE_KEY or k in ctx.keys:
        return Entailment.PROVED
    nk = negate_key(k)
    if nk == FALSE_KEY:
        return Entailment.PROVED
    if nk in ctx.keys:
        return Entailment.UNKNOWN
    return Entailment.PROVED if _refute_keys(ctx.keys | {nk}) else Entailment.UNKNOWN


@lru_cache(maxsize=200_000)
def _refute_keys(keys: frozenset) -> bool:
    ineqs: list[tuple[dict, Fraction]] = []
    eqs: list[tuple[dict, Fraction]] = []
    neqs: list[tuple[tuple, int]] = []
    for k in keys:
        if k == FALSE_KEY:
            return True
        if k == TRUE_KEY:
            continue
        rel, coeffs, const = k
        if rel == "<=":
            ineqs.append((dict(coeffs), Fraction(const)))
        elif rel == "==":
            eqs.append((dict(coeffs), Fraction(const)))
        else:
            neqs.append((coeffs, const))
    if _fm_unsat(ineqs, eqs):
        return True
    if not neqs:
        return False
    if len(neqs) > NEQ_SPLIT_LIMIT:
        return False
    # t != 0 over the integers splits into t <= -1 or -t <= -1
    for choice in itertools.product((1, -1), repeat=len(neqs)):
        branch = list(ineqs)
        for (coeffs, const), sign in zip(neqs, choice):
            branch.append(({v: sign * c for v, c in coeffs}, Fraction(sign * const + 1)))
        if not _fm_unsat(branch, eqs):
            return False
    return True


def _normalize(coeffs: dict, const: Fraction) -> tuple[dict, Fraction] | None:
    """Scale to integer coefficients with gcd 1 and tighten the constant;
    ``None`` for a trivially true constraint, raises _Contradiction when
    trivially false."""
    coeffs = {v: c for v, c in coeffs.items() if c}
    if not coeffs:
        if const > 0:
            raise _Contradiction
        return None
    den = math.lcm(*(Fraction(c).denominator for c in [*coeffs.values(), const]))
    ints = {v: int(c * den) for v, c in coeffs.items()}
    g = 0
    for c in ints.values():
        g = math.gcd(g, c)
    scaled = const * den
    return ({v: Fraction(c // g) for v, c in ints.items()}, Fraction(math.ceil(scaled / g)))


class _Contradiction(Exception):
    pass


def _fm_unsat(ineqs: list, eqs: list) -> bool:
    try:
        rows = [(dict(c), Fraction(k)) for c, k in ineqs]
        equalities = [(dict(c), Fraction(k)) for c, k in eqs]
        # eliminate equalities by substitution (rationally)
        while equalities:
            coeffs, const = equalities.pop()
            coeffs = {v: c for v, c in coeffs.items() if c}
            if not coeffs:
                if const != 0:
                    return True
                continue
            v, a = min(coeffs.items(), key=lambda kv: (abs(kv[1]), kv[0]))
            # v = -(rest + const) / a
            rest = {w: -c / a for w, c in coeffs.items() if w != v}
            rconst = -const / a
            equalities = [_subst(r, v, rest, rconst) for r in equalities]
            rows = [_subst(r, v, rest, rconst) for r in rows]
        cons = set()
        for coeffs, const in rows:
            n = _normalize(coeffs, const)
            if n is not None:
                cons.add(_freeze(n))
        return _fm_eliminate(cons)
    except _Contradiction:
        return True


def _subst(row, v, rest, rconst):
    coeffs, const = row
    a = coeffs.get(v, 0)
    if not a:
        return row
    out = {w: c for w, c in coeffs.items() if w != v}
    for w, c in rest.items():
        out[w] = out.get(w, 0) + a * c
    return out, const + a * rconst


def _freeze(n: tuple[dict, Fraction]) -> tuple:
    coeffs, const = n
    return tuple(sorted(coeffs.items())), const


def _fm_eliminate(cons: set) -> bool:
    while True:
        if len(cons) > FM_CONSTRAINT_LIMIT:
            return False
        variables: dict[str, list[int]] = {}
        for coeffs, _ in cons:
            for v, c in coeffs:
                pn = variables.setdefault(v, [0, 0])
                pn[0 if c > 0 else 1] += 1
        if not variables:
            return False
        v = min(variables, key=lambda w: (variables[w][0] * variables[w][1] - sum(variables[w]), w))
        pos, neg, keep = [], [], set()
        for row in cons:
            c = dict(row[0]).get(v, 0)
            if c > 0:
                pos.append(row)
            elif c < 0:
                neg.append(row)
            else:
                keep.add(row)
        for (pc, pk), (nc, nk) in itertools.product(pos, neg):
            pd, nd = dict(pc), dict(nc)
            a, b = pd[v], -nd[v]
            combined = {}
            for w in set(pd) | set(nd):
                if w == v:
                    continue
                combined[w] = b * pd.get(w, 0) + a * nd.get(w, 0)
            n = _normalize(combined, b * pk + a * nk)
            if n is not None:
                keep.add(_freeze(n))
        cons = keep


# ---------------------------------------------------------------------------
# text forms


def atom_from_cmp(c: Cmp) -> Atom:
    return Atom(linearize(c.left), c.op, linearize(c.right))


def parse_atom(text: str) -> Atom:
    b = parse_bexpr(text)
    if not isinstance(b, Cmp):
        raise ParseError(f"predicate must be a single comparison: {text!r}")
    try:
        return atom_from_cmp(b)
    except NonlinearError as exc:
        raise ParseError(str(exc)) from None


def parse_predicates(text: str) -> list[Atom]:
    """One atom per line in program-expression syntax; ``#`` starts a comment."""
    preds: list[Atom] = []
    seen: set[tuple] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            atom = parse_atom(line)
        except ParseError as exc:
            raise ParseError(exc.message, lineno, exc.col or 1) from None
        k = canonical(atom)
        if k in (TRUE_KEY, FALSE_KEY):
            raise ParseError(f"constant predicate {line!r}", lineno, 1)
        if k not in seen and negate_key(k) not in seen:
            seen.add(k)
            preds.append(atom)
    return preds
