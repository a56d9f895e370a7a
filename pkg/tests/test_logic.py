from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from actol.logic import (
    BOTTOM,
    CMPS,
    TRUE,
    Atom,
    Conjunction,
    Entailment,
    LinExpr,
    NonlinearError,
    Refutation,
    canonical,
    entails,
    linearize,
    parse_atom,
    parse_predicates,
    refute,
    substitute,
)
from actol.syntax import ParseError, parse_expr


def A(text: str) -> Atom:
    return parse_atom(text)


def C(*texts: str) -> Conjunction:
    return Conjunction(A(t) for t in texts)


# ---------------------------------------------------------------------------
# examples


def test_substitute_variable():
    assert substitute(C("j >= 0", "j <= 989"), [("j", "x")]) == C("x >= 0", "x <= 989")


def test_substitute_constant_adds_equality():
    assert substitute(C("j >= 0"), [(10, "y")]) == C("j >= 0", "y == 10")


def test_substitute_absent_variable():
    assert substitute(C("k >= 5"), [("j", "x")]) == C("k >= 5")


def test_substitute_array_mapping():
    got = substitute(C("j >= 0", "j <= 989"), [("j", "x"), (10, "y")])
    assert got == C("0 <= x", "x <= 989", "y == 10")


def test_substitute_rejects_clash():
    with pytest.raises(ValueError):
        substitute(C("j >= 0", "x >= 1"), [("j", "x")])


def test_entails_forced_sum():
    assert entails(C("0 <= x", "x <= 989", "y == 10"), A("x + y <= 999")) is Entailment.PROVED


def test_entails_unknown_with_countermodel():
    assert entails(C("x >= 0"), A("x >= 1")) is Entailment.UNKNOWN


def test_bottom_entails_anything():
    assert entails(BOTTOM, A("x >= 1000")) is Entailment.PROVED


def test_entails_disequality_by_split():
    assert entails(C("x >= 1", "y == 1"), A("x + y != 0")) is Entailment.PROVED
    assert entails(C("x != 3", "x >= 3", "x <= 4"), A("x == 4")) is Entailment.PROVED


def test_refute_examples():
    assert refute(C("x >= 1", "x <= 0")) is Refutation.UNSAT
    assert refute(C("x >= 0")) is Refutation.MAYBE_SAT
    assert refute(Conjunction([Atom.of(LinExpr.var("x", 2), "==", 1)])) is Refutation.MAYBE_SAT


def test_refute_strict_integer_tightening():
    assert refute(C("x > 0", "x < 1")) is Refutation.UNSAT
    assert refute(C("x + y <= 3", "x >= 2", "y >= 2")) is Refutation.UNSAT


def test_conjunction_complement_is_bottom():
    assert C("x >= 1", "x < 1").bottom
    assert C("x >= 1", "x >= 1") == C("x >= 1")
    assert TRUE == Conjunction() and not TRUE.bottom


def test_canonical_identifies_equivalent_atoms():
    assert canonical(A("x < 5")) == canonical(A("x <= 4"))
    assert canonical(A("2 * x <= 7")) == canonical(A("x <= 3"))
    assert canonical(A("x - y == 0")) == canonical(A("y == x"))
    assert canonical(A("x != y")) == canonical(A("y != x"))


def test_linearize_rejects_products_of_variables():
    with pytest.raises(NonlinearError):
        linearize(parse_expr("a * b"))
    assert linearize(parse_expr("3 * (a - 2) + b")) == LinExpr.from_dict({"a": 3, "b": 1}, -6)


def test_parse_predicates_file():
    text = "# loop bounds\nj >= 0\nj <= 989   # inner\n\nj <= 999\nj >= 0\nj < 0\n"
    preds = parse_predicates(text)
    assert [str(p) for p in preds] == [str(A("j >= 0")), str(A("j <= 989")), str(A("j <= 999"))]


def test_parse_predicates_errors():
    with pytest.raises(ParseError) as e:
        parse_predicates("j >= 0\nj >=\n")
    assert e.value.line == 2
    with pytest.raises(ParseError):
        parse_predicates("1 < 2\n")
    with pytest.raises(ParseError):
        parse_predicates("a * b > 0\n")


# ---------------------------------------------------------------------------
# properties

VARS = ("a", "b", "c")


def random_atom(rng: random.Random, names=VARS, coeff=3, const=10) -> Atom:
    k = rng.randint(1, len(names))
    coeffs = {v: rng.choice([c for c in range(-coeff, coeff + 1) if c]) for v in rng.sample(names, k)}
    return Atom.of(LinExpr.from_dict(coeffs), rng.choice(CMPS), rng.randint(-const, const))


_GRID: dict[int, dict[str, np.ndarray]] = {}


def grid(n: int, bound: int = 60) -> dict[str, np.ndarray]:
    if n not in _GRID:
        axes = np.meshgrid(*[np.arange(-bound, bound + 1)] * n, indexing="ij")
        _GRID[n] = {v: ax.ravel() for v, ax in zip(VARS, axes)}
    return _GRID[n]


_NP_CMP = {"<": np.less, "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal,
           "==": np.equal, "!=": np.not_equal}


def satisfying(c: Conjunction, env: dict[str, np.ndarray]) -> np.ndarray:
    mask = np.ones(len(next(iter(env.values()))), dtype=bool)
    for lit in c:
        lhs = sum((k * env[v] for v, k in lit.lhs.coeffs), lit.lhs.const)
        rhs = sum((k * env[v] for v, k in lit.rhs.coeffs), lit.rhs.const)
        mask &= _NP_CMP[lit.cmp](lhs, rhs)
    return mask


def test_refute_sound_by_enumeration():
    """Every UNSAT verdict is confirmed by a search of [-60, 60]^n, n <= 3."""
    rng = random.Random(7)
    unsat = 0
    for i in range(400):
        n = 1 + i % 3
        names = VARS[:n]
        c = Conjunction(random_atom(rng, names) for _ in range(rng.randint(2, 5)))
        if refute(c) is Refutation.UNSAT:
            unsat += 1
            if not c.bottom:
                assert not satisfying(c, grid(n)).any(), c
    assert unsat > 40


def test_substitution_preserves_truth():
    """s[x := s(u)] |= q[u <- x]  iff  s |= q, for 1000 random triples."""
    rng = random.Random(11)
    for _ in range(1000):
        q = random_atom(rng)
        u = rng.choice(VARS)
        s = {v: rng.randint(-20, 20) for v in VARS}
        s["x"] = rng.randint(-20, 20)
        mapped = substitute(Conjunction([q]), [(u, "x")])
        t = dict(s)
        t["x"] = s[u]
        assert mapped.holds(t) == Conjunction([q]).holds(s)


def test_entails_monotone_in_context():
    rng = random.Random(3)
    proved = 0
    for _ in range(300):
        ctx = [random_atom(rng) for _ in range(rng.randint(1, 3))]
        extra = [random_atom(rng) for _ in range(rng.randint(1, 3))]
        q = random_atom(rng)
        if entails(Conjunction(ctx), q) is Entailment.PROVED:
            proved += 1
            assert entails(Conjunction(ctx + extra), q) is Entailment.PROVED
    assert proved > 10


def test_entails_proved_is_valid_on_grid():
    rng = random.Random(5)
    env = grid(2, 25)
    for _ in range(300):
        ctx = Conjunction(random_atom(rng, VARS[:2]) for _ in range(rng.randint(1, 3)))
        q = random_atom(rng, VARS[:2])
        if entails(ctx, q) is Entailment.PROVED and not ctx.bottom:
            inside = satisfying(ctx, env)
            assert satisfying(Conjunction([q]), env)[inside].all()


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(CMPS), st.integers(-5, 5), st.integers(-5, 5), st.integers(-20, 20),
       st.integers(-30, 30), st.integers(-30, 30))
def test_canonical_preserves_meaning(cmp, ka, kb, k0, a, b):
    atom = Atom.of(LinExpr.from_dict({"a": ka, "b": kb}), cmp, k0)
    key = canonical(atom)
    twin = Conjunction([atom])
    env = {"a": a, "b": b}
    if twin.bottom:
        assert not atom.evaluate(env)
    elif not twin.literals:
        assert atom.evaluate(env)
    assert atom.negate().evaluate(env) != atom.evaluate(env)
    assert key == canonical(atom.swap())
