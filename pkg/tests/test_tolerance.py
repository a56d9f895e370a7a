from __future__ import annotations

import random

import numpy as np
import pytest

from actol.frontend import Assign, Edge, binary_operands
from actol.logic import CMPS, TRUE, Atom, Conjunction, LinExpr, parse_atom
from actol.pipeline import analyze
from actol.syntax import BinOp, Const, ParseError, Var
from actol.tolerance import (
    ConstraintParseError,
    MappedConstraint,
    Signature,
    ToleranceConstraint,
    dumps,
    extract,
    loads,
    map_to_signature,
    parse,
    serialize,
)


def A(text):
    return parse_atom(text)


def C(*texts):
    return Conjunction(A(t) for t in texts)


def constraint(stm: str, pre: Conjunction, post: Conjunction, program_vars=("u", "v", "w")):
    target, _, rhs = stm.partition(" := ")
    a, op, b = rhs.split()
    operand = lambda t: Const(int(t)) if t.lstrip("-").isdigit() else Var(t)
    edge = Edge(0, Assign(target, BinOp(op, operand(a), operand(b))), 1)
    return ToleranceConstraint(edge, op, ((pre, post),), tuple(program_vars))


# ---------------------------------------------------------------------------
# examples


def test_array_extraction(analyses):
    (tc,) = analyses["array"].constraints
    assert str(tc.statement) == "j := j + 10"
    assert tc.pairs == ((C("j >= 0", "j <= 989"), C("j >= 0", "j <= 999")),)


def test_unused_operator_gives_nothing(analyses):
    assert extract(analyses["array"].ats, "*") == []


def test_sum_two_constraints(analyses):
    an = analyses["sum"]
    stms = sorted(str(tc.statement) for tc in an.constraints)
    assert stms == ["i := i + 1", "sum := sum + i"]
    plus_edges = [e for e in an.cfa.edges if (s := binary_operands(e.stm)) and s[0] == "+"]
    assert len(plus_edges) == 2


def test_array_mapping(analyses):
    (mc,) = analyses["array"].mapped
    pre, post = mc.pairs[0]
    assert pre == C("0 <= x", "x <= 989", "y == 10")
    assert post == C("0 <= z", "z <= 999")
    assert mc.signature == Signature("j", 10, "j", ())


def test_addone_mapping(analyses):
    (mc,) = analyses["addone"].mapped
    assert mc.pairs == [(C("1 <= x", "y == 1"), C("z != 0"))]


def test_specificadd_mapping(analyses):
    (mc,) = analyses["specificadd"].mapped
    assert mc.pairs == [(C("x == 30", "y == 50"), C("z == 80"))]


def test_sum_mapping_keeps_side_variable(analyses):
    mc = next(m for m in analyses["sum"].mapped if m.statement == "i := i + 1")
    pre, post = mc.pairs[0]
    assert "N" in mc.side_vars
    assert A("N - x > 0") in pre and A("y == 1") in pre
    # the ranking decrease N - z < N - old_i, reduced to old_i < z
    assert post == C("old_i < z")
    assert A("old_i == x") in pre


def test_target_facts_dropped_from_pre():
    tc = constraint("u := v + w", C("u >= 3", "v >= 0", "w == 2"), C("u >= 2"))
    mc = map_to_signature(tc)
    assert mc.pairs == [(C("x >= 0", "y == 2"), C("z >= 2"))]


def test_same_operand_twice():
    mc = map_to_signature(constraint("u := v + v", C("v >= 1"), C("u >= 2", "v >= 1")))
    pre, post = mc.pairs[0]
    assert pre == C("x >= 1", "x == y")
    assert post == C("z >= 2")


def test_post_operand_facts_kept_only_when_new():
    mc = map_to_signature(constraint("v := v + 1", C("v >= 1"), C("v >= 2")))
    assert mc.pairs == [(C("x >= 1", "y == 1"), C("z >= 2"))]


def test_reserved_name_clash():
    tc = constraint("u := v + w", C("v >= 0"), C("u >= 0"), program_vars=("u", "v", "w", "z"))
    with pytest.raises(ValueError):
        map_to_signature(tc)


def test_array_serialization(analyses, tmp_path):
    (mc,) = analyses["array"].mapped
    path = tmp_path / "array_1.tc.smt2"
    serialize(mc, path)
    text = path.read_text()
    assert "(define-fun Q_1 () Bool (and (<= 0 x) (<= x 989) (= y 10)))" in text
    assert "(define-fun Q_2 () Bool (and (<= 0 z) (<= z 999)))" in text
    assert "(set-info :signature ((x j) (y 10) (z j@1) (side)))" in text
    assert parse(path).same_as(mc)


def test_true_pre_serialization():
    mc = MappedConstraint("u := v + w", "+", Signature("v", "w", "u"), [(TRUE, C("z >= 0"))])
    assert "(define-fun Q_1 () Bool true)" in dumps(mc)
    assert loads(dumps(mc)).same_as(mc)


@pytest.mark.parametrize("text,line", [
    ("(set-info :signature ((x a) (y b) (z c@1) (side)))\n(define-fun Q_1 () Bool (and (<= 0 x)\n", 2),
    ("(set-info :signature ((x a) (y b) (z c@1) (side))))\n", 1),
])
def test_unbalanced_parentheses(text, line):
    with pytest.raises(ConstraintParseError) as e:
        loads(text)
    assert isinstance(e.value, ParseError)
    assert e.value.line == line


@pytest.mark.parametrize("text", [
    "(define-fun Q_1 () Bool true)\n(define-fun Q_2 () Bool true)\n",
    "(set-info :signature ((x a) (y b) (z c) (side)))\n(define-fun Q_1 () Bool true)\n(define-fun Q_2 () Bool true)\n",
    "(set-info :signature ((x a) (y b) (z c@1) (side)))\n(define-fun Q_1 () Bool true)\n",
    "(set-info :signature ((x a) (y b) (z c@1) (side)))\n(define-fun Q_1 () Bool (foo x))\n(define-fun Q_2 () Bool true)\n",
    "(set-info :signature ((x a) (y b) (z c@1) (side)))\n(check-sat)\n",
])
def test_malformed_files(text):
    with pytest.raises(ConstraintParseError):
        loads(text)


# ---------------------------------------------------------------------------
# properties


def random_atom(rng, names, const=20):
    vs = rng.sample(names, rng.randint(1, min(2, len(names))))
    coeffs = {v: rng.choice([-3, -2, -1, 1, 2, 3]) for v in vs}
    return Atom.of(LinExpr.from_dict(coeffs), rng.choice(CMPS), rng.randint(-const, const))


def test_serialization_round_trip():
    rng = random.Random(17)
    for _ in range(200):
        side = tuple(sorted(rng.sample(["N", "old_i", "k"], rng.randint(0, 2))))
        names = ["x", "y", "z", *side]
        pairs = []
        for _ in range(rng.randint(1, 3)):
            pre = Conjunction(random_atom(rng, names) for _ in range(rng.randint(0, 3)))
            post = Conjunction(random_atom(rng, names) for _ in range(rng.randint(0, 3)))
            pairs.append((pre, post))
        x = rng.choice(["a", rng.randint(-5, 40)])
        sig = Signature(x, rng.choice(["b", rng.randint(0, 40)]), "t", side)
        mc = MappedConstraint("t := a + b", "+", sig, pairs, "1 -> 2")
        back = loads(dumps(mc))
        assert back.same_as(mc)
        assert back.location == mc.location
        assert dumps(back) == dumps(mc)


W = 6
_xs, _ys = np.meshgrid(np.arange(1 << W), np.arange(1 << W), indexing="ij")
XS, YS = _xs.ravel(), _ys.ravel()
_NP_CMP = {"<": np.less, "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal,
           "==": np.equal, "!=": np.not_equal}


def np_conj(c: Conjunction, env):
    n = len(next(iter(env.values())))
    if c.bottom:
        return np.zeros(n, dtype=bool)
    mask = np.ones(n, dtype=bool)
    for q in c:
        lhs = sum((k * env[v] for v, k in q.lhs.coeffs), q.lhs.const)
        rhs = sum((k * env[v] for v, k in q.rhs.coeffs), q.rhs.const)
        mask &= _NP_CMP[q.cmp](lhs, rhs)
    return mask


def test_fulfillment_transfer():
    """An operator adhering to the mapped constraint makes the statement
    u := v + w fulfil the original pair over all states in [0, 64)^3."""
    rng = random.Random(23)
    states = np.meshgrid(*[np.arange(1 << W)] * 3, indexing="ij")
    S = {"u": states[0].ravel(), "v": states[1].ravel(), "w": states[2].ravel()}
    adhering = 0
    for _ in range(200):
        pre = Conjunction(random_atom(rng, ["u", "v", "w"], 60) for _ in range(rng.randint(1, 3)))
        post = Conjunction(random_atom(rng, ["u", "v", "w"], 60) for _ in range(rng.randint(1, 2)))
        if pre.bottom or post.bottom:
            continue
        f = (XS + YS).copy()
        for _ in range(rng.randint(0, 3)):
            f[rng.randrange(len(f))] = rng.randrange(1 << (W + 1))
        table = f.reshape(1 << W, 1 << W)
        mc = map_to_signature(constraint("u := v + w", pre, post))
        (mpre, mpost), = mc.pairs
        env = {"x": XS, "y": YS, "z": f}
        adheres = bool((~np_conj(mpre, env) | np_conj(mpost, env)).all())
        if not adheres:
            continue
        adhering += 1
        after = dict(S)
        after["u"] = table[S["v"], S["w"]]
        inside = np_conj(pre, S)
        assert np_conj(post, after)[inside].all(), (pre, post)
    assert adhering > 30


def test_extraction_completeness(analyses):
    """Every +-edge with a non-Bottom source yields exactly one constraint."""
    for name, an in analyses.items():
        if not an.safe:
            continue
        want = [e for e in an.cfa.edges
                if (s := binary_operands(e.stm)) and s[0] == "+" and not an.ats.states[e.src].bottom]
        got = [tc.edge for tc in an.constraints]
        assert sorted(map(str, got)) == sorted(map(str, want)), name


def test_bottom_source_edges_are_skipped():
    program = "int a; int b; a := 1; if (a == 2) { b := a + 1; }"
    an = analyze(program, "a == 1\n")
    assert an.safe and an.constraints == []
