from __future__ import annotations

import random
import re

import numpy as np
import pytest

from actol.adders import AdderModel, exact, generate_only, get_preset, presets, slice_sum
from actol.checkers import (
    Status,
    adherence_verilog,
    bitblast,
    check_adherence,
    check_constraint,
    check_exhaustive,
    check_sat,
    checker_verilog,
    decode,
    emit_checker_hdl,
    narrow,
    side_range,
)
from actol.logic import CMPS, TRUE, Atom, Conjunction, LinExpr, parse_atom
from actol.sat import export_dimacs, import_dimacs, sat_solve
from actol.tolerance import MappedConstraint, Signature, loads


def A(text):
    return parse_atom(text)


def C(*texts):
    return Conjunction(A(t) for t in texts)


def mc_of(*pairs, side=()):
    return MappedConstraint("u := v + w", "+", Signature("v", "w", "u", tuple(side)), list(pairs))


ARRAY = MappedConstraint("j := j + 10", "+", Signature("j", 10, "j"),
                         [(C("0 <= x", "x <= 989", "y == 10"), C("0 <= z", "z <= 999"))])
ADDONE = mc_of((C("1 <= x", "y == 1"), C("z != 0")))
SPECIFIC = mc_of((C("x == 30", "y == 50"), C("z == 80")))
APPROX = [m for m in presets(16) if not m.exact]


# ---------------------------------------------------------------------------
# examples


@pytest.mark.parametrize("m", presets(16), ids=lambda m: m.label)
@pytest.mark.parametrize("engine", ["exhaustive", "sat", "auto"])
def test_array_holds(m, engine):
    assert check_constraint(m, ARRAY, engine).status is Status.HOLDS


def test_array_domain_is_narrowed():
    dom = narrow(ARRAY.pairs[0][0], {"x": [0, 65535], "y": [0, 65535]})
    assert dom == {"x": [0, 989], "y": [10, 10]}


@pytest.mark.parametrize("m", APPROX, ids=lambda m: m.label)
@pytest.mark.parametrize("engine", ["exhaustive", "sat"])
def test_addone_violated(m, engine):
    v = check_constraint(m, ADDONE, engine)
    assert v.violated
    assert v.witness["y"] == 1 and v.witness["x"] >= 1
    assert m.evaluate(v.witness["x"], 1) == 0 == v.z


@pytest.mark.parametrize("engine", ["exhaustive", "sat"])
def test_addone_rca_holds(engine):
    assert check_constraint(get_preset("rca_16"), ADDONE, engine).holds


def test_addone_small_slice_sum_witness():
    v = check_exhaustive(slice_sum(8, 2, 2), ADDONE)
    assert v.witness == {"x": 15, "y": 1}


@pytest.mark.parametrize("m", presets(16), ids=lambda m: m.label)
def test_specific_add(m):
    v = check_constraint(m, SPECIFIC, "sat")
    assert v.violated == (m.label == "aca_ii_16_4")
    if v.violated:
        assert v.witness == {"x": 30, "y": 50}


def test_specific_add_model_is_unique():
    m = get_preset("aca_ii_16_4")
    f = bitblast(m, SPECIFIC)
    res = sat_solve(f)
    assert res and decode(f, res.model, 16) == {"x": 30, "y": 50}
    # block the witness: nothing else raises the error
    f.add_clause([-f.annotations[f"x[{i}]"] if (30 >> i) & 1 else f.annotations[f"x[{i}]"] for i in range(16)])
    assert not sat_solve(f)


@pytest.mark.parametrize("engine", ["exhaustive", "sat", "auto"])
def test_vacuous_pre_holds(engine):
    mc = mc_of((C("x >= 1", "x <= 0"), C("z == 12345")))
    for m in presets(16):
        assert check_constraint(m, mc, engine).holds


def test_array_cnf_unsat():
    assert not sat_solve(bitblast(get_preset("rca_16"), ARRAY))


def test_sum_constraints(analyses):
    mapped = analyses["sum"].mapped
    assert check_adherence(get_preset("rca_16"), mapped).holds
    for m in APPROX:
        v = check_adherence(m, mapped)
        assert v.violated, m.label
        mc = mapped[v.constraint]
        pre, post = mc.pairs[v.pair]
        env = dict(v.witness, z=v.z)
        assert pre.holds(env) and not post.holds(env)


def test_check_adherence_needs_constraints():
    with pytest.raises(ValueError):
        check_adherence(exact(8), [])


def test_width_mismatch():
    with pytest.raises(ValueError):
        check_constraint(exact(8), ARRAY, width=16)


def test_open_side_over_budget_is_unknown():
    mc = mc_of((C("x <= N"), C("z >= N")), side=("N",))
    small = exact(8)
    assert check_exhaustive(small, mc, budget=1 << 10).status is Status.UNKNOWN
    v = check_sat(small, mc)
    assert v.violated
    lo, hi = side_range(8)
    assert lo <= v.witness["N"] <= hi


def test_side_variable_semantics_signed():
    # N - x > 0 with negative N is possible because sides are signed
    mc = mc_of((C("N - x > 0", "N < 0"), C("z >= 0")), side=("N",))
    assert check_sat(exact(6), mc).holds
    assert check_exhaustive(exact(6), mc).holds


def test_verdict_json():
    v = check_constraint(get_preset("aca_ii_16_4"), SPECIFIC, "exhaustive")
    assert v.to_json() == {"verdict": "Violated", "engine": "exhaustive",
                           "witness": {"x": 30, "y": 50}, "z": v.z}


# ---------------------------------------------------------------------------
# hardware and CNF export


def test_array_checker_error_line():
    text = checker_verilog(ARRAY, 16)
    assert "  assign error = !(( !(Q__1 && pre__gen_0) || Q__2));" in text
    assert "assign pre__gen_0 = (y == 10);" in text
    assert "parameter Nin = 16;" in text and "parameter Nout = 17;" in text


def test_true_pre_degenerate_error_line():
    text = checker_verilog(mc_of((TRUE, C("z >= 0"))), 16)
    assert "  assign error = !(Q__2);" in text


def test_ports_scale_with_width(tmp_path):
    for n in (8, 32):
        text = emit_checker_hdl(exact(n), ADDONE, n, tmp_path / f"c{n}.v")
        assert f"parameter Nin = {n};" in text
        assert f"parameter Nout = {n + 1};" in text
        assert f"output [{n}:0] z;" in text
        assert (tmp_path / f"c{n}.v").read_text() == text
    assert text.count("module ") == 3 and text.count("endmodule") == 3


def test_adherence_module_wires_side_variables(analyses):
    mc = analyses["sum"].mapped[0]
    text = adherence_verilog(exact(8), mc)
    for s in mc.side_vars:
        assert f".{s}({s})" in text
    assert "output errorBit" in text


def test_checker_modules_are_balanced():
    text = emit_checker_hdl(get_preset("gear_16_2_4"), mc_of((C("x - N > 3"), C("z != N + 1")), side=("N",)))
    assert text.count("(") == text.count(")")
    assert re.search(r"wire signed \[\d+:0\] N_e = N;", text)


def test_dimacs_export_round_trip(tmp_path):
    m = get_preset("aca_i_16_4")
    f = bitblast(m, ADDONE)
    path = tmp_path / "addone.cnf"
    export_dimacs(f, path)
    header = next(l for l in path.read_text().splitlines() if l.startswith("p "))
    assert header == f"p cnf {f.num_vars} {len(f.clauses)}"
    g = import_dimacs(path)
    assert g.clauses == f.clauses and g.annotations == f.annotations
    res = sat_solve(g)
    assert res and m.evaluate(decode(g, res.model, 16)["x"], 1) == 0


def test_external_solver_agrees(tmp_path):
    pysat = pytest.importorskip("pysat.solvers")
    for m, want in ((get_preset("aca_i_16_4"), True), (get_preset("rca_16"), False)):
        path = tmp_path / f"{m.label}.cnf"
        export_dimacs(bitblast(m, ADDONE), path)
        g = import_dimacs(path)
        with pysat.Minisat22(bootstrap_with=g.clauses) as s:
            assert s.solve() is want
        assert bool(sat_solve(g)) is want


def test_constraint_file_checked_directly():
    text = ("(set-info :signature ((x a) (y b) (z c@1) (side)))\n"
            "(define-fun Q_1 () Bool (and (= x 30) (= y 50)))\n(define-fun Q_2 () Bool (= z 80))\n")
    assert check_constraint(get_preset("aca_ii_16_4"), loads(text)).violated


# ---------------------------------------------------------------------------
# cross-validation


def random_model(rng, width) -> AdderModel:
    rs = [r for r in range(1, width + 1) if width % r == 0]
    kind = rng.random()
    if kind < 0.15:
        return exact(width)
    if kind < 0.45:
        return generate_only(width, rng.choice(rs))
    return slice_sum(width, rng.choice(rs), rng.randint(0, width))


def random_atom(rng, names, width):
    vs = rng.sample(names, rng.randint(1, min(2, len(names))))
    coeffs = {v: rng.choice([-2, -1, 1, 1, 2]) for v in vs}
    return Atom.of(LinExpr.from_dict(coeffs), rng.choice(CMPS), rng.randint(-4, (1 << width) + 4))


def random_constraint(rng, width, side=()):
    pairs = []
    for _ in range(rng.randint(1, 2)):
        pre_names = ["x", "y", *side]
        pre = Conjunction(random_atom(rng, pre_names, width) for _ in range(rng.randint(0, 3)))
        post = Conjunction(random_atom(rng, ["x", "y", "z", *side], width) for _ in range(rng.randint(1, 2)))
        pairs.append((pre, post))
    return mc_of(*pairs, side=side)


_NP_CMP = {"<": np.less, "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal,
           "==": np.equal, "!=": np.not_equal}


def np_conj(c: Conjunction, env, n):
    if c.bottom:
        return np.zeros(n, dtype=bool)
    mask = np.ones(n, dtype=bool)
    for q in c:
        lhs = sum((k * env[v] for v, k in q.lhs.coeffs), q.lhs.const)
        rhs = sum((k * env[v] for v, k in q.rhs.coeffs), q.rhs.const)
        mask &= _NP_CMP[q.cmp](lhs, rhs)
    return mask


def brute_force_error(m: AdderModel, mc: MappedConstraint) -> bool:
    """Enumerate every (x, y[, side]) and evaluate the checker's error output."""
    n = m.width
    axes = [np.arange(1 << n), np.arange(1 << n)]
    lo, hi = side_range(n)
    axes += [np.arange(lo, hi + 1) for _ in mc.side_vars]
    grids = np.meshgrid(*axes, indexing="ij")
    env = {"x": grids[0].ravel(), "y": grids[1].ravel()}
    env.update({s: g.ravel() for s, g in zip(mc.side_vars, grids[2:])})
    env["z"] = m.evaluate_many(env["x"], env["y"])
    size = len(env["x"])
    return any((np_conj(pre, env, size) & ~np_conj(post, env, size)).any() for pre, post in mc.pairs)


def test_engines_agree_on_random_instances():
    rng = random.Random(99)
    violated = 0
    for i in range(50):
        width = rng.randint(4, 10)
        m = random_model(rng, width)
        side = ("N",) if width <= 6 and rng.random() < 0.3 else ()
        mc = random_constraint(rng, width, side)
        ex = check_exhaustive(m, mc)
        st = check_sat(m, mc)
        assert ex.status is not Status.UNKNOWN
        assert ex.status is st.status, (i, m.label, mc.pairs)
        for v in (ex, st):
            if v.violated:
                pre, post = mc.pairs[v.pair]
                env = dict(v.witness, z=m.evaluate(v.witness["x"], v.witness["y"]))
                assert pre.holds(env) and not post.holds(env)
        violated += ex.violated
    assert 5 < violated < 45


def test_bitblast_equisatisfiable_small_widths():
    rng = random.Random(5)
    seen = set()
    for i in range(60):
        width = rng.randint(2, 6)
        m = random_model(rng, width)
        side = ("N",) if rng.random() < 0.25 else ()
        mc = random_constraint(rng, width, side)
        want = brute_force_error(m, mc)
        got = bool(sat_solve(bitblast(m, mc)))
        assert got == want, (i, m.label, mc.pairs)
        seen.add(want)
    assert seen == {True, False}


def test_open_side_variable_engines_agree():
    mc = mc_of((C("x <= N"), C("z >= N")), side=("N",))
    for m in (exact(5), slice_sum(6, 2, 0)):
        ex, st = check_exhaustive(m, mc), check_sat(m, mc)
        assert ex.status is st.status is Status.VIOLATED
        assert ex.witness["N"] <= side_range(m.width)[1]
