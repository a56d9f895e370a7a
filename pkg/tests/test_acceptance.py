"""One test per acceptance criterion; each prints a PASS/FAIL line with its
wall time against the criterion's limit."""

from __future__ import annotations

import time

import numpy as np

import test_abstraction
import test_adders
import test_checkers
import test_logic
import test_sat
from actol.abstraction import is_error_free
from actol.adders import presets, to_netlist
from actol.checkers import check_adherence
from actol.concrete import ExecBounds, ExecVerdict, reach_error_bounded
from actol.frontend import Assign
from actol.logic import Conjunction, parse_atom
from actol.pipeline import corpus_entry, discover
from actol.sat import sat_solve


def C(*texts):
    return Conjunction(parse_atom(t) for t in texts)


def criterion(capsys, number: int, title: str, limit: float, body) -> None:
    start = time.perf_counter()
    error = None
    try:
        body()
    except BaseException as exc:  # reported, then re-raised
        error = exc
    elapsed = time.perf_counter() - start
    ok = error is None and elapsed < limit
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {title}  ({elapsed:.1f}s, limit {limit:g}s)")
    if error is not None:
        raise error
    assert elapsed < limit, f"criterion {number} took {elapsed:.1f}s (limit {limit}s)"


APPROX16 = [m for m in presets(16) if not m.exact]


def test_criterion_1_array_end_to_end(capsys):
    def body():
        a = corpus_entry("array").analyze()
        assert {str(p) for p in a.preds} == {str(parse_atom(t)) for t in ("j >= 0", "j <= 989", "j <= 999")}
        assert a.safe
        (mc,) = a.mapped
        assert mc.pairs == [(C("0 <= x", "x <= 989", "y == 10"), C("0 <= z", "z <= 999"))]
        for m in presets(16):
            for engine in ("exhaustive", "sat"):
                assert check_adherence(m, a.mapped, engine).holds, (m.label, engine)

    criterion(capsys, 1, "Array end-to-end", 10, body)


def test_criterion_2_addone(capsys):
    def body():
        a = corpus_entry("addone").analyze()
        assert a.safe
        (mc,) = a.mapped
        assert mc.pairs == [(C("1 <= x", "y == 1"), C("z != 0"))]
        assert check_adherence(presets(16)[0], a.mapped).holds
        for m in APPROX16:
            v = check_adherence(m, a.mapped)
            assert v.violated, m.label
            assert v.witness["y"] == 1 and v.witness["x"] >= 1
            assert m.evaluate(v.witness["x"], v.witness["y"]) == 0

    criterion(capsys, 2, "AddOne", 30, body)


def test_criterion_3_specificadd(capsys):
    def body():
        a = corpus_entry("specificadd").analyze()
        assert a.safe
        (mc,) = a.mapped
        assert mc.pairs == [(C("x == 30", "y == 50"), C("z == 80"))]
        verdicts = {m.label: check_adherence(m, a.mapped).violated for m in presets(16)}
        for label in ("rca_16", "aca_i_16_4", "etaii_16_4", "gear_16_2_4"):
            assert verdicts[label] is False, label
        assert verdicts["aca_ii_16_4"] is True
        aca_ii = next(m for m in presets(16) if m.label == "aca_ii_16_4")
        assert aca_ii.evaluate(30, 50) != 80

    criterion(capsys, 3, "SpecificAdd", 5, body)


def test_criterion_4_termination_pipeline(capsys):
    def body():
        a = corpus_entry("sum").analyze()
        cfa = a.cfa
        copies = [e for e in cfa.edges if isinstance(e.stm, Assign) and e.stm.target.startswith("old_")]
        assert [str(e.stm) for e in copies] == ["old_i := i"]
        guards = [e for e in cfa.edges if e.dst in cfa.errors]
        assert len(cfa.errors) == 2 and len(guards) == 2
        assert a.safe and len(a.mapped) == 2
        for name in ("sum", "quotient", "mirror_matrix"):
            an = a if name == "sum" else corpus_entry(name).analyze()
            assert an.safe, name
            assert check_adherence(presets(16)[0], an.mapped).holds, name
            for m in APPROX16:
                assert check_adherence(m, an.mapped).violated, (name, m.label)

    criterion(capsys, 4, "Termination pipeline", 60, body)


def test_criterion_5_soundness_matrix(capsys):
    def body():
        bounds = ExecBounds(max_steps=10_000, input_range=(0, 255), width=8)
        cells = holds = 0
        for entry in discover():
            an = entry.analyze()
            if not an.safe:
                continue
            assert is_error_free(an.ats)
            for m in presets(8):
                cells += 1
                if an.mapped and not check_adherence(m, an.mapped, width=8).holds:
                    continue
                holds += 1
                res = reach_error_bounded(an.cfa, bounds, m)
                assert res.verdict is not ExecVerdict.ERROR_REACHED, (entry.name, m.label, res.witness.trace())
        assert cells == 6 * len(discover())
        assert holds > 0

    criterion(capsys, 5, "Soundness suite", 300, body)


def test_criterion_6_abstraction_correctness(capsys):
    def body():
        test_abstraction.test_galois_direction_one()
        test_abstraction.test_safe_approximation_exhaustive()
        test_logic.test_substitution_preserves_truth()

    criterion(capsys, 6, "Abstraction correctness", 300, body)


def test_criterion_7_engine_cross_validation(capsys):
    def body():
        test_checkers.test_engines_agree_on_random_instances()
        test_checkers.test_bitblast_equisatisfiable_small_widths()

    criterion(capsys, 7, "Engine cross-validation", 120, body)


def test_criterion_8_sat_solver(capsys):
    def body():
        assert not sat_solve(test_sat.pigeonhole(4, 3))
        test_sat.test_random_3sat_matches_enumeration()

    criterion(capsys, 8, "SAT solver", 60, body)


def test_criterion_9_adder_invariants(capsys):
    def body():
        test_adders.test_below_exact_bound_exhaustive_8()
        test_adders.test_carry_free_exactness_exhaustive_8()
        test_adders.test_netlist_equivalence_exhaustive_8()
        rng = np.random.default_rng(16)
        x = rng.integers(0, 1 << 16, 100_000)
        y = rng.integers(0, 1 << 16, 100_000)
        for m in presets(16):
            assert (to_netlist(m).evaluate_many(x, y) == m.evaluate_many(x, y)).all(), m.label

    criterion(capsys, 9, "Adder invariants", 120, body)
