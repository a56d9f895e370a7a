"""CNF formulas, DIMACS I/O and a CDCL SAT solver (two watched literals,
first-UIP learning, VSIDS branching with phase saving, geometric restarts)."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class CnfFormula:
    num_vars: int = 0
    clauses: list[list[int]] = field(default_factory=list)
    # circuit net name -> variable (negative for an inverted net)
    annotations: dict[str, int] = field(default_factory=dict)

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def add_clause(self, lits) -> None:
        clause = list(lits)
        if not clause:
            raise ValueError("empty clause")
        for lit in clause:
            if lit == 0 or abs(lit) > self.num_vars:
                raise ValueError(f"literal {lit} out of range")
        self.clauses.append(clause)

    def satisfied_by(self, model: dict[int, bool]) -> bool:
        return all(any(model.get(abs(l), False) == (l > 0) for l in c) for c in self.clauses)


def dumps_dimacs(f: CnfFormula) -> str:
    lines = [f"c {name} {var}" for name, var in sorted(f.annotations.items())]
    lines.append(f"p cnf {f.num_vars} {len(f.clauses)}")
    lines += [" ".join(map(str, c)) + " 0" for c in f.clauses]
    return "\n".join(lines) + "\n"


def export_dimacs(f: CnfFormula, path: str | Path) -> None:
    Path(path).write_text(dumps_dimacs(f))


def loads_dimacs(text: str) -> CnfFormula:
    f = CnfFormula()
    declared = None
    pending: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("c"):
            parts = line.split()
            if len(parts) == 3 and parts[2].lstrip("-").isdigit():
                f.annotations[parts[1]] = int(parts[2])
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: bad header")
            f.num_vars, declared = int(parts[2]), int(parts[3])
            continue
        if declared is None:
            raise ValueError(f"line {lineno}: clause before header")
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                f.add_clause(pending)
                pending = []
            else:
                pending.append(lit)
    if pending:
        f.add_clause(pending)
    if declared is not None and declared != len(f.clauses):
        raise ValueError(f"header declares {declared} clauses, found {len(f.clauses)}")
    return f


def import_dimacs(path: str | Path) -> CnfFormula:
    return loads_dimacs(Path(path).read_text())


@dataclass
class SatResult:
    sat: bool
    model: dict[int, bool] = field(default_factory=dict)
    conflicts: int = 0
    decisions: int = 0

    def __bool__(self) -> bool:
        return self.sat


class _Solver:
    def __init__(self, f: CnfFormula):
        n = f.num_vars
        self.n = n
        self.value = [0] * (n + 1)  # 1 true, -1 false, 0 unassigned
        self.level = [0] * (n + 1)
        self.reason: list[list[int] | None] = [None] * (n + 1)
        self.phase = [-1] * (n + 1)
        self.activity = [0.0] * (n + 1)
        self.inc = 1.0
        self.watches: dict[int, list[list[int]]] = {}
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.heap = [(0.0, v) for v in range(1, n + 1)]
        heapq.heapify(self.heap)
        self.conflicts = 0
        self.decisions = 0
        self.ok = True
        for clause in f.clauses:
            self._add_input(clause)

    def _lit_value(self, lit: int) -> int:
        v = self.value[abs(lit)]
        return v if lit > 0 else -v

    def _add_input(self, clause: list[int]) -> None:
        lits = sorted(set(clause), key=abs)
        if any(-l in lits for l in lits):
            return
        if len(lits) == 1:
            val = self._lit_value(lits[0])
            if val == -1:
                self.ok = False
            elif val == 0:
                self._enqueue(lits[0], None)
            return
        self._watch(lits)

    def _watch(self, clause: list[int]) -> None:
        self.watches.setdefault(clause[0], []).append(clause)
        self.watches.setdefault(clause[1], []).append(clause)

    def _enqueue(self, lit: int, reason) -> None:
        v = abs(lit)
        self.value[v] = 1 if lit > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self):
        value = self.value
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            false_lit = -p
            ws = self.watches.get(false_lit)
            if not ws:
                continue
            kept = []
            i = 0
            conflict = None
            while i < len(ws):
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                first = c[0]
                fv = value[abs(first)]
                if (fv if first > 0 else -fv) == 1:
                    kept.append(c)
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    lv = value[abs(lk)]
                    if (lv if lk > 0 else -lv) != -1:
                        c[1], c[k] = lk, c[1]
                        self.watches.setdefault(lk, []).append(c)
                        break
                else:
                    kept.append(c)
                    if (fv if first > 0 else -fv) == -1:
                        conflict = c
                        kept.extend(ws[i:])
                        break
                    self._enqueue(first, c)
            self.watches[false_lit] = kept
            if conflict is not None:
                return conflict
        return None

    def _bump(self, v: int) -> None:
        self.activity[v] += self.inc
        if self.activity[v] > 1e100:
            self.activity = [a * 1e-100 for a in self.activity]
            self.inc *= 1e-100
            self.heap = [(-self.activity[u], u) for u in range(1, self.n + 1) if not self.value[u]]
            heapq.heapify(self.heap)
        elif not self.value[v]:
            heapq.heappush(self.heap, (-self.activity[v], v))

    def _analyze(self, conflict: list[int]) -> tuple[list[int], int]:
        seen = [False] * (self.n + 1)
        learnt = [0]
        counter = 0
        p = None
        idx = len(self.trail) - 1
        clause = conflict
        current = len(self.trail_lim)
        while True:
            for q in clause:
                if p is not None and q == p:
                    continue
                v = abs(q)
                if not seen[v] and self.level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if self.level[v] >= current:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[abs(self.trail[idx])]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            seen[abs(p)] = False
            counter -= 1
            if counter == 0:
                break
            clause = self.reason[abs(p)]
        learnt[0] = -p
        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda i: self.level[abs(learnt[i])])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, self.level[abs(learnt[1])]

    def _backtrack(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        start = self.trail_lim[lvl]
        for lit in self.trail[start:]:
            v = abs(lit)
            self.phase[v] = self.value[v]
            self.value[v] = 0
            self.reason[v] = None
            heapq.heappush(self.heap, (-self.activity[v], v))
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _decide(self) -> int | None:
        while self.heap:
            _, v = heapq.heappop(self.heap)
            if not self.value[v]:
                return v if self.phase[v] > 0 else -v
        return None

    def solve(self) -> bool:
        if not self.ok or self._propagate() is not None:
            return False
        restart_at = 100.0
        since_restart = 0
        while True:
            conflict = self._propagate()
            if conflict is not None:
                self.conflicts += 1
                since_restart += 1
                if not self.trail_lim:
                    return False
                learnt, back = self._analyze(conflict)
                self._backtrack(back)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self._watch(learnt)
                    self._enqueue(learnt[0], learnt)
                self.inc /= 0.95
                continue
            if since_restart >= restart_at:
                since_restart = 0
                restart_at *= 1.5
                self._backtrack(0)
                continue
            lit = self._decide()
            if lit is None:
                return True
            self.decisions += 1
            self.trail_lim.append(len(self.trail))
            self._enqueue(lit, None)


def sat_solve(f: CnfFormula) -> SatResult:
    for c in f.clauses:
        if not c:
            return SatResult(False)
    s = _Solver(f)
    if not s.solve():
        return SatResult(False, conflicts=s.conflicts, decisions=s.decisions)
    model = {v: s.value[v] > 0 for v in range(1, f.num_vars + 1)}
    assert f.satisfied_by(model), "solver produced a non-model"
    return SatResult(True, model, s.conflicts, s.decisions)
