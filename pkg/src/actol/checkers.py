"""Adherence of adder models to mapped tolerance constraints: an exhaustive
engine with interval narrowing, a bit-blasting SAT engine, and Verilog /
DIMACS emission for external tools."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .adders import AdderModel, Netlist, to_netlist
from .logic import FALSE_KEY, TRUE_KEY, Atom, Conjunction, LinExpr, Refutation, canonical, refute
from .sat import CnfFormula, sat_solve
from .tolerance import MappedConstraint, constant_equalities

DEFAULT_BUDGET = 1 << 24
CHUNK = 1 << 20


class Status(enum.Enum):
    HOLDS = "Holds"
    VIOLATED = "Violated"
    UNKNOWN = "Unknown"


@dataclass
class Verdict:
    status: Status
    witness: dict[str, int] | None = None
    z: int | None = None
    reason: str = ""
    engine: str = ""
    constraint: int | None = None
    pair: int | None = None

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    @property
    def violated(self) -> bool:
        return self.status is Status.VIOLATED

    def to_json(self) -> dict:
        d = {"verdict": self.status.value, "engine": self.engine}
        if self.constraint is not None:
            d["constraint"] = self.constraint
        if self.witness is not None:
            d["witness"] = dict(self.witness)
            d["z"] = self.z
        if self.reason:
            d["reason"] = self.reason
        return d


def _violation(m: AdderModel, pre: Conjunction, post: Conjunction, env: dict[str, int],
               engine: str, pair: int) -> Verdict:
    """Build a Violated verdict after re-checking the witness."""
    z = m.evaluate(env["x"], env["y"])
    full = dict(env, z=z)
    if not pre.holds(full) or post.holds(full):
        raise AssertionError(f"{engine} produced an invalid witness {full}")
    return Verdict(Status.VIOLATED, env, z, engine=engine, pair=pair)


def side_range(width: int) -> tuple[int, int]:
    """Side variables range over (N+2)-bit two's complement in both engines."""
    return -(1 << (width + 1)), (1 << (width + 1)) - 1


# ---------------------------------------------------------------------------
# interval narrowing

Interval = list  # [lo, hi] with None for an infinite end


def narrow(pre: Conjunction, domains: dict[str, Interval], rounds: int = 64) -> dict[str, Interval] | None:
    """Bounds propagation over the linear literals of ``pre``; ``None`` when
    some domain becomes empty."""
    doms = {v: list(d) for v, d in domains.items()}
    rows: list[tuple[tuple, int]] = []
    neqs: list[tuple[tuple, int]] = []
    for q in pre.literals:
        k = canonical(q)
        if k == FALSE_KEY:
            return None
        if k == TRUE_KEY:
            continue
        rel, coeffs, const = k
        for v, _ in coeffs:
            doms.setdefault(v, [None, None])
        if rel == "<=":
            rows.append((coeffs, const))
        elif rel == "==":
            rows.append((coeffs, const))
            rows.append((tuple((v, -c) for v, c in coeffs), -const))
        else:
            neqs.append((coeffs, const))
    for _ in range(rounds):
        changed = False
        for coeffs, const in rows:
            for j, (vj, aj) in enumerate(coeffs):
                # aj*vj <= -const - sum_{i != j} min(ai*vi)
                rest = -const
                bounded = True
                for i, (vi, ai) in enumerate(coeffs):
                    if i == j:
                        continue
                    lo, hi = doms[vi]
                    end = lo if ai > 0 else hi
                    if end is None:
                        bounded = False
                        break
                    rest -= ai * end
                if not bounded:
                    continue
                lo, hi = doms[vj]
                if aj > 0:
                    nb = rest // aj
                    if hi is None or nb < hi:
                        doms[vj][1] = nb
                        changed = True
                else:
                    nb = -(rest // -aj)
                    if lo is None or nb > lo:
                        doms[vj][0] = nb
                        changed = True
                lo, hi = doms[vj]
                if lo is not None and hi is not None and lo > hi:
                    return None
        for coeffs, const in neqs:
            if len(coeffs) == 1:
                (v, a), = coeffs
                if const % a == 0:
                    banned = -const // a
                    lo, hi = doms[v]
                    if lo == banned:
                        doms[v][0] = lo + 1
                        changed = True
                    if hi == banned:
                        doms[v][1] = hi - 1
                        changed = True
                    lo, hi = doms[v]
                    if lo is not None and hi is not None and lo > hi:
                        return None
        if not changed:
            break
    return doms


def _port_domains(mc: MappedConstraint, width: int, side_ranges: dict[str, tuple[int, int]] | None):
    top = (1 << width) - 1
    doms: dict[str, Interval] = {"x": [0, top], "y": [0, top]}
    for v in mc.side_vars:
        doms[v] = list(side_ranges[v]) if side_ranges and v in side_ranges else [None, None]
    return doms


def _pair_variables(mc: MappedConstraint, pre: Conjunction, post: Conjunction) -> list[str]:
    names = set(mc.side_vars) | (pre.vars | post.vars) - {"x", "y", "z"}
    return ["x", "y"] + sorted(names)


def _domain(mc, pre, post, width, side_ranges):
    """Narrowed finite domains, or ``None`` if pre is infeasible. Side
    variables the pre leaves open take the full signed side range."""
    doms = _port_domains(mc, width, side_ranges)
    for v in _pair_variables(mc, pre, post):
        doms.setdefault(v, [None, None])
    doms = narrow(pre, doms)
    if doms is None:
        return None
    slo, shi = side_range(width)
    out = {}
    for v in _pair_variables(mc, pre, post):
        lo, hi = doms[v]
        if v not in ("x", "y"):
            lo = slo if lo is None else max(lo, slo)
            hi = shi if hi is None else min(hi, shi)
        if lo > hi:
            return None
        out[v] = (lo, hi)
    return out


def _eval_key(key: tuple, env: dict[str, np.ndarray]) -> np.ndarray:
    rel, coeffs, const = key
    t = np.full(next(iter(env.values())).shape, const, dtype=np.int64)
    for v, c in coeffs:
        t = t + c * env[v]
    if rel == "<=":
        return t <= 0
    if rel == "==":
        return t == 0
    return t != 0


def _eval_conj(c: Conjunction, env: dict[str, np.ndarray], shape) -> np.ndarray:
    out = np.ones(shape, dtype=bool)
    for q in c.literals:
        k = canonical(q)
        if k == FALSE_KEY:
            return np.zeros(shape, dtype=bool)
        if k != TRUE_KEY:
            out &= _eval_key(k, env)
    return out


def _exhaustive_pair(m, mc, pair, width, budget, side_ranges) -> Verdict:
    pre, post = mc.pairs[pair]
    if pre.bottom or refute(pre) is Refutation.UNSAT:
        return Verdict(Status.HOLDS, engine="exhaustive", reason="vacuous", pair=pair)
    dom = _domain(mc, pre, post, width, side_ranges)
    if dom is None:
        return Verdict(Status.HOLDS, engine="exhaustive", reason="vacuous", pair=pair)
    names = list(dom)
    sizes = [dom[v][1] - dom[v][0] + 1 for v in names]
    total = math.prod(sizes)
    if total > budget:
        return Verdict(Status.UNKNOWN, engine="exhaustive", reason="budget", pair=pair)
    strides = [math.prod(sizes[i + 1:]) for i in range(len(sizes))]
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(total, start + CHUNK), dtype=np.int64)
        env = {v: (idx // strides[i]) % sizes[i] + dom[v][0] for i, v in enumerate(names)}
        shape = idx.shape
        mask = _eval_conj(pre, env, shape)
        if not mask.any():
            continue
        env["z"] = m.evaluate_many(env["x"], env["y"])
        bad = mask & ~_eval_conj(post, env, shape)
        if bad.any():
            i = int(np.argmax(bad))
            witness = {v: int(env[v][i]) for v in names}
            return _violation(m, pre, post, witness, "exhaustive", pair)
    return Verdict(Status.HOLDS, engine="exhaustive", pair=pair)


def check_exhaustive(m: AdderModel, mc: MappedConstraint, width: int | None = None,
                     budget: int = DEFAULT_BUDGET,
                     side_ranges: dict[str, tuple[int, int]] | None = None) -> Verdict:
    """Enumerate every input satisfying some pre and test its post."""
    width = _width(m, width)
    unknown = None
    for i in range(len(mc.pairs)):
        v = _exhaustive_pair(m, mc, i, width, budget, side_ranges)
        if v.violated:
            return v
        if v.status is Status.UNKNOWN and unknown is None:
            unknown = v
    return unknown or Verdict(Status.HOLDS, engine="exhaustive")


def _width(m: AdderModel, width: int | None) -> int:
    if width is not None and width != m.width:
        raise ValueError(f"model {m.label} has width {m.width}, asked for {width}")
    return m.width


# ---------------------------------------------------------------------------
# bit-blasting


class _Circuit:
    """Tseitin encoder with constant folding; literals are CNF literals and
    ``self.t`` is the constant-true literal."""

    def __init__(self):
        self.f = CnfFormula()
        self.t = self.f.new_var()
        self.f.add_clause([self.t])

    def const(self, b: bool) -> int:
        return self.t if b else -self.t

    def var(self) -> int:
        return self.f.new_var()

    def AND(self, a: int, b: int) -> int:
        t = self.t
        if a == -t or b == -t or a == -b:
            return -t
        if a == t:
            return b
        if b == t or a == b:
            return a
        o = self.var()
        self.f.clauses += [[-o, a], [-o, b], [o, -a, -b]]
        return o

    def OR(self, a: int, b: int) -> int:
        return -self.AND(-a, -b)

    def XOR(self, a: int, b: int) -> int:
        t = self.t
        if a == -t:
            return b
        if b == -t:
            return a
        if a == t:
            return -b
        if b == t:
            return -a
        if a == b:
            return -t
        if a == -b:
            return t
        o = self.var()
        self.f.clauses += [[-o, a, b], [-o, -a, -b], [o, -a, b], [o, a, -b]]
        return o

    def all(self, lits: Iterable[int]) -> int:
        out = self.t
        for l in lits:
            out = self.AND(out, l)
        return out

    def any(self, lits: Iterable[int]) -> int:
        out = -self.t
        for l in lits:
            out = self.OR(out, l)
        return out

    def add(self, a: list[int], b: list[int], cin: int | None = None) -> list[int]:
        c = -self.t if cin is None else cin
        out = []
        for ai, bi in zip(a, b):
            p = self.XOR(ai, bi)
            out.append(self.XOR(p, c))
            c = self.OR(self.AND(ai, bi), self.AND(p, c))
        return out

    def constant(self, value: int, bits: int) -> list[int]:
        return [self.const(bool((value >> i) & 1)) for i in range(bits)]

    def negate(self, a: list[int]) -> list[int]:
        return self.add([-l for l in a], self.constant(0, len(a)), self.t)

    def scale(self, a: list[int], k: int) -> list[int]:
        bits = len(a)
        acc = self.constant(0, bits)
        mag = abs(k)
        shift = 0
        while mag:
            if mag & 1:
                shifted = [-self.t] * shift + a[: bits - shift]
                acc = self.add(acc, shifted)
            mag >>= 1
            shift += 1
        return self.negate(acc) if k < 0 else acc


def _atom_width(keys: Iterable[tuple], width: int) -> int:
    mag = 1 << (width + 1)
    need = width + 2
    for k in keys:
        if k in (TRUE_KEY, FALSE_KEY):
            continue
        _, coeffs, const = k
        bound = sum(abs(c) for _, c in coeffs) * mag + abs(const) + 1
        need = max(need, bound.bit_length() + 1)
    return need


def _netlist_outputs(c: _Circuit, net: Netlist, xs: list[int], ys: list[int]) -> list[int]:
    val: dict[int, int] = {}
    for i, n in enumerate(net.x):
        val[n] = xs[i]
    for i, n in enumerate(net.y):
        val[n] = ys[i]
    for g in net.gates:
        if g.op == "CONST0":
            val[g.out] = c.const(False)
        elif g.op == "CONST1":
            val[g.out] = c.const(True)
        elif g.op == "AND":
            val[g.out] = c.AND(val[g.ins[0]], val[g.ins[1]])
        elif g.op == "OR":
            val[g.out] = c.OR(val[g.ins[0]], val[g.ins[1]])
        elif g.op == "XOR":
            val[g.out] = c.XOR(val[g.ins[0]], val[g.ins[1]])
        else:
            val[g.out] = -val[g.ins[0]]
    return [val[n] for n in net.z]


def bitblast(m: AdderModel, mc: MappedConstraint, width: int | None = None,
             pairs: Sequence[int] | None = None) -> CnfFormula:
    """CNF that is satisfiable iff some input raises the checker's error net.

    Atom arithmetic runs in two's complement wide enough that no term can
    overflow; x and y are zero-extended and side variables are free
    (N+2)-bit signed values.
    """
    width = _width(m, width)
    pairs = list(range(len(mc.pairs))) if pairs is None else list(pairs)
    keys = [canonical(q) for i in pairs for c in mc.pairs[i] for q in c.literals]
    bits = _atom_width(keys, width)
    c = _Circuit()
    xs = [c.var() for _ in range(width)]
    ys = [c.var() for _ in range(width)]
    for i, v in enumerate(xs):
        c.f.annotations[f"x[{i}]"] = v
    for i, v in enumerate(ys):
        c.f.annotations[f"y[{i}]"] = v
    zs = _netlist_outputs(c, to_netlist(m), xs, ys)
    for i, v in enumerate(zs):
        c.f.annotations[f"z[{i}]"] = v
    zero = c.const(False)
    vecs: dict[str, list[int]] = {
        "x": xs + [zero] * (bits - width),
        "y": ys + [zero] * (bits - width),
        "z": zs + [zero] * (bits - width - 1),
    }
    for name in sorted({v for i in pairs for part in mc.pairs[i] for v in part.vars} - {"x", "y", "z"}
                       | set(mc.side_vars)):
        raw = [c.var() for _ in range(width + 2)]
        for i, v in enumerate(raw):
            c.f.annotations[f"side:{name}[{i}]"] = v
        vecs[name] = raw + [raw[-1]] * (bits - width - 2)

    def literal(k: tuple) -> int:
        if k == TRUE_KEY:
            return c.const(True)
        if k == FALSE_KEY:
            return c.const(False)
        rel, coeffs, const = k
        # t <= 0 is tested as the sign of t - 1
        acc = c.constant((const - 1 if rel == "<=" else const) % (1 << bits), bits)
        for v, a in coeffs:
            acc = c.add(acc, c.scale(vecs[v], a))
        if rel == "<=":
            return acc[-1]
        nonzero = c.any(acc)
        return -nonzero if rel == "==" else nonzero

    errors = []
    for i in pairs:
        pre, post = mc.pairs[i]
        pre_net = c.const(False) if pre.bottom else c.all(literal(canonical(q)) for q in pre.literals)
        post_net = c.const(False) if post.bottom else c.all(literal(canonical(q)) for q in post.literals)
        errors.append(c.AND(pre_net, -post_net))
    error = c.any(errors)
    c.f.annotations["error"] = error
    c.f.add_clause([error])
    return c.f


def decode(f: CnfFormula, model: dict[int, bool], width: int) -> dict[str, int]:
    """Recover x, y and side-variable values from a satisfying assignment."""
    def bit(lit: int) -> int:
        return int(model.get(abs(lit), False) == (lit > 0))

    vals: dict[str, int] = {}
    sides: dict[str, dict[int, int]] = {}
    for name, lit in f.annotations.items():
        if name.startswith(("x[", "y[")):
            vals[name[0]] = vals.get(name[0], 0) | (bit(lit) << int(name[2:-1]))
        elif name.startswith("side:"):
            var, _, idx = name[5:-1].partition("[")
            sides.setdefault(var, {})[int(idx)] = bit(lit)
    for var, bits in sides.items():
        n = len(bits)
        u = sum(b << i for i, b in bits.items())
        vals[var] = u - (1 << n) if bits[n - 1] else u
    return vals


def check_sat(m: AdderModel, mc: MappedConstraint, width: int | None = None) -> Verdict:
    width = _width(m, width)
    for i in range(len(mc.pairs)):
        pre, post = mc.pairs[i]
        if pre.bottom:
            continue
        f = bitblast(m, mc, width, [i])
        result = sat_solve(f)
        if result.sat:
            env = decode(f, result.model, width)
            return _violation(m, pre, post, env, "sat", i)
    return Verdict(Status.HOLDS, engine="sat")


def _domain_size(mc: MappedConstraint, pair: int, width: int, side_ranges) -> int:
    pre, post = mc.pairs[pair]
    if pre.bottom:
        return 0
    dom = _domain(mc, pre, post, width, side_ranges)
    if dom is None:
        return 0
    return math.prod(hi - lo + 1 for lo, hi in dom.values())


def check_constraint(m: AdderModel, mc: MappedConstraint, engine: str = "auto", width: int | None = None,
                     budget: int = DEFAULT_BUDGET,
                     side_ranges: dict[str, tuple[int, int]] | None = None) -> Verdict:
    width = _width(m, width)
    if engine == "exhaustive":
        return check_exhaustive(m, mc, width, budget, side_ranges)
    if engine == "sat":
        return check_sat(m, mc, width)
    if engine != "auto":
        raise ValueError(f"unknown engine {engine!r}")
    for i in range(len(mc.pairs)):
        size = _domain_size(mc, i, width, side_ranges)
        if size <= budget:
            v = _exhaustive_pair(m, mc, i, width, budget, side_ranges)
        else:
            pre, post = mc.pairs[i]
            single = MappedConstraint(mc.statement, mc.op, mc.signature, [(pre, post)], mc.location)
            v = check_sat(m, single, width)
            v.pair = i
        if v.violated:
            return v
    return Verdict(Status.HOLDS, engine="auto")


def check_adherence(m: AdderModel, constraints: Sequence[MappedConstraint], engine: str = "auto",
                    width: int | None = None, budget: int = DEFAULT_BUDGET,
                    side_ranges: dict[str, tuple[int, int]] | None = None) -> Verdict:
    """Holds iff the model adheres to every constraint; stops at the first violation."""
    if not constraints:
        raise ValueError("no constraints to check")
    unknown = None
    for idx, mc in enumerate(constraints):
        v = check_constraint(m, mc, engine, width, budget, side_ranges)
        v.constraint = idx
        if v.violated:
            return v
        if v.status is Status.UNKNOWN and unknown is None:
            unknown = v
    return unknown or Verdict(Status.HOLDS, engine=engine)


# ---------------------------------------------------------------------------
# Verilog


def _verilog_term(q: Atom, simple: bool) -> str:
    def term(t: LinExpr) -> str:
        parts = []
        for v, c in t.coeffs:
            name = v if simple else f"{_vname(v)}_e"
            body = name if abs(c) == 1 else f"{abs(c)} * {name}"
            parts.append((" - " if c < 0 else " + ") + body)
        if t.const or not parts:
            parts.append((" - " if t.const < 0 else " + ") + str(abs(t.const)))
        text = "".join(parts)
        return text[3:] if text.startswith(" + ") else "-" + text[3:]

    return f"({term(q.lhs)} {q.cmp} {term(q.rhs)})"


def _vname(v: str) -> str:
    return v.replace("@", "_at_").replace("'", "_p")


def _is_simple(q: Atom) -> bool:
    for side in (q.lhs, q.rhs):
        if len(side.coeffs) > 1 or side.const < 0:
            return False
        if side.coeffs and (side.coeffs[0][0] not in ("x", "y", "z") or side.coeffs[0][1] != 1):
            return False
    return True


def checker_verilog(mc: MappedConstraint, width: int) -> str:
    gens = list(constant_equalities(mc))
    gen_keys = {canonical(g) for g in gens}
    sides = [_vname(s) for s in mc.side_vars]
    ports = ["x", "y", "z"] + sides + ["error"]
    ext = width + 2
    decls = [
        f"  parameter Nin = {width};",
        f"  parameter Nout = {width + 1};",
        "",
        "  input [Nin-1:0] x;",
        "  input [Nin-1:0] y;",
        "  input [Nout-1:0] z;",
    ]
    decls += [f"  input signed [Nin+1:0] {s};" for s in sides]
    decls.append("  output error;")
    decls.append("")
    body: list[str] = []
    wires: list[str] = []
    needs_ext = False
    counter = 0

    def atom_net(q: Atom) -> str:
        nonlocal counter, needs_ext
        counter += 1
        name = f"term__{counter}"
        wires.append(name)
        simple = _is_simple(q)
        needs_ext = needs_ext or not simple
        body.append(f"  assign {name} = {_verilog_term(q, simple)};")
        return name

    errors = []
    gen_names = []
    for i, g in enumerate(gens):
        gen_names.append(f"pre__gen_{i}")
    for idx, (pre, post) in enumerate(mc.pairs):
        q1, q2 = f"Q__{2 * idx + 1}", f"Q__{2 * idx + 2}"
        wires += [q1, q2]
        pre_lits = [q for q in pre.literals if canonical(q) not in gen_keys]
        gen_here = [gen_names[j] for j, g in enumerate(gens) if g in pre]
        terms = [atom_net(q) for q in pre_lits]
        body.append(f"  assign {q1} = {_join(terms, pre.bottom)};")
        terms = [atom_net(q) for q in post.literals]
        body.append(f"  assign {q2} = {_join(terms, post.bottom)};")
        if not pre.bottom and not pre_lits and not gen_here:
            errors.append(f"!({q2})")
        else:
            errors.append(f"!(( !({' && '.join([q1] + gen_here)}) || {q2}))")
    for i, g in enumerate(gens):
        wires.append(gen_names[i])
        body.append(f"  assign {gen_names[i]} = ({g.lhs} == {g.rhs});")
    ext_lines = []
    if needs_ext:
        for v, w in (("x", width), ("y", width), ("z", width + 1)):
            ext_lines.append(f"  wire signed [{ext + 8}:0] {v}_e = $signed({{{{{ext + 9 - w}{{1'b0}}}}, {v}}});")
        for s in sides:
            ext_lines.append(f"  wire signed [{ext + 8}:0] {s}_e = {s};")
    out = [f"module TCChecker({', '.join(ports)});"] + decls
    out += [f"  wire {w};" for w in wires]
    out += ext_lines + [""] + body + [""]
    out.append(f"  assign error = {' || '.join(errors)};")
    out.append("endmodule")
    return "\n".join(out) + "\n"


def _join(terms: list[str], bottom: bool) -> str:
    if bottom:
        return "1'b0"
    if not terms:
        return "1'b1"
    if len(terms) == 1:
        return terms[0]
    return "(" + " && ".join(terms) + ")"


def adder_verilog(m: AdderModel, module: str = "Adder") -> str:
    net = to_netlist(m)
    n = m.width
    lines = [f"// {m.label}: gate-level netlist", f"module {module}(x, y, z);",
             f"  input [{n - 1}:0] x;", f"  input [{n - 1}:0] y;", f"  output [{n}:0] z;"]
    names: dict[int, str] = {}
    for i, w in enumerate(net.x):
        names[w] = f"x[{i}]"
    for i, w in enumerate(net.y):
        names[w] = f"y[{i}]"
    for g in net.gates:
        names[g.out] = f"n{g.out}"
        lines.append(f"  wire n{g.out};")
    ops = {"AND": "&", "OR": "|", "XOR": "^"}
    for g in net.gates:
        if g.op == "CONST0":
            rhs = "1'b0"
        elif g.op == "CONST1":
            rhs = "1'b1"
        elif g.op == "NOT":
            rhs = f"~{names[g.ins[0]]}"
        else:
            rhs = f"{names[g.ins[0]]} {ops[g.op]} {names[g.ins[1]]}"
        lines.append(f"  assign n{g.out} = {rhs};")
    for i, w in enumerate(net.z):
        lines.append(f"  assign z[{i}] = {names[w]};")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def adherence_verilog(m: AdderModel, mc: MappedConstraint) -> str:
    n = m.width
    sides = [_vname(s) for s in mc.side_vars]
    ports = ["  input [{}:0] inp1,".format(n - 1), "  input [{}:0] inp2,".format(n - 1)]
    ports += [f"  input signed [{n + 1}:0] {s}," for s in sides]
    ports.append("  output errorBit);")
    side_conn = "".join(f"    .{s}({s}),\n" for s in sides)
    return (
        "module AdherenceChecker(\n" + "\n".join(ports) + "\n\n"
        f"  wire[{n}:0] outp;\n\n"
        "  Adder add(\n    .x(inp1),\n    .y(inp2),\n    .z(outp)\n  );\n\n"
        "  TCChecker check(\n    .x(inp1),\n    .y(inp2),\n    .z(outp),\n"
        f"{side_conn}    .error(errorBit)\n  );\nendmodule\n"
    )


def emit_checker_hdl(m: AdderModel, mc: MappedConstraint, width: int | None = None,
                     path: str | Path | None = None) -> str:
    """Verilog text for the adder, the constraint checker and their combination."""
    width = _width(m, width)
    text = checker_verilog(mc, width) + "\n" + adder_verilog(m) + "\n" + adherence_verilog(m, mc)
    if path is not None:
        Path(path).write_text(text)
    return text
