"""Exact and approximate adder models: behavioral evaluation, gate-level
netlists and named presets."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import numpy as np

EXACT = "exact"
SLICE_SUM = "slice_sum"
GENERATE_ONLY = "generate_only"


@dataclass(frozen=True)
class AdderModel:
    """An N-bit adder with an (N+1)-bit result.

    ``slice_sum``: sub-adder k adds the window of bits
    ``[max(0, kR - P), kR + R - 1]`` of both operands with carry-in 0 and
    owns result bits ``kR .. kR + R - 1``.
    ``generate_only``: block k adds its own R bits with carry-in
    ``x[kR-1] & y[kR-1]``.
    In both modes the top sub-adder's carry-out is result bit N.
    """

    width: int
    kind: str = EXACT
    r: int = 0
    p: int = 0
    name: str = ""
    best_effort: bool = False

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("width must be positive")
        if self.kind == EXACT:
            return
        if self.kind not in (SLICE_SUM, GENERATE_ONLY):
            raise ValueError(f"unknown adder kind {self.kind!r}")
        if not 1 <= self.r <= self.width:
            raise ValueError("R must lie in [1, N]")
        if self.width % self.r:
            raise ValueError(f"R={self.r} does not divide N={self.width}")
        if not 0 <= self.p <= self.width:
            raise ValueError("P must lie in [0, N]")
        if self.kind == GENERATE_ONLY and self.p != 1:
            object.__setattr__(self, "p", 1)

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.kind == EXACT:
            return f"exact_{self.width}"
        return f"{self.kind}_{self.width}_{self.r}_{self.p}"

    @property
    def exact(self) -> bool:
        return self.kind == EXACT

    def windows(self) -> list[tuple[int, int]]:
        """``(lo, hi)`` bit range read by each sub-adder (slice_sum mode)."""
        return [(max(0, k * self.r - self.p), k * self.r + self.r - 1) for k in range(self.width // self.r)]

    def _check(self, x: int, y: int) -> None:
        hi = (1 << self.width) - 1
        if not (0 <= x <= hi and 0 <= y <= hi):
            raise ValueError(f"operands ({x}, {y}) outside [0, {hi}]")

    def evaluate(self, x: int, y: int) -> int:
        self._check(x, y)
        if self.kind == EXACT:
            return x + y
        r, n = self.r, self.width
        blocks = n // r
        rmask = (1 << r) - 1
        z = 0
        if self.kind == SLICE_SUM:
            for k, (lo, hi) in enumerate(self.windows()):
                wmask = (1 << (hi - lo + 1)) - 1
                s = ((x >> lo) & wmask) + ((y >> lo) & wmask)
                z |= ((s >> (k * r - lo)) & rmask) << (k * r)
                if k == blocks - 1:
                    z |= ((s >> (hi - lo + 1)) & 1) << n
            return z
        for k in range(blocks):
            cin = ((x >> (k * r - 1)) & (y >> (k * r - 1)) & 1) if k else 0
            s = ((x >> (k * r)) & rmask) + ((y >> (k * r)) & rmask) + cin
            z |= (s & rmask) << (k * r)
            if k == blocks - 1:
                z |= ((s >> r) & 1) << n
        return z

    def evaluate_many(self, x, y) -> np.ndarray:
        """Vectorized ``evaluate`` over integer arrays (range is not checked)."""
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        if self.kind == EXACT:
            return x + y
        r, n = self.r, self.width
        blocks = n // r
        rmask = (1 << r) - 1
        z = np.zeros(np.broadcast(x, y).shape, dtype=np.int64)
        if self.kind == SLICE_SUM:
            for k, (lo, hi) in enumerate(self.windows()):
                wmask = (1 << (hi - lo + 1)) - 1
                s = ((x >> lo) & wmask) + ((y >> lo) & wmask)
                z |= ((s >> (k * r - lo)) & rmask) << (k * r)
                if k == blocks - 1:
                    z |= ((s >> (hi - lo + 1)) & 1) << n
            return z
        for k in range(blocks):
            cin = ((x >> (k * r - 1)) & (y >> (k * r - 1)) & 1) if k else 0
            s = ((x >> (k * r)) & rmask) + ((y >> (k * r)) & rmask) + cin
            z |= (s & rmask) << (k * r)
            if k == blocks - 1:
                z |= ((s >> r) & 1) << n
        return z

    def describe(self) -> dict:
        mode = {EXACT: "ExactRipple", SLICE_SUM: "SliceSum", GENERATE_ONLY: "GenerateOnly"}[self.kind]
        d = {"name": self.label, "N": self.width, "mode": mode}
        if self.kind != EXACT:
            d.update(R=self.r, P=self.p)
        if self.best_effort:
            d["best_effort"] = True
        return d


def exact(width: int, name: str = "") -> AdderModel:
    return AdderModel(width, EXACT, name=name)


def slice_sum(width: int, r: int, p: int, name: str = "", best_effort: bool = False) -> AdderModel:
    return AdderModel(width, SLICE_SUM, r, p, name, best_effort)


def generate_only(width: int, r: int, name: str = "") -> AdderModel:
    return AdderModel(width, GENERATE_ONLY, r, 1, name)


# ---------------------------------------------------------------------------
# presets

FAMILIES = ("rca", "aca_i", "aca_ii", "etaii", "gear", "gda")


def preset_for(family: str, width: int = 16) -> AdderModel:
    """The calibrated member of ``family`` at the given width."""
    if family == "rca":
        return exact(width, f"rca_{width}")
    if family == "aca_i":
        return slice_sum(width, 1, 4, f"aca_i_{width}_4")
    if family == "etaii":
        return slice_sum(width, 4, 4, f"etaii_{width}_4")
    if family == "aca_ii":
        return generate_only(width, 4, f"aca_ii_{width}_4")
    if family == "gear":
        return slice_sum(width, 2, 4, f"gear_{width}_2_4")
    if family == "gda":
        return slice_sum(width, 4, 4, f"gda_{width}", best_effort=True)
    raise KeyError(family)


def presets(width: int = 16) -> list[AdderModel]:
    return [preset_for(f, width) for f in FAMILIES]


_NAME_PATTERNS = [
    (re.compile(r"rca_(\d+)"), lambda n: exact(n, f"rca_{n}")),
    (re.compile(r"aca_i_(\d+)_(\d+)"), lambda n, p: slice_sum(n, 1, p, f"aca_i_{n}_{p}")),
    (re.compile(r"aca_ii_(\d+)_(\d+)"), lambda n, q: generate_only(n, q, f"aca_ii_{n}_{q}")),
    (re.compile(r"etaii_(\d+)_(\d+)"), lambda n, b: slice_sum(n, b, b, f"etaii_{n}_{b}")),
    (re.compile(r"gear_(\d+)_(\d+)_(\d+)"), lambda n, r, p: slice_sum(n, r, p, f"gear_{n}_{r}_{p}")),
    (re.compile(r"gda_(\d+)"), lambda n: slice_sum(n, 4, 4, f"gda_{n}", best_effort=True)),
]


def get_preset(name: str, width: int | None = None) -> AdderModel:
    """Look up a preset by full name (``aca_ii_16_4``) or by family name
    (``aca_ii``, needs ``width``)."""
    if name in FAMILIES:
        return preset_for(name, 16 if width is None else width)
    for pattern, make in _NAME_PATTERNS:
        m = pattern.fullmatch(name)
        if m:
            model = make(*(int(g) for g in m.groups()))
            if width is not None and model.width != width:
                raise ValueError(f"preset {name} has width {model.width}, not {width}")
            return model
    raise KeyError(f"unknown adder preset {name!r}")


def dump_models(models: list[AdderModel]) -> str:
    return "".join(json.dumps(m.describe()) + "\n" for m in models)


# ---------------------------------------------------------------------------
# gate level

GATE_OPS = ("CONST0", "CONST1", "AND", "OR", "XOR", "NOT")


@dataclass(frozen=True)
class Gate:
    op: str
    ins: tuple[int, ...]
    out: int


@dataclass
class Netlist:
    width: int
    x: list[int]
    y: list[int]
    z: list[int] = field(default_factory=list)
    gates: list[Gate] = field(default_factory=list)
    num_nets: int = 0

    def new_net(self) -> int:
        self.num_nets += 1
        return self.num_nets - 1

    def add(self, op: str, *ins: int) -> int:
        out = self.new_net()
        self.gates.append(Gate(op, tuple(ins), out))
        return out

    def full_adder(self, a: int, b: int, c: int) -> tuple[int, int]:
        t = self.add("XOR", a, b)
        s = self.add("XOR", t, c)
        g = self.add("AND", a, b)
        p = self.add("AND", t, c)
        return s, self.add("OR", g, p)

    def is_topological(self) -> bool:
        defined = set(self.x) | set(self.y)
        for g in self.gates:
            if any(i not in defined for i in g.ins) or g.out in defined:
                return False
            defined.add(g.out)
        return all(n in defined for n in self.z)

    def evaluate_many(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        shape = np.broadcast(x, y).shape
        vals: dict[int, np.ndarray] = {}
        for i, net in enumerate(self.x):
            vals[net] = np.broadcast_to((x >> i) & 1, shape).astype(bool)
        for i, net in enumerate(self.y):
            vals[net] = np.broadcast_to((y >> i) & 1, shape).astype(bool)
        for g in self.gates:
            if g.op == "CONST0":
                vals[g.out] = np.zeros(shape, dtype=bool)
            elif g.op == "CONST1":
                vals[g.out] = np.ones(shape, dtype=bool)
            elif g.op == "AND":
                vals[g.out] = vals[g.ins[0]] & vals[g.ins[1]]
            elif g.op == "OR":
                vals[g.out] = vals[g.ins[0]] | vals[g.ins[1]]
            elif g.op == "XOR":
                vals[g.out] = vals[g.ins[0]] ^ vals[g.ins[1]]
            else:
                vals[g.out] = ~vals[g.ins[0]]
        z = np.zeros(shape, dtype=np.int64)
        for i, net in enumerate(self.z):
            z |= vals[net].astype(np.int64) << i
        return z

    def evaluate(self, x: int, y: int) -> int:
        return int(self.evaluate_many([x], [y])[0])


def to_netlist(m: AdderModel) -> Netlist:
    n = m.width
    net = Netlist(n, list(range(n)), list(range(n, 2 * n)), num_nets=2 * n)
    zero = net.add("CONST0")
    x, y = net.x, net.y
    if m.kind == EXACT:
        c = zero
        for i in range(n):
            s, c = net.full_adder(x[i], y[i], c)
            net.z.append(s)
        net.z.append(c)
        return net
    z: list[int] = [zero] * (n + 1)
    blocks = n // m.r
    for k in range(blocks):
        base = k * m.r
        if m.kind == SLICE_SUM:
            lo, hi = m.windows()[k]
            c = zero
        else:
            lo, hi = base, base + m.r - 1
            c = net.add("AND", x[base - 1], y[base - 1]) if k else zero
        for i in range(lo, hi + 1):
            s, c = net.full_adder(x[i], y[i], c)
            if i >= base:
                z[i] = s
        if k == blocks - 1:
            z[n] = c
    net.z = z
    return net
