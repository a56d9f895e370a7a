"""Concrete semantics over unbounded integers and a bounded exhaustive executor,
optionally running every ``v := a + b`` through an adder model."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Protocol

from .frontend import CFA, Assign, Assume, Edge, Skip, Statement
from .syntax import And, BExpr, BinOp, BoolConst, Cmp, Const, Expr, Input, Not, Or, Var

State = dict[str, int]


class Fault(Exception):
    """A run aborted without reaching an error location (division by zero,
    operand outside the machine range)."""

    def __init__(self, kind: str, detail: str):
        super().__init__(f"{kind}: {detail}")
        self.kind = kind
        self.detail = detail


class Adder(Protocol):
    width: int

    def evaluate(self, x: int, y: int) -> int: ...


def c_div(a: int, b: int) -> int:
    """Integer division truncating toward zero, as in C."""
    if b == 0:
        raise Fault("division-by-zero", f"{a} / 0")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def eval_expr(e: Expr, s: Mapping[str, int]) -> int:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return s[e.name]
    if isinstance(e, BinOp):
        a, b = eval_expr(e.left, s), eval_expr(e.right, s)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        return c_div(a, b)
    if isinstance(e, Input):
        raise ValueError("input() has no value; the executor supplies it")
    raise TypeError(f"not an expression: {e!r}")


_CMP = {
    "<": lambda a, b: a < b, "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b, ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b, "!=": lambda a, b: a != b,
}


def eval_bexpr(b: BExpr, s: Mapping[str, int]) -> bool:
    if isinstance(b, Cmp):
        return _CMP[b.op](eval_expr(b.left, s), eval_expr(b.right, s))
    if isinstance(b, And):
        return eval_bexpr(b.left, s) and eval_bexpr(b.right, s)
    if isinstance(b, Or):
        return eval_bexpr(b.left, s) or eval_bexpr(b.right, s)
    if isinstance(b, Not):
        return not eval_bexpr(b.arg, s)
    if isinstance(b, BoolConst):
        return b.value
    raise TypeError(f"not a condition: {b!r}")


def _approx_add(adder: Adder, a: int, b: int) -> int:
    hi = (1 << adder.width) - 1
    if not (0 <= a <= hi and 0 <= b <= hi):
        raise Fault("range", f"operands {a} + {b} outside [0, {hi}]")
    return adder.evaluate(a, b)


def step(stm: Statement, s: Mapping[str, int], adder: Adder | None = None) -> Optional[State]:
    """Successor of ``s`` under ``stm``; ``None`` when an assumption fails."""
    if isinstance(stm, Assume):
        return dict(s) if eval_bexpr(stm.cond, s) else None
    if isinstance(stm, Assign):
        e = stm.expr
        if adder is not None and isinstance(e, BinOp) and e.op == "+":
            value = _approx_add(adder, eval_expr(e.left, s), eval_expr(e.right, s))
        else:
            value = eval_expr(e, s)
        out = dict(s)
        out[stm.target] = value
        return out
    if isinstance(stm, Skip):
        return dict(s)
    raise TypeError(f"not a statement: {stm!r}")


# ---------------------------------------------------------------------------
# bounded exploration


@dataclass(frozen=True)
class ExecBounds:
    max_steps: int = 10_000
    input_range: tuple[int, int] = (0, 255)
    width: int | None = None
    # cap on explored paths, guarding against input() inside loops
    max_paths: int = 1_000_000

    def __post_init__(self):
        lo, hi = self.input_range
        if lo > hi:
            raise ValueError("empty input range")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")


class Outcome(enum.Enum):
    EXIT = "exit"
    ERROR = "error"
    BUDGET = "budget"
    FAULT = "fault"
    BLOCKED = "blocked"


@dataclass
class Run:
    outcome: Outcome
    location: int
    state: State
    inputs: tuple[int, ...]
    path: tuple[Edge, ...]
    fault: Fault | None = None

    def trace(self) -> str:
        lines = [f"inputs: {list(self.inputs)}"]
        lines += [f"  {e}" for e in self.path]
        lines.append(f"{self.outcome.value} at {self.location} with {self.state}")
        if self.fault:
            lines.append(f"fault: {self.fault}")
        return "\n".join(lines)


def _unwind(link) -> tuple:
    out = []
    while link is not None:
        item, link = link
        out.append(item)
    return tuple(reversed(out))


def explore(cfa: CFA, bounds: ExecBounds = ExecBounds(), adder: Adder | None = None,
            initial: Mapping[str, int] | None = None) -> Iterator[Run]:
    """Depth-first enumeration of every run under ``bounds``; each input()
    branches over the whole input range."""
    if adder is not None and bounds.width is not None and bounds.width != adder.width:
        raise ValueError(f"adder width {adder.width} differs from machine width {bounds.width}")
    s0 = {v: 0 for v in cfa.variables}
    if initial:
        s0.update(initial)
    lo, hi = bounds.input_range
    # (location, state, steps, input link, path link); links are cons cells
    stack = [(cfa.initial, s0, 0, None, None)]
    paths = 0
    while stack:
        loc, s, steps, ins, path = stack.pop()
        if loc in cfa.errors:
            yield Run(Outcome.ERROR, loc, s, _unwind(ins), _unwind(path))
            paths += 1
            continue
        out = cfa.out_edges(loc)
        if not out:
            yield Run(Outcome.EXIT, loc, s, _unwind(ins), _unwind(path))
            paths += 1
            continue
        if steps >= bounds.max_steps:
            yield Run(Outcome.BUDGET, loc, s, _unwind(ins), _unwind(path))
            paths += 1
            continue
        succ = []
        try:
            for e in out:
                if isinstance(e.stm, Assign) and isinstance(e.stm.expr, Input):
                    for value in range(hi, lo - 1, -1):
                        t = dict(s)
                        t[e.stm.target] = value
                        succ.append((e.dst, t, steps + 1, (value, ins), (e, path)))
                    continue
                t = step(e.stm, s, adder)
                if t is not None:
                    succ.append((e.dst, t, steps + 1, ins, (e, path)))
        except Fault as f:
            yield Run(Outcome.FAULT, loc, s, _unwind(ins), _unwind(path), f)
            paths += 1
            continue
        if not succ:
            yield Run(Outcome.BLOCKED, loc, s, _unwind(ins), _unwind(path))
            paths += 1
            continue
        if len(succ) > 1 and paths + len(stack) > bounds.max_paths:
            yield Run(Outcome.BUDGET, loc, s, _unwind(ins), _unwind(path))
            paths += 1
            continue
        stack.extend(reversed(succ))


class ExecVerdict(enum.Enum):
    NO_ERROR_FOUND = "NoErrorFound"
    ERROR_REACHED = "ErrorReached"
    BUDGET_EXHAUSTED = "BudgetExhausted"


@dataclass
class ExecResult:
    verdict: ExecVerdict
    witness: Run | None = None
    runs: int = 0
    faults: list[Run] = field(default_factory=list)


def reach_error_bounded(cfa: CFA, bounds: ExecBounds = ExecBounds(), adder: Adder | None = None,
                        initial: Mapping[str, int] | None = None) -> ExecResult:
    """Search all bounded runs for an error location.

    Faulting runs end without an error and are collected in ``faults``; a
    run that hits the step budget makes the verdict BudgetExhausted unless
    some other run reaches an error.
    """
    result = ExecResult(ExecVerdict.NO_ERROR_FOUND)
    exhausted = False
    for run in explore(cfa, bounds, adder, initial):
        result.runs += 1
        if run.outcome is Outcome.ERROR:
            result.verdict = ExecVerdict.ERROR_REACHED
            result.witness = run
            return result
        if run.outcome is Outcome.BUDGET:
            exhausted = True
        elif run.outcome is Outcome.FAULT:
            result.faults.append(run)
    if exhausted:
        result.verdict = ExecVerdict.BUDGET_EXHAUSTED
    return result


def final_states(cfa: CFA, bounds: ExecBounds = ExecBounds(), adder: Adder | None = None,
                 initial: Mapping[str, int] | None = None) -> list[Run]:
    """Runs that leave the automaton normally or through an error location."""
    return [r for r in explore(cfa, bounds, adder, initial) if r.outcome in (Outcome.EXIT, Outcome.ERROR)]
