"""End-to-end glue: program text plus predicate and ranking sidecars to an
abstract transition system, its verdict and its mapped tolerance constraints."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .abstraction import ATS, build_ats, is_error_free
from .frontend import CFA, count_op, instrument_termination, normalize_3ac, parse_program, parse_ranking
from .logic import Atom, parse_predicates
from .tolerance import MappedConstraint, ToleranceConstraint, extract, map_to_signature


@dataclass
class Analysis:
    name: str
    cfa: CFA
    preds: list[Atom]
    ats: ATS
    safe: bool
    op: str = "+"
    constraints: list[ToleranceConstraint] = field(default_factory=list)
    mapped: list[MappedConstraint] = field(default_factory=list)

    @property
    def op_count(self) -> int:
        return count_op(self.cfa, self.op)

    @property
    def statement_count(self) -> int:
        return len(self.cfa.edges)


def prepare_cfa(program: str, ranking: str | None = None, op: str = "+") -> CFA:
    """Parse, instrument the ranking checks (if any) and normalize to 3AC."""
    cfa = parse_program(program)
    if ranking:
        cfa = instrument_termination(cfa, parse_ranking(ranking))
    return normalize_3ac(cfa, (op,))


def analyze(program: str, predicates: str, ranking: str | None = None, op: str = "+",
            name: str = "") -> Analysis:
    cfa = prepare_cfa(program, ranking, op)
    preds = parse_predicates(predicates)
    ats = build_ats(cfa, preds)
    result = Analysis(name, cfa, preds, ats, is_error_free(ats), op)
    if result.safe:
        result.constraints = extract(ats, op)
        result.mapped = [map_to_signature(tc) for tc in result.constraints]
    return result


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    program: Path
    predicates: Path | None
    ranking: Path | None

    def read(self) -> tuple[str, str, str | None]:
        preds = self.predicates.read_text() if self.predicates else ""
        rank = self.ranking.read_text() if self.ranking else None
        return self.program.read_text(), preds, rank

    def analyze(self, op: str = "+") -> Analysis:
        program, preds, rank = self.read()
        return analyze(program, preds, rank, op, self.name)


def corpus_dir() -> Path:
    return Path(str(resources.files("actol") / "corpus"))


def discover(directory: str | Path | None = None) -> list[CorpusEntry]:
    """Programs ``*.acp`` with optional ``.preds`` / ``.rank`` sidecars, by name."""
    root = Path(directory) if directory is not None else corpus_dir()
    out = []
    for prog in sorted(root.glob("*.acp")):
        preds = prog.with_suffix(".preds")
        rank = prog.with_suffix(".rank")
        out.append(CorpusEntry(prog.stem, prog, preds if preds.exists() else None,
                               rank if rank.exists() else None))
    return out


def corpus_entry(name: str) -> CorpusEntry:
    for entry in discover():
        if entry.name == name:
            return entry
    raise KeyError(f"no corpus program named {name!r}")
