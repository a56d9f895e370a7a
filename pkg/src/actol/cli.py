"""Command-line interface: ``actol verify|extract|instrument|check|report|adder-eval``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .abstraction import to_dot
from .adders import FAMILIES, AdderModel, dump_models, get_preset, presets
from .checkers import Status, bitblast, check_constraint, emit_checker_hdl
from .frontend import InstrumentationError, UnsupportedControlFlow, format_cfa
from .pipeline import analyze, discover, prepare_cfa
from .sat import export_dimacs
from .syntax import ParseError
from .tolerance import parse as parse_constraint
from .tolerance import serialize

EXIT_OK, EXIT_FAIL, EXIT_UNKNOWN, EXIT_USAGE, EXIT_PARSE = 0, 1, 2, 64, 65

log = logging.getLogger("actol")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str | None, what: str) -> str | None:
    if path is None:
        return None
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} file not found: {path}")
    return p.read_text()


def _width(args) -> int:
    if not 4 <= args.width <= 32:
        raise UsageError("--width must lie in [4, 32]")
    return args.width


def _adders(args) -> list[AdderModel]:
    width = _width(args)
    if not args.adder:
        return presets(width)
    models = []
    for spec in args.adder:
        for name in filter(None, spec.split(",")):
            try:
                models.append(get_preset(name, width))
            except (KeyError, ValueError) as exc:
                raise UsageError(exc.args[0] if exc.args else str(exc)) from None
    return models


def _analysis(args):
    program = _read(args.program, "program")
    preds = _read(args.predicates, "predicate") if args.predicates else ""
    ranking = _read(args.ranking, "ranking")
    return analyze(program, preds, ranking, args.op, Path(args.program).stem)


def cmd_verify(args) -> int:
    a = _analysis(args)
    if args.dot:
        Path(args.dot).write_text(to_dot(a.ats))
    if a.safe:
        print("SAFE")
        return EXIT_OK
    print("UNSAFE-ABSTRACT (an error location is abstractly reachable; the predicates may be too weak)")
    return EXIT_FAIL


def cmd_extract(args) -> int:
    a = _analysis(args)
    if args.dot:
        Path(args.dot).write_text(to_dot(a.ats))
    if not a.safe:
        print("UNSAFE-ABSTRACT: refusing to extract constraints", file=sys.stderr)
        return EXIT_FAIL
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k, mc in enumerate(a.mapped, 1):
        serialize(mc, out / f"{a.name}_{k}.tc.smt2")
    if not a.mapped:
        log.warning("no statements use %r", args.op)
    print(f"{len(a.mapped)} constraint(s) written to {out}")
    return EXIT_OK


def cmd_instrument(args) -> int:
    program = _read(args.program, "program")
    ranking = _read(args.ranking, "ranking")
    text = format_cfa(prepare_cfa(program, ranking, args.op))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_check(args) -> int:
    models = _adders(args)
    width = _width(args)
    constraints = []
    for f in args.constraints:
        if not Path(f).is_file():
            raise UsageError(f"constraint file not found: {f}")
        constraints.append((f, parse_constraint(f)))
    worst = EXIT_OK
    for f, mc in constraints:
        for m in models:
            v = check_constraint(m, mc, args.engine, width)
            if args.json:
                print(json.dumps({"constraint": f, "adder": m.label, **v.to_json()}))
            else:
                detail = ""
                if v.violated:
                    detail = f"  witness {v.witness} -> z = {v.z}"
                elif v.status is Status.UNKNOWN:
                    detail = f"  ({v.reason})"
                print(f"{f}  {m.label:<14} {v.status.value}{detail}")
            if v.violated:
                worst = EXIT_FAIL
            elif v.status is Status.UNKNOWN and worst == EXIT_OK:
                worst = EXIT_UNKNOWN
            stem = Path(f).name.removesuffix(".smt2").removesuffix(".tc")
            if args.emit_verilog:
                d = Path(args.emit_verilog)
                d.mkdir(parents=True, exist_ok=True)
                emit_checker_hdl(m, mc, width, d / f"{stem}_{m.label}.v")
            if args.emit_dimacs:
                d = Path(args.emit_dimacs)
                d.mkdir(parents=True, exist_ok=True)
                export_dimacs(bitblast(m, mc, width), d / f"{stem}_{m.label}.cnf")
    return worst


def report_rows(directory, models: list[AdderModel], engine: str = "auto", op: str = "+"):
    """One row per corpus program: (name, #op, #stm, #tc, cells) or (name, None)."""
    rows = []
    for entry in discover(directory):
        try:
            a = entry.analyze(op)
        except (ParseError, UnsupportedControlFlow, InstrumentationError) as exc:
            log.warning("%s: %s", entry.name, exc)
            rows.append((entry.name, None))
            continue
        if not a.safe:
            rows.append((entry.name, None))
            continue
        cells = []
        for m in models:
            statuses = [check_constraint(m, mc, engine).status for mc in a.mapped]
            if Status.VIOLATED in statuses:
                cells.append("×")
            elif Status.UNKNOWN in statuses:
                cells.append("?")
            else:
                cells.append("✓")
        rows.append((entry.name, (a.op_count, a.statement_count, len(a.mapped), cells)))
    return rows


def render_table(rows, models: list[AdderModel]) -> str:
    header = ["program", "#+", "#stm", "#tc"] + [m.label for m in models]
    body = []
    for name, data in rows:
        if data is None:
            body.append([name] + ["-"] * (len(header) - 1))
        else:
            ops, stms, tcs, cells = data
            body.append([name, str(ops), str(stms), str(tcs)] + cells)
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    fmt = lambda r: "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
    lines = [fmt(header), fmt(["-" * w for w in widths])] + [fmt(r) for r in body]
    return "\n".join(lines) + "\n"


def cmd_report(args) -> int:
    models = _adders(args)
    directory = args.corpus
    if directory is not None and not Path(directory).is_dir():
        raise UsageError(f"corpus directory not found: {directory}")
    rows = report_rows(directory, models, args.engine, args.op)
    sys.stdout.write(render_table(rows, models))
    return EXIT_FAIL if any(data is None for _, data in rows) else EXIT_OK


def cmd_adder_eval(args) -> int:
    if args.list:
        sys.stdout.write(dump_models(presets(_width(args))))
        return EXIT_OK
    if args.name is None or args.x is None or args.y is None:
        raise UsageError("adder-eval needs NAME X Y (or --list)")
    try:
        m = get_preset(args.name, args.width if args.name in FAMILIES else None)
    except (KeyError, ValueError) as exc:
        raise UsageError(exc.args[0] if exc.args else str(exc)) from None
    try:
        z = m.evaluate(args.x, args.y)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"{m.label}: {args.x} + {args.y} = {z}" + ("" if z == args.x + args.y else f" (exact {args.x + args.y})"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="actol", description="Verify programs by predicate abstraction, extract "
                "tolerance constraints and check approximate adders against them.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def program_args(sp):
        sp.add_argument("program")
        sp.add_argument("--predicates", "-p")
        sp.add_argument("--ranking", "-r")
        sp.add_argument("--op", default="+", choices=["+", "-", "*", "/"])

    def adder_args(sp):
        sp.add_argument("--adder", "-a", action="append", help="preset name(s), comma separated; default all")
        sp.add_argument("--width", "-w", type=int, default=16)
        sp.add_argument("--engine", choices=["auto", "exhaustive", "sat"], default="auto")

    sp = sub.add_parser("verify", help="check that no error location is abstractly reachable")
    program_args(sp)
    sp.add_argument("--dot", help="write the abstract transition system as DOT")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("extract", help="write one .tc.smt2 file per operator statement")
    program_args(sp)
    sp.add_argument("--out", "-o", default=".")
    sp.add_argument("--dot")
    sp.set_defaults(func=cmd_extract)

    sp = sub.add_parser("instrument", help="print the instrumented, normalized CFA")
    sp.add_argument("program")
    sp.add_argument("--ranking", "-r")
    sp.add_argument("--op", default="+", choices=["+", "-", "*", "/"])
    sp.add_argument("--out", "-o")
    sp.set_defaults(func=cmd_instrument)

    sp = sub.add_parser("check", help="check adder presets against constraint files")
    sp.add_argument("constraints", nargs="+")
    adder_args(sp)
    sp.add_argument("--emit-verilog", metavar="DIR")
    sp.add_argument("--emit-dimacs", metavar="DIR")
    sp.add_argument("--json", action="store_true", help="one JSON object per verdict")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("report", help="verify, extract and check a whole corpus")
    sp.add_argument("corpus", nargs="?", help="directory of .acp programs; default: shipped corpus")
    adder_args(sp)
    sp.add_argument("--op", default="+", choices=["+", "-", "*", "/"])
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("adder-eval", help="evaluate a preset on two operands, or list presets")
    sp.add_argument("name", nargs="?")
    sp.add_argument("x", nargs="?", type=int)
    sp.add_argument("y", nargs="?", type=int)
    sp.add_argument("--width", "-w", type=int, default=16)
    sp.add_argument("--list", action="store_true")
    sp.set_defaults(func=cmd_adder_eval)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"actol: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, UnsupportedControlFlow, InstrumentationError) as exc:
        print(f"actol: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
