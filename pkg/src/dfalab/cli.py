"""Command-line harness.

Subcommands:

* ``report``   - analyze program files and emit one bounds record per
                 (program, analysis) pair.
* ``generate`` - write a deterministic corpus of random programs.
* ``corpus``   - analyze a directory of programs, emit the aggregate
                 report plus deviation histograms for both bounds.

Exit codes: 0 all bounds hold, 1 usage or parse/validation error,
2 at least one bound violated (a delta or solver bug, distinct from
bad input so CI can tell them apart).
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
from collections import Counter
from pathlib import Path

from .analyses import ANALYSIS_KINDS
from .bounds import BoundsRecord, ProgramPipeline, emit_report
from .generator import GeneratorConfig, generate_corpus
from .ir import InvalidProgramError, ParseError, parse_program, serialize_program, validate_program

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BOUND_VIOLATION = 2


def _parse_vars(raw: str) -> int | tuple[int, int]:
    if "-" in raw.strip("-"):
        lo, hi = raw.split("-", 1)
        return (int(lo), int(hi))
    return int(raw)


def _load_programs(paths: list[Path], errors: list[str]):
    programs = []
    for path in paths:
        try:
            program = parse_program(path.read_text(encoding="utf-8"))
        except (OSError, ParseError) as exc:
            errors.append(f"{path}: {exc}")
            continue
        diags = validate_program(program)
        if diags:
            errors.extend(f"{path}: {d}" for d in diags)
            continue
        programs.append(program)
    return programs


def _records_for(programs, kinds: list[str], errors: list[str]) -> list[BoundsRecord]:
    records: list[BoundsRecord] = []
    for program in programs:
        try:
            pipeline = ProgramPipeline(program)
            for kind in kinds:
                records.append(pipeline.record(kind))
        except (InvalidProgramError, RuntimeError) as exc:
            errors.append(f"{program.name}: {exc}")
    return records


def _write_bytes(data: bytes, out: str | None) -> None:
    if out is None:
        sys.stdout.write(data.decode("utf-8"))
    else:
        Path(out).write_bytes(data)


def cmd_report(paths: list[str], kinds: list[str], fmt: str,
               out: str | None = None) -> int:
    errors: list[str] = []
    programs = _load_programs([Path(p) for p in paths], errors)
    records = _records_for(programs, kinds, errors)
    _write_bytes(emit_report(records, fmt), out)
    for line in errors:
        print(line, file=sys.stderr)
    if errors:
        return EXIT_USAGE
    if any(r.bound_violated for r in records):
        return EXIT_BOUND_VIOLATION
    return EXIT_OK


def cmd_generate(config: GeneratorConfig, count: int, out_dir: str) -> int:
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    for i, program in enumerate(generate_corpus(config, count)):
        (directory / f"{program.name}.prog").write_text(
            serialize_program(program), encoding="utf-8")
    return EXIT_OK


def _histogram_text(values: list[int]) -> str:
    counts = Counter(values)
    return "".join(f"{dev} {counts[dev]}\n" for dev in sorted(counts))


def cmd_corpus(directory: str, kinds: list[str], fmt: str,
               out: str | None = None) -> int:
    base = Path(directory)
    paths = sorted(base.glob("*.prog"))
    if not paths:
        print(f"{directory}: no .prog files found", file=sys.stderr)
        return EXIT_USAGE
    errors: list[str] = []
    programs = _load_programs(paths, errors)
    records = _records_for(programs, kinds, errors)
    if not records:
        for line in errors:
            print(line, file=sys.stderr)
        return EXIT_USAGE

    report = emit_report(records, fmt)
    dev1 = [r.dev1 for r in records]
    dev2 = [r.dev2 for r in records]
    summary = {
        "programs": len(programs),
        "records": len(records),
        "violations": sum(1 for r in records if r.bound_violated),
        "acyclic_records": sum(1 for r in records if r.acyclic),
        "median_dev1": statistics.median(dev1),
        "median_dev2": statistics.median(dev2),
    }

    if out is None:
        sys.stdout.write(report.decode("utf-8"))
        sys.stdout.write("# dev1 histogram (deviation count)\n")
        sys.stdout.write(_histogram_text(dev1))
        sys.stdout.write("# dev2 histogram (deviation count)\n")
        sys.stdout.write(_histogram_text(dev2))
        sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    else:
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        ext = "csv" if fmt == "csv" else "json"
        (out_dir / f"report.{ext}").write_bytes(report)
        (out_dir / "dev1_histogram.txt").write_text(_histogram_text(dev1),
                                                    encoding="utf-8")
        (out_dir / "dev2_histogram.txt").write_text(_histogram_text(dev2),
                                                    encoding="utf-8")
        (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n",
                                              encoding="utf-8")

    for line in errors:
        print(line, file=sys.stderr)
    if errors:
        return EXIT_USAGE
    if summary["violations"]:
        return EXIT_BOUND_VIOLATION
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dfalab",
        description="Round-robin data-flow analysis with iteration-bound checking.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_analysis_flags(p):
        p.add_argument("--analysis", action="append", choices=ANALYSIS_KINDS,
                       help="analysis kind; repeatable (default: cp, faint)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", help="output file (report) or directory (corpus)")

    p_report = sub.add_parser("report", help="analyze program files")
    p_report.add_argument("files", nargs="+")
    add_analysis_flags(p_report)

    p_gen = sub.add_parser("generate", help="generate random programs")
    p_gen.add_argument("--seed", type=int, default=42)
    p_gen.add_argument("--count", type=int, default=100)
    p_gen.add_argument("--nodes", type=int, default=60, help="node budget per program")
    p_gen.add_argument("--vars", default="4-8",
                       help="variable count, fixed ('6') or range ('4-8')")
    p_gen.add_argument("--loops", type=int, default=2, help="maximum loop nesting")
    p_gen.add_argument("--irreducible", type=float, default=0.0,
                       help="probability of extra arbitrary edges per node")
    p_gen.add_argument("--out", required=True, help="output directory")

    p_corpus = sub.add_parser("corpus", help="batch-verify bounds over a directory")
    p_corpus.add_argument("directory")
    add_analysis_flags(p_corpus)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK

    kinds = args.analysis if getattr(args, "analysis", None) else ["cp", "faint"]
    if args.command == "report":
        return cmd_report(args.files, kinds, args.format, args.out)
    if args.command == "generate":
        config = GeneratorConfig(
            seed=args.seed, node_budget=args.nodes,
            variable_count=_parse_vars(args.vars), loop_depth=args.loops,
            irreducible_edge_probability=args.irreducible)
        return cmd_generate(config, args.count, args.out)
    if args.command == "corpus":
        return cmd_corpus(args.directory, kinds, args.format, args.out)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
