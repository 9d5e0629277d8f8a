"""Command line interface.

Exit codes: 0 success, 1 validation errors, 2 usage error, 3 I/O error.
Errors are also written to stderr as one JSON object per line.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .analytics import census, census_from_profiles_consistent, chord_type_distribution, file_profiles, pitch_histogram
from .corpus import CorpusInvalid, CorpusIOError, CorpusError, NoFilesFound, fingerprint, ingest, load_corpus
from .harte import HarteSyntaxError, chord_warnings, describe, parse_harte
from .humdrum import HumdrumError, parse_document
from .report import ReportEnvelope, UnsupportedFormat, build_timestamp, emit
from .validation import ValidationProfile, has_errors, validate

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
ENV_CORPUS = "SWTC_CORPUS"


def _error(kind: str, message: str, **extra) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message, **extra}, sort_keys=True) + "\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--skip-invalid", action="store_true", help="exclude files with validation errors instead of failing")
    p.add_argument("--sectional-token", metavar="T", help="cadence-spine token that marks a sectional ending")
    p.add_argument("--metadata", metavar="CSV", help="metadata table with a file_id column")
    p.add_argument("--strict", action="store_true", help="warn about missing '*-' terminators")
    p.add_argument("--jobs", type=int, default=1, help="parser worker processes (output does not depend on it)")
    return p


def _output_flags(p: argparse.ArgumentParser, svg: bool) -> None:
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv")
    p.add_argument("-o", "--output", metavar="FILE", help="write the JSON/CSV report here instead of stdout")
    if svg:
        p.add_argument("--svg", metavar="FILE", help="also write a bar chart")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="swtc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check files against the corpus profile")
    p.add_argument("path", help="a humdrum file or a corpus directory")
    p.add_argument("--json", dest="fmt", action="store_const", const="json")

    for name, svg, helptext in (
        ("census", False, "corpus census (note, rest and measure totals, extremes, key tally)"),
        ("pitch-hist", True, "pitch distribution"),
        ("chord-dist", True, "chord-type distribution"),
        ("profiles", True, "per-file note counts and durations"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("dir", nargs="?", help=f"corpus directory (default: ${ENV_CORPUS})")
        _output_flags(p, svg)
        if name == "chord-dist":
            p.add_argument("--top", type=float, default=1.0, help="keep the most frequent types covering this share")

    h = sub.add_parser("harte", help="Harte chord symbol tools")
    hsub = h.add_subparsers(dest="harte_command", required=True)
    hp = hsub.add_parser("parse", help="show the parse, expansion and pitch classes of a symbol")
    hp.add_argument("symbol")
    return parser


def _profile(args) -> ValidationProfile:
    return ValidationProfile(sectional_token=args.sectional_token, require_terminator=args.strict)


def _corpus_dir(args) -> str:
    path = args.dir or os.environ.get(ENV_CORPUS)
    if not path:
        raise _Usage(f"no corpus directory given and ${ENV_CORPUS} is unset")
    return path


class _Usage(Exception):
    pass


def _write(report: ReportEnvelope, args, default_fmt: str = "json") -> None:
    svg = getattr(args, "svg", None)
    fmt = args.fmt or (None if svg else default_fmt)
    if svg:
        emit(report, "svg", svg)
    if fmt:
        emit(report, fmt, args.output if args.output else sys.stdout)


def _cmd_validate(args) -> int:
    profile = _profile(args)
    path = Path(args.path)
    diagnostics = []
    if path.is_dir():
        manifest = ingest(path, args.metadata)
        try:
            loaded = load_corpus(manifest, profile, skip_invalid=True, jobs=args.jobs)
        except CorpusIOError as exc:
            for d in exc.diagnostics:
                _error("io", d.message, source=d.source)
            return EXIT_IO
        diagnostics = loaded.diagnostics
        fp = fingerprint(manifest)
    else:
        try:
            text = path.read_bytes().decode("utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            _error("io", str(exc), source=str(path))
            return EXIT_IO
        try:
            doc = parse_document(text, path.stem)
        except HumdrumError as exc:
            _error("structure", str(exc), source=path.stem, line=exc.line)
            return EXIT_INVALID
        diagnostics = validate(doc, profile)
        fp = None
    if args.fmt == "json":
        emit(
            ReportEnvelope("validation", [d.as_dict() for d in diagnostics], fp, generated_at=build_timestamp()),
            "json",
            sys.stdout,
        )
    else:
        for d in diagnostics:
            print(d)
    return EXIT_INVALID if has_errors(diagnostics) else EXIT_OK


def _load(args):
    manifest = ingest(_corpus_dir(args), args.metadata)
    loaded = load_corpus(manifest, _profile(args), skip_invalid=args.skip_invalid, jobs=args.jobs)
    for name in loaded.excluded:
        _error("excluded", f"{name} excluded after validation errors", source=name)
    return manifest, loaded


def _cmd_corpus(args) -> int:
    manifest, loaded = _load(args)
    fp = fingerprint(manifest)
    stamp = build_timestamp()
    docs = loaded.documents
    if args.command == "census":
        c = census(docs, loaded.excluded)
        profiles = file_profiles(docs)
        if not census_from_profiles_consistent(c, profiles):
            raise AssertionError("census totals disagree with per-file profiles")
        report = ReportEnvelope("census", c.as_dict(), fp, generated_at=stamp)
    elif args.command == "pitch-hist":
        report = ReportEnvelope("pitch-histogram", pitch_histogram(docs).as_dict(), fp, generated_at=stamp)
    elif args.command == "chord-dist":
        hist = chord_type_distribution(docs, args.top)
        report = ReportEnvelope("chord-distribution", hist.as_dict(), fp, generated_at=stamp)
    else:
        profiles = file_profiles(docs, manifest.rows())
        report = ReportEnvelope("profiles", [p.as_dict() for p in profiles], fp, generated_at=stamp)
    _write(report, args)
    return EXIT_OK


def _cmd_harte(args) -> int:
    try:
        chord = parse_harte(args.symbol)
    except HarteSyntaxError as exc:
        _error(type(exc).__name__, str(exc), offset=exc.offset, symbol=exc.symbol)
        return EXIT_INVALID
    out = describe(chord)
    out["warnings"] = [{"rule": r, "message": m} for r, m in chord_warnings(chord)]
    emit(ReportEnvelope("harte", out), "json", sys.stdout)
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if getattr(args, "top", 1.0) is not None and not 0 < getattr(args, "top", 1.0) <= 1:
        _error("usage", "--top must be in (0, 1]")
        return EXIT_USAGE
    if getattr(args, "jobs", 1) < 1:
        _error("usage", "--jobs must be at least 1")
        return EXIT_USAGE
    try:
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "harte":
            return _cmd_harte(args)
        return _cmd_corpus(args)
    except _Usage as exc:
        _error("usage", str(exc))
        return EXIT_USAGE
    except CorpusInvalid as exc:
        for d in exc.diagnostics:
            if d.severity == "error":
                _error("validation", d.message, **{k: v for k, v in d.as_dict().items() if k != "message"})
        return EXIT_INVALID
    except (NoFilesFound, CorpusIOError, OSError) as exc:
        _error("io", str(exc))
        return EXIT_IO
    except (CorpusError, UnsupportedFormat) as exc:
        _error("usage", str(exc))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
