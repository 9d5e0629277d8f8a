"""Humdrum text to a rectangular document model.

Only fixed-width files are supported: every spine runs from its exclusive
interpretation to the terminator row, and split/merge/add/exchange
manipulators are rejected.  Tokens keep their (line, column) position so
diagnostics can point back into the source.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

REFERENCE = "reference"
GLOBAL_COMMENT = "global-comment"
LOCAL_COMMENT = "local-comment"
EXCLUSIVE = "exclusive-interpretation"
TANDEM = "tandem-interpretation"
BARLINE = "barline"
DATA = "data"

SPINE_RECORD_KINDS = (LOCAL_COMMENT, EXCLUSIVE, TANDEM, BARLINE, DATA)
NULL_TOKEN = "."
TERMINATOR = "*-"
MANIPULATORS = {"*^", "*v", "*+", "*x"}
HUMDRUM_SUFFIXES = (".krn", ".krm")

_SEPARATOR = re.compile(r"\t+")


class HumdrumError(Exception):
    """Structural failure while reading humdrum text."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class EmptyInput(HumdrumError):
    pass


class MissingExclusiveInterpretation(HumdrumError):
    pass


class DuplicateExclusiveRow(HumdrumError):
    pass


class ColumnCountMismatch(HumdrumError):
    def __init__(self, line: int, expected: int, found: int):
        self.expected = expected
        self.found = found
        super().__init__(f"expected {expected} tokens, found {found}", line)


class MixedRecordKind(HumdrumError):
    pass


class UnsupportedSpineOperation(HumdrumError):
    pass


class TrailingContent(HumdrumError):
    pass


class UnknownSpine(KeyError):
    pass


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    rule: str
    message: str
    line: int | None = None
    column: int | None = None  # 1-based spine index
    excerpt: str | None = None
    source: str | None = None

    def as_dict(self) -> dict:
        return {
            "severity": self.severity,
            "rule": self.rule,
            "message": self.message,
            "line": self.line,
            "column": self.column,
            "excerpt": self.excerpt,
            "source": self.source,
        }

    def __str__(self) -> str:
        loc = ":".join(str(x) for x in (self.source, self.line, self.column) if x is not None)
        return f"{loc}: {self.severity}: [{self.rule}] {self.message}"


@dataclass(frozen=True)
class Record:
    kind: str
    tokens: tuple[str, ...]
    line: int


@dataclass(frozen=True)
class SpineColumn:
    index: int
    exclusive_name: str
    # (record index, token) for every spine-bearing record, exclusive row included
    tokens: tuple[tuple[int, str], ...]
    tandem_interpretations: tuple[tuple[int, str], ...]


@dataclass(frozen=True)
class HumdrumDocument:
    source_name: str
    reference_records: tuple[tuple[str, str], ...]
    spines: tuple[SpineColumn, ...]
    records: tuple[Record, ...]
    warnings: tuple[Diagnostic, ...] = field(default=(), compare=False)

    @property
    def spine_names(self) -> list[str]:
        return [s.exclusive_name for s in self.spines]

    def has_spine(self, name: str) -> bool:
        return any(s.exclusive_name == name for s in self.spines)

    def spines_named(self, name: str) -> list[SpineColumn]:
        found = [s for s in self.spines if s.exclusive_name == name]
        if not found:
            raise UnknownSpine(name)
        return found

    def data_records(self) -> Iterator[tuple[int, Record]]:
        for i, rec in enumerate(self.records):
            if rec.kind == DATA:
                yield i, rec


def _classify(tokens: list[str], line: int) -> str:
    first = tokens[0]
    if first.startswith("**"):
        kind = EXCLUSIVE
        prefix = "**"
    elif first.startswith("*"):
        kind, prefix = TANDEM, "*"
    elif first.startswith("!"):
        kind, prefix = LOCAL_COMMENT, "!"
    elif first.startswith("="):
        kind, prefix = BARLINE, "="
    else:
        kind, prefix = DATA, ""
    if kind == DATA:
        bad = [t for t in tokens if t[:1] in ("*", "!", "=")]
    else:
        bad = [t for t in tokens if not t.startswith(prefix)]
    if bad:
        raise MixedRecordKind(f"{kind} record contains {bad[0]!r}", line)
    return kind


def _parse_reference(line_text: str) -> tuple[str, str, bool]:
    body = line_text[3:]
    key, sep, value = body.partition(":")
    return key.strip().upper(), value.strip(), bool(sep) and bool(key.strip())


def parse_document(text: str, name: str = "<string>") -> HumdrumDocument:
    """Parse humdrum text into a :class:`HumdrumDocument`.

    Columns are separated by one or more tabs.  Unknown tandem
    interpretations are kept as-is.  Structural problems raise a
    :class:`HumdrumError` subclass carrying the offending line number;
    recoverable oddities are attached to ``doc.warnings``.
    """
    if text.startswith("\ufeff"):
        text = text[1:]
    if not text.strip():
        raise EmptyInput("input is empty")

    records: list[Record] = []
    references: list[tuple[str, str]] = []
    warnings: list[Diagnostic] = []
    width: int | None = None
    terminated = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            if width is not None and not terminated:
                warnings.append(
                    Diagnostic("warning", "structure.blank-line", "blank line inside spine data", lineno, source=name)
                )
            continue
        if line.startswith("!!"):
            if line.startswith("!!!"):
                key, value, ok = _parse_reference(line)
                if ok:
                    references.append((key, value))
                else:
                    warnings.append(
                        Diagnostic(
                            "warning", "reference.malformed", "reference record lacks 'KEY: value' form",
                            lineno, excerpt=line, source=name,
                        )
                    )
                records.append(Record(REFERENCE, (line,), lineno))
            else:
                records.append(Record(GLOBAL_COMMENT, (line,), lineno))
            continue

        if terminated:
            raise TrailingContent("spine content after terminator row", lineno)

        tokens = _SEPARATOR.split(line.strip("\t"))
        if width is None:
            if not all(t.startswith("**") and len(t) > 2 for t in tokens):
                raise MissingExclusiveInterpretation(
                    f"first spine record must be exclusive interpretations, got {tokens[0]!r}", lineno
                )
            width = len(tokens)
            records.append(Record(EXCLUSIVE, tuple(tokens), lineno))
            continue

        if len(tokens) != width:
            raise ColumnCountMismatch(lineno, width, len(tokens))
        kind = _classify(tokens, lineno)
        if kind == EXCLUSIVE:
            raise DuplicateExclusiveRow("second exclusive interpretation row", lineno)
        if kind == TANDEM:
            manip = [t for t in tokens if t in MANIPULATORS]
            if manip:
                raise UnsupportedSpineOperation(f"spine manipulator {manip[0]!r} is not supported", lineno)
            n_term = sum(t == TERMINATOR for t in tokens)
            if n_term == width:
                terminated = True
            elif n_term:
                raise UnsupportedSpineOperation("partial spine termination", lineno)
        records.append(Record(kind, tuple(tokens), lineno))

    if width is None:
        raise MissingExclusiveInterpretation("no exclusive interpretation row")
    if not terminated:
        last = records[-1].line if records else None
        warnings.append(Diagnostic("warning", "structure.missing-terminator", "no '*-' terminator row", last, source=name))

    spines = []
    for col in range(width):
        toks, tandems = [], []
        for i, rec in enumerate(records):
            if rec.kind not in SPINE_RECORD_KINDS:
                continue
            tok = rec.tokens[col]
            toks.append((i, tok))
            if rec.kind == TANDEM and tok not in ("*", TERMINATOR):
                tandems.append((i, tok))
        exclusive = next(t for _, t in toks)[2:]
        spines.append(SpineColumn(col, exclusive, tuple(toks), tuple(tandems)))

    return HumdrumDocument(name, tuple(references), tuple(spines), tuple(records), tuple(warnings))


def read_document(path) -> HumdrumDocument:
    p = Path(path)
    return parse_document(p.read_bytes().decode("utf-8"), p.stem)


def reference_metadata(doc: HumdrumDocument) -> dict[str, str]:
    """Reference records in file order; a repeated key keeps its first value."""
    out: dict[str, str] = {}
    for key, value in doc.reference_records:
        out.setdefault(key, value)
    return out


def events_of(doc: HumdrumDocument, spine: str) -> list[tuple[int, str]]:
    """Non-null data tokens of every spine named ``spine``, in record order."""
    columns = doc.spines_named(spine)
    out = []
    for i, rec in doc.data_records():
        for col in columns:
            tok = rec.tokens[col.index]
            if tok != NULL_TOKEN:
                out.append((i, tok))
    return out


def barlines_of(doc: HumdrumDocument) -> list[tuple[int, str]]:
    return [(i, rec.tokens[0]) for i, rec in enumerate(doc.records) if rec.kind == BARLINE]


def serialize(doc: HumdrumDocument) -> str:
    """Canonical text: one record per line, spine tokens joined by single tabs."""
    return "".join("\t".join(rec.tokens) + "\n" for rec in doc.records)


def token_location(doc: HumdrumDocument, record_index: int, column: int) -> tuple[int, int, str]:
    rec = doc.records[record_index]
    return rec.line, column + 1, rec.tokens[column]
