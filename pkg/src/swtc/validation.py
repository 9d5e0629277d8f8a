"""Profile checks for thematic-corpus humdrum files.

``validate`` never raises for content problems; it returns diagnostics.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import annotations as ann
from .harte import HarteSyntaxError, chord_warnings, parse_harte
from .humdrum import NULL_TOKEN, Diagnostic, HumdrumDocument
from .kern import KernError, count_notes_and_onsets, parse_kern_token


@dataclass(frozen=True)
class ValidationProfile:
    """Knobs for the corpus profile.

    ``require_terminator`` turns a missing ``*-`` row into a warning; it is
    off by default so excerpts validate clean.
    """

    sectional_token: str | None = None
    require_terminator: bool = False


DEFAULT_PROFILE = ValidationProfile()


def _rule(prefix: str, exc: Exception) -> str:
    return prefix + "." + re.sub(r"(?<!^)(?=[A-Z])", "-", type(exc).__name__).lower()


def _diag(doc, severity, rule, message, rec=None, col=None):
    line = excerpt = column = None
    if rec is not None:
        line = rec.line
        if col is not None:
            column = col + 1
            excerpt = rec.tokens[col]
    return Diagnostic(severity, rule, message, line, column, excerpt, doc.source_name)


def _check_kern(doc, col, out):
    events, positions = [], []
    for _, rec in doc.data_records():
        tok = rec.tokens[col]
        if tok == NULL_TOKEN:
            continue
        try:
            e = parse_kern_token(tok)
        except KernError as exc:
            out.append(_diag(doc, "error", _rule("kern", exc), str(exc), rec, col))
            continue
        if e.unknown:
            out.append(_diag(doc, "warning", "kern.unknown-character", f"unknown characters {e.unknown!r}", rec, col))
        events.append(e)
        positions.append(rec)
    counts = count_notes_and_onsets(events)
    for pos in counts.dangling_ties:
        out.append(_diag(doc, "warning", "kern.dangling-tie", "tie continuation without an opening tie", positions[pos], col))


def _check_spine(doc, col, name, profile, out):
    for _, rec in doc.data_records():
        tok = rec.tokens[col]
        if tok == NULL_TOKEN:
            continue
        if name == "harte":
            try:
                chord = parse_harte(tok)
            except HarteSyntaxError as exc:
                out.append(_diag(doc, "error", _rule("harte", exc), str(exc), rec, col))
                continue
            for rule, msg in chord_warnings(chord):
                out.append(_diag(doc, "warning", rule, msg, rec, col))
        elif name in ("harm", "altharm"):
            try:
                rn = ann.parse_harm_token(tok)
            except ann.NoRomanNumeral as exc:
                out.append(_diag(doc, "error", "harm.no-roman-numeral", str(exc), rec, col))
                continue
            if rn.unparsed or (rn.secondary is not None and rn.secondary.unparsed):
                out.append(_diag(doc, "warning", "harm.trailing-matter", f"unrecognised trailing matter in {tok!r}", rec, col))
        elif name == "pedal":
            try:
                ann.parse_pedal_token(tok)
            except ann.MalformedPedalToken as exc:
                out.append(_diag(doc, "error", "pedal.malformed", str(exc), rec, col))
        elif name == "cadence":
            try:
                ann.parse_cadence_token(tok, profile.sectional_token)
            except ann.UnknownCadenceToken as exc:
                out.append(_diag(doc, "error", "cadence.unknown-token", str(exc), rec, col))


def validate(doc: HumdrumDocument, profile: ValidationProfile = DEFAULT_PROFILE) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    for w in doc.warnings:
        if w.rule == "structure.missing-terminator" and not profile.require_terminator:
            continue
        out.append(w)

    exclusive = next(rec for rec in doc.records if rec.kind == "exclusive-interpretation")
    if not doc.has_spine("kern"):
        out.append(_diag(doc, "error", "structure.missing-kern", "missing required **kern spine", exclusive))

    seen_keys: set[str] = set()
    for rec in doc.records:
        if rec.kind == "reference":
            key = rec.tokens[0][3:].partition(":")[0].strip().upper()
            if key in seen_keys:
                out.append(_diag(doc, "warning", "reference.duplicate-key", f"repeated reference key {key}", rec, 0))
            seen_keys.add(key)

    for spine in doc.spines:
        if spine.exclusive_name == "kern":
            _check_kern(doc, spine.index, out)
        else:
            _check_spine(doc, spine.index, spine.exclusive_name, profile, out)

    keys = ann.key_designations(doc)
    if len({(k.tonic, k.mode) for k in keys}) > 1:
        listed = ", ".join(str(k) for k in keys)
        out.append(_diag(doc, "warning", "key.conflicting", f"multiple key designations: {listed}"))

    out.sort(key=lambda d: (d.line or 0, d.column or 0, d.rule))
    return out


def has_errors(diagnostics) -> bool:
    return any(d.severity == "error" for d in diagnostics)

