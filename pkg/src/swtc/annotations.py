"""Decoders for the annotation spines that run beside the melody.

Covers **harm / **altharm Roman numerals, the stateful **pedal spine,
**cadence labels with boundary markers, **text comments, and the key
context carried by tandem interpretations.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .harte import HarteChord, parse_harte
from .humdrum import NULL_TOKEN, HumdrumDocument, UnknownSpine
from .pitch import SpelledPitchClass, parse_pitch_class


class AnnotationError(ValueError):
    pass


class NoRomanNumeral(AnnotationError):
    pass


class MalformedPedalToken(AnnotationError):
    pass


class UnknownCadenceToken(AnnotationError):
    pass


# ---------------------------------------------------------------- roman numerals

_NUMERALS = {"I": 1, "II": 2, "III": 3, "IV": 4, "V": 5, "VI": 6, "VII": 7}
_RN_RE = re.compile(r"^(?P<acc>[b#-]?)(?P<rn>VII|VI|IV|V|III|II|I|vii|vi|iv|v|iii|ii|i)(?P<qual>[o+]?)")
_FIGURE_RE = re.compile(
    r"\[(?P<bracketed>[^\]]*)\]|(?P<prefix>add|sus|no|omit)?(?P<acc>[b#-]*)(?P<num>\d+)"
)
_FIG_BODY_RE = re.compile(r"^(?P<prefix>add|sus|no|omit)?(?P<acc>[b#-]*)(?P<num>\d+)$")
_INVERSION_RE = re.compile(r"[a-d](?![0-9])")


@dataclass(frozen=True)
class Figure:
    text: str
    bracketed: bool = False
    prefix: str | None = None
    accidentals: int = 0
    number: int | None = None


@dataclass(frozen=True)
class RomanNumeral:
    degree: int
    major_type: bool
    prefix_accidental: str | None = None
    quality: str | None = None  # "o" diminished, "+" augmented
    figures: tuple[Figure, ...] = ()
    inversion: str | None = None
    secondary: RomanNumeral | None = None
    unparsed: str = ""  # trailing matter kept verbatim

    @property
    def numeral(self) -> str:
        rn = next(k for k, v in _NUMERALS.items() if v == self.degree)
        return rn if self.major_type else rn.lower()


def _figure(body: str, bracketed: bool) -> Figure:
    m = _FIG_BODY_RE.match(body)
    if m is None:
        return Figure(body, bracketed)
    acc = m.group("acc")
    return Figure(
        body,
        bracketed,
        m.group("prefix"),
        acc.count("#") - acc.count("b") - acc.count("-"),
        int(m.group("num")),
    )


def parse_harm_token(token: str) -> RomanNumeral:
    """Decode a **harm token such as ``"i"``, ``"V[b9]"`` or ``"V7/V"``.

    Anything left over after the numeral, figures and inversion is kept in
    ``unparsed``; callers surface it as a warning.
    """
    head, slash, tail = token.strip().partition("/")
    m = _RN_RE.match(head)
    if m is None:
        raise NoRomanNumeral(f"no Roman numeral in {token!r}")
    rn = m.group("rn")
    pos = m.end()
    figures: list[Figure] = []
    inversion = None
    while pos < len(head):
        fm = _FIGURE_RE.match(head, pos)
        if fm is not None:
            if fm.group("bracketed") is not None:
                figures.append(_figure(fm.group("bracketed"), True))
            else:
                figures.append(_figure(fm.group(0), False))
            pos = fm.end()
            continue
        im = _INVERSION_RE.match(head, pos)
        if im is not None and inversion is None:
            inversion = im.group(0)
            pos = im.end()
            continue
        break
    secondary = parse_harm_token(tail) if slash else None
    return RomanNumeral(
        degree=_NUMERALS[rn.upper()],
        major_type=rn.isupper(),
        prefix_accidental={"-": "b"}.get(m.group("acc"), m.group("acc")) or None,
        quality=m.group("qual") or None,
        figures=tuple(figures),
        inversion=inversion,
        secondary=secondary,
        unparsed=head[pos:],
    )


# ---------------------------------------------------------------- pedal points

_PEDAL_RE = re.compile(r"^pedal\s*:\s*(?P<pitch>\S+)\s*$", re.IGNORECASE)


@dataclass(frozen=True)
class PedalState:
    active: SpelledPitchClass | None
    source_record: int | None  # index of the explicit token that set this state


def parse_pedal_token(token: str) -> SpelledPitchClass | None:
    """``"Pedal: G"`` -> G, ``"None"`` -> None; anything else is malformed."""
    text = token.strip()
    if text.lower() == "none":
        return None
    m = _PEDAL_RE.match(text)
    if m is None:
        raise MalformedPedalToken(f"malformed pedal token {token!r}")
    try:
        return parse_pitch_class(m.group("pitch"))
    except ValueError as exc:
        raise MalformedPedalToken(f"malformed pedal pitch in {token!r}") from exc


def resolve_pedals(tokens: Sequence[str]) -> list[PedalState]:
    """Carry the pedal forward across ``.`` tokens until replaced or cleared."""
    states = []
    state = PedalState(None, None)
    for i, tok in enumerate(tokens):
        if tok != NULL_TOKEN:
            state = PedalState(parse_pedal_token(tok), i)
        states.append(state)
    return states


# ---------------------------------------------------------------- cadences

CADENCE_KINDS = ("PAC", "IAC", "HC", "PHC", "CC", "CHC", "MHC", "EC")
CONCLUSIVE, HALF_CADENTIAL, SECTIONAL, ABRUPT = "conclusive", "half-cadential", "sectional", "abrupt"
BOUNDARY_MARKERS = {"]]": CONCLUSIVE, "//": HALF_CADENTIAL, ";;": ABRUPT, ";": ABRUPT}
_KIND_SCAN = sorted(CADENCE_KINDS, key=len, reverse=True)


@dataclass(frozen=True)
class CadenceEvent:
    kind: str | None = None
    boundary: str | None = None


def parse_cadence_token(token: str, sectional_token: str | None = None) -> CadenceEvent:
    """Split a cadence token into its label and/or boundary marker.

    ``sectional_token`` binds the marker for sectional endings; no marker
    maps to ``sectional`` unless one is given.
    """
    markers = dict(BOUNDARY_MARKERS)
    if sectional_token:
        markers[sectional_token] = SECTIONAL
    text = token.strip()
    marker_scan = sorted(markers, key=len, reverse=True)

    def take_kind(s: str) -> tuple[str | None, str]:
        for k in _KIND_SCAN:
            if s.startswith(k):
                return k, s[len(k):]
        return None, s

    def take_marker(s: str) -> tuple[str | None, str]:
        for mk in marker_scan:
            if s.startswith(mk):
                return markers[mk], s[len(mk):]
        return None, s

    kind, rest = take_kind(text)
    boundary, rest = take_marker(rest.strip())
    if kind is None and boundary is not None:
        kind, rest = take_kind(rest.strip())
    if rest.strip() or (kind is None and boundary is None):
        raise UnknownCadenceToken(f"unknown cadence token {token!r}")
    return CadenceEvent(kind, boundary)


# ---------------------------------------------------------------- keys

_KEY_RE = re.compile(r"^\*([A-Ga-g])([#-]*):$")
_KEYSIG_RE = re.compile(r"^\*k\[(?P<body>[^\]]*)\]$")
_KEYSIG_ITEM = re.compile(r"[a-g][#-]+")


@dataclass(frozen=True)
class KeyContext:
    tonic: SpelledPitchClass
    mode: str  # "major" | "minor"
    key_signature: tuple[SpelledPitchClass, ...] = ()

    def __str__(self) -> str:
        return f"{self.tonic} {self.mode}"


def _kern_tandems(doc: HumdrumDocument) -> list[str]:
    try:
        spines = doc.spines_named("kern")
    except UnknownSpine:
        return []
    return [tok for s in spines for _, tok in s.tandem_interpretations]


def key_designations(doc: HumdrumDocument) -> list[KeyContext]:
    """Every ``*X:`` designation in the kern spine, each with the signature in force."""
    out = []
    signature: tuple[SpelledPitchClass, ...] = ()
    for tok in _kern_tandems(doc):
        sm = _KEYSIG_RE.match(tok)
        if sm is not None:
            signature = tuple(parse_pitch_class(x) for x in _KEYSIG_ITEM.findall(sm.group("body")))
            continue
        km = _KEY_RE.match(tok)
        if km is not None:
            letter, acc = km.groups()
            tonic = parse_pitch_class(letter + acc)
            out.append(KeyContext(tonic, "major" if letter.isupper() else "minor", signature))
    return out


def key_context(doc: HumdrumDocument) -> KeyContext | None:
    """The first key designation of the kern spine, or None for unkeyed themes."""
    keys = key_designations(doc)
    return keys[0] if keys else None


# ---------------------------------------------------------------- timeline

@dataclass(frozen=True)
class TimelineEntry:
    record_index: int
    line: int
    kern: str | None
    chord: HarteChord | None
    harm: RomanNumeral | None
    altharm: RomanNumeral | None
    pedal: PedalState
    cadence: CadenceEvent | None
    text: str | None


def _column(doc: HumdrumDocument, name: str) -> int | None:
    for s in doc.spines:
        if s.exclusive_name == name:
            return s.index
    return None


def build_timeline(doc: HumdrumDocument, sectional_token: str | None = None) -> list[TimelineEntry]:
    """Resolve every data record into its annotation state.

    Null tokens yield ``None`` except for the pedal, which carries forward.
    Raises the decoders' errors on malformed tokens; run validation first
    to get them as diagnostics instead.
    """
    cols = {n: _column(doc, n) for n in ("kern", "harte", "harm", "altharm", "pedal", "cadence", "text")}

    def tok(rec, name):
        c = cols[name]
        if c is None or rec.tokens[c] == NULL_TOKEN:
            return None
        return rec.tokens[c]

    data = list(doc.data_records())
    pedal_tokens = [tok(rec, "pedal") or NULL_TOKEN for _, rec in data]
    pedals = resolve_pedals(pedal_tokens)
    out = []
    for (idx, rec), pedal in zip(data, pedals):
        harte_tok, harm_tok, alt_tok, cad_tok = (tok(rec, n) for n in ("harte", "harm", "altharm", "cadence"))
        out.append(
            TimelineEntry(
                record_index=idx,
                line=rec.line,
                kern=tok(rec, "kern"),
                chord=parse_harte(harte_tok) if harte_tok else None,
                harm=parse_harm_token(harm_tok) if harm_tok else None,
                altharm=parse_harm_token(alt_tok) if alt_tok else None,
                pedal=PedalState(pedal.active, data[pedal.source_record][0] if pedal.source_record is not None else None),
                cadence=parse_cadence_token(cad_tok, sectional_token) if cad_tok else None,
                text=tok(rec, "text"),
            )
        )
    return out
