"""Decoding of single-voice **kern tokens.

Durations are :class:`fractions.Fraction` values measured in whole notes, so
``"4"`` is 1/4 and ``"8."`` is 3/16.  Pitches keep their spelling; octave
numbers follow the kern letter-repetition rule (``c`` = C4, ``cc`` = C5,
``C`` = C3, ``CC`` = C2).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

from .pitch import SpelledPitch, pitch_to_midi  # noqa: F401

TIE_NONE, TIE_START, TIE_CONTINUE, TIE_END = "none", "start", "continue", "end"
_TIE_CHARS = {"[": TIE_START, "_": TIE_CONTINUE, "]": TIE_END}
_TIE_RENDER = {TIE_START: "[", TIE_CONTINUE: "_", TIE_END: "]", TIE_NONE: ""}

# beams, slurs/phrases, articulations, ornaments, stems and editorial marks
KNOWN_DECORATIONS = set("LJKk()&{};'\"`~^,:|<>?/\\yxXvVTtMmWwSs$ROoUuHhIiZzNPp@=")


class KernError(ValueError):
    pass


class UnparsableToken(KernError):
    pass


class ConflictingPitchAndRest(KernError):
    pass


class ChordTokenUnsupported(KernError):
    pass


class GraceHasNoDuration(KernError):
    pass


@dataclass(frozen=True)
class KernEvent:
    duration: Fraction | None
    pitch: SpelledPitch | None
    is_rest: bool = False
    tie: str = TIE_NONE
    grace: bool = False
    decorations: str = ""  # sorted multiset of retained characters
    unknown: str = ""  # characters not in KNOWN_DECORATIONS, also present in decorations

    @property
    def is_note(self) -> bool:
        return self.pitch is not None


def _parse_duration(digits: str, dots: int, token: str) -> Fraction:
    if "%" in digits:
        num, _, den = digits.partition("%")
        if not num or not den or int(den) == 0:
            raise UnparsableToken(f"bad rational duration in {token!r}")
        recip = Fraction(int(num), int(den))
    elif set(digits) == {"0"}:
        # breve family: 0 = 2 wholes, 00 = 4, 000 = 8
        recip = Fraction(1, 2 ** len(digits))
    else:
        recip = Fraction(int(digits))
    if recip == 0:
        raise UnparsableToken(f"zero duration in {token!r}")
    # each dot adds half of the previous increment: 1, 3/2, 7/4, 15/8
    return (1 / recip) * (2 - Fraction(1, 2**dots))


def parse_kern_token(token: str) -> KernEvent:
    """Decode one non-null kern data token.

    Raises :class:`UnparsableToken` if the token has neither a duration nor a
    grace mark, :class:`ConflictingPitchAndRest` if it mixes the two, and
    :class:`ChordTokenUnsupported` for space-separated chord tokens.
    Characters outside the known kern vocabulary are kept and reported via
    ``event.unknown``.
    """
    if " " in token.strip():
        raise ChordTokenUnsupported(f"chord token {token!r}: only one note at a time is supported")
    token = token.strip()
    if not token or token == ".":
        raise UnparsableToken(f"empty or null token {token!r}")

    i, n = 0, len(token)
    digits, dots = "", 0
    letters = ""
    acc = ""
    rest = False
    tie = TIE_NONE
    grace = False
    extras: list[str] = []

    while i < n:
        ch = token[i]
        if ch.isdigit() or (ch == "%" and digits):
            if digits and token[i - 1] not in "0123456789%":
                raise UnparsableToken(f"duration split in {token!r}")
            digits += ch
        elif ch == ".":
            if not digits:
                raise UnparsableToken(f"dot without duration in {token!r}")
            dots += 1
        elif ch.lower() in "abcdefg":
            if letters and (ch != letters[0] or token[i - 1] != letters[-1]):
                raise UnparsableToken(f"inconsistent pitch letters in {token!r}")
            letters += ch
        elif ch in "#-n":
            if not letters:
                raise UnparsableToken(f"accidental before pitch in {token!r}")
            if ch != "n":
                if acc and acc[0] != ch:
                    raise UnparsableToken(f"mixed accidentals in {token!r}")
                acc += ch
        elif ch == "r":
            rest = True
        elif ch in _TIE_CHARS:
            kind = _TIE_CHARS[ch]
            if tie != TIE_NONE and tie != kind:
                # "[" with "]" cannot both hold; keep the first and flag
                extras.append(ch)
            else:
                tie = kind
        elif ch in "qQ":
            grace = True
        else:
            extras.append(ch)
        i += 1

    if rest and letters:
        raise ConflictingPitchAndRest(f"{token!r} has both a pitch and a rest")
    if not rest and not letters:
        raise UnparsableToken(f"{token!r} has no pitch or rest")
    if not digits and not grace:
        raise UnparsableToken(f"{token!r} has no duration")

    pitch = None
    if letters:
        count = len(letters)
        octave = 3 + count if letters[0].islower() else 4 - count
        accidental = len(acc) if acc.startswith("#") else -len(acc)
        pitch = SpelledPitch(letters[0].upper(), accidental, octave)

    duration = None if grace else _parse_duration(digits, dots, token)
    unknown = "".join(sorted(c for c in extras if c not in KNOWN_DECORATIONS))
    return KernEvent(
        duration=duration,
        pitch=pitch,
        is_rest=rest,
        tie=tie,
        grace=grace,
        decorations="".join(sorted(extras)),
        unknown=unknown,
    )


def duration_digits(duration: Fraction) -> str:
    """Reciprocal-notation text for a whole-note fraction (``3/16`` -> ``"8."``)."""
    for dots in range(4):
        factor = 2 - Fraction(1, 2**dots)
        base = duration / factor
        if base.numerator == 1:
            return str(base.denominator) + "." * dots
        if base.denominator == 1 and base.numerator in (2, 4, 8):
            return "0" * {2: 1, 4: 2, 8: 3}[base.numerator] + "." * dots
    recip = 1 / duration
    return f"{recip.numerator}%{recip.denominator}"


def kern_pitch_text(p: SpelledPitch) -> str:
    if p.octave >= 4:
        letters = p.letter.lower() * (p.octave - 3)
    else:
        letters = p.letter * (4 - p.octave)
    acc = "#" * p.accidental if p.accidental > 0 else "-" * -p.accidental
    return letters + acc


def render_kern_token(e: KernEvent) -> str:
    """Canonical token text: duration, pitch or rest, grace, tie, decorations."""
    parts = []
    if e.duration is not None:
        parts.append(duration_digits(e.duration))
    parts.append("r" if e.is_rest else kern_pitch_text(e.pitch))
    if e.grace:
        parts.append("q")
    parts.append(_TIE_RENDER[e.tie])
    parts.append(e.decorations)
    return "".join(parts)


_DURATION_BASE_NAMES = {
    Fraction(8): "maxima",
    Fraction(4): "long",
    Fraction(2): "breve",
    Fraction(1): "whole",
    Fraction(1, 2): "half",
    Fraction(1, 4): "quarter",
    Fraction(1, 8): "eighth",
    Fraction(1, 16): "16th",
    Fraction(1, 32): "32nd",
    Fraction(1, 64): "64th",
    Fraction(1, 128): "128th",
}
_DOT_NAMES = {0: "", 1: "dotted ", 2: "double-dotted ", 3: "triple-dotted "}


def duration_name(duration: Fraction) -> str:
    """Human name such as ``"Dotted whole note"`` or ``"64th note"``."""
    for dots, prefix in _DOT_NAMES.items():
        base = duration / (2 - Fraction(1, 2**dots))
        if base in _DURATION_BASE_NAMES:
            name = f"{prefix}{_DURATION_BASE_NAMES[base]} note"
            return name[0].upper() + name[1:]
    return f"{duration} of a whole note"


def event_seconds(e: KernEvent, tempo: float) -> float:
    """Seconds for an event at ``tempo`` quarter notes per minute."""
    if e.duration is None:
        raise GraceHasNoDuration("grace notes have no duration")
    if tempo <= 0:
        raise ValueError("tempo must be positive")
    return float(e.duration) * 240.0 / tempo


class NoteCounts(NamedTuple):
    notes: int
    onsets: int
    rests: int
    dangling_ties: tuple[int, ...] = ()  # positions of continue/end events with no opener


def count_notes_and_onsets(events: Iterable[KernEvent]) -> NoteCounts:
    """Count notes (tie continuations included), onsets (excluded) and rests.

    Tie continuations/ends without a matching open tie at the same pitch are
    still counted as notes and listed in ``dangling_ties``.
    """
    notes = onsets = rests = 0
    open_ties: set[int] = set()
    dangling = []
    for pos, e in enumerate(events):
        if e.is_rest:
            rests += 1
            continue
        if e.pitch is None:
            continue
        notes += 1
        midi = e.pitch.midi
        if e.tie in (TIE_NONE, TIE_START):
            onsets += 1
            if e.tie == TIE_START:
                open_ties.add(midi)
        else:
            if midi not in open_ties:
                dangling.append(pos)
            if e.tie == TIE_END:
                open_ties.discard(midi)
            else:
                open_ties.add(midi)
    return NoteCounts(notes, onsets, rests, tuple(dangling))
