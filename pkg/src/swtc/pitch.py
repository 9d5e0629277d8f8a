"""Spelled pitches and pitch classes shared by the kern, harte and annotation decoders."""

from __future__ import annotations

import re
from dataclasses import dataclass

LETTERS = "CDEFGAB"
LETTER_SEMITONES = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}

_PC_RE = re.compile(r"^([A-Ga-g])(#+|[b-]+)?$")


def accidental_text(accidental: int) -> str:
    """Render an accidental offset with ``#`` for sharps and ``b`` for flats."""
    return "#" * accidental if accidental > 0 else "b" * -accidental


@dataclass(frozen=True, order=True)
class SpelledPitchClass:
    letter: str
    accidental: int = 0

    @property
    def pc(self) -> int:
        return (LETTER_SEMITONES[self.letter] + self.accidental) % 12

    def __str__(self) -> str:
        return self.letter + accidental_text(self.accidental)


def parse_pitch_class(text: str) -> SpelledPitchClass:
    """Parse ``Eb``, ``E-``, ``F#`` style names; ``-`` is a kern flat and equals ``b``.

    The letter may be either case, so key tokens like ``g`` decode too.
    Raises ``ValueError`` on anything else.
    """
    m = _PC_RE.match(text.strip())
    if m is None:
        raise ValueError(f"not a pitch name: {text!r}")
    letter, acc = m.group(1).upper(), m.group(2) or ""
    accidental = len(acc) if acc.startswith("#") else -len(acc)
    return SpelledPitchClass(letter, accidental)


@dataclass(frozen=True)
class SpelledPitch:
    """A pitch with spelling kept; octave numbers are scientific (C4 is middle C)."""

    letter: str
    accidental: int
    octave: int

    @property
    def midi(self) -> int:
        return 12 * (self.octave + 1) + LETTER_SEMITONES[self.letter] + self.accidental

    @property
    def pitch_class(self) -> SpelledPitchClass:
        return SpelledPitchClass(self.letter, self.accidental)

    def sort_key(self) -> tuple[int, int, int]:
        return (self.midi, LETTERS.index(self.letter), self.accidental)

    def __str__(self) -> str:
        return f"{self.letter}{accidental_text(self.accidental)}{self.octave}"


def pitch_to_midi(p: SpelledPitch) -> int:
    return p.midi


_PITCH_NAME_RE = re.compile(r"^([A-G])(#+|b+)?(-?\d+)$")


def parse_pitch_name(text: str) -> SpelledPitch:
    """Inverse of ``str(SpelledPitch)``: ``"F#6"``, ``"Bb1"``."""
    m = _PITCH_NAME_RE.match(text)
    if m is None:
        raise ValueError(f"not a pitch name: {text!r}")
    acc = m.group(2) or ""
    return SpelledPitch(m.group(1), len(acc) if acc.startswith("#") else -len(acc), int(m.group(3)))
