"""Harte chord symbols: parsing, canonical rendering and interval expansion.

Grammar (see ``docs/harte.ebnf``)::

    chord  := "N" | layer ["|" layer]
    layer  := root [":" (shorthand ["(" degrees ")"] | "(" degrees ")")] ["/" degree]
    root   := letter {"b" | "#" | "-"}
    degrees:= ["*"] degree {"," ["*"] degree}
    degree := {"b" | "#"} number          (number in 1..13)

Kern-style ``-`` flats in the root are accepted and normalised to ``b``.
Two chords compare equal when they sound the same structure: same root
spelling, same expanded interval set, same bass degree, same lower layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .pitch import LETTERS, SpelledPitchClass, accidental_text

_MAJOR_SCALE = (0, 2, 4, 5, 7, 9, 11)
MAX_DEGREE = 13


@dataclass(frozen=True)
class Degree:
    accidentals: int
    number: int

    @property
    def semitones(self) -> int:
        octave, step = divmod(self.number - 1, 7)
        return _MAJOR_SCALE[step] + 12 * octave + self.accidentals

    def sort_key(self) -> tuple[int, int, int]:
        return (self.semitones, self.number, self.accidentals)

    def __str__(self) -> str:
        return accidental_text(self.accidentals) + str(self.number)


def degree(text: str) -> Degree:
    """Shorthand constructor used for tables and tests: ``degree("bb7")``."""
    acc = -text.count("b") + text.count("#")
    return Degree(acc, int(text.lstrip("b#")))


def _degrees(*texts: str) -> frozenset[Degree]:
    return frozenset(degree(t) for t in texts)


# Shorthand expansions.  The first 17 rows are the common-chord table; the
# 11th/13th family follows the extended Harte vocabulary.  min9 carries b9
# exactly as the common-chord table prints it.
SHORTHANDS: dict[str, frozenset[Degree]] = {
    "maj": _degrees("1", "3", "5"),
    "min": _degrees("1", "b3", "5"),
    "dim": _degrees("1", "b3", "b5"),
    "aug": _degrees("1", "3", "#5"),
    "maj7": _degrees("1", "3", "5", "7"),
    "min7": _degrees("1", "b3", "5", "b7"),
    "7": _degrees("1", "3", "5", "b7"),
    "dim7": _degrees("1", "b3", "b5", "bb7"),
    "hdim7": _degrees("1", "b3", "b5", "b7"),
    "minmaj7": _degrees("1", "b3", "5", "7"),
    "maj6": _degrees("1", "3", "5", "6"),
    "min6": _degrees("1", "b3", "5", "6"),
    "9": _degrees("1", "3", "5", "b7", "9"),
    "maj9": _degrees("1", "3", "5", "7", "9"),
    "min9": _degrees("1", "b3", "5", "b7", "b9"),
    "sus4": _degrees("1", "4", "5"),
    "sus2": _degrees("1", "2", "5"),
    "11": _degrees("1", "3", "5", "b7", "9", "11"),
    "maj11": _degrees("1", "3", "5", "7", "9", "11"),
    "min11": _degrees("1", "b3", "5", "b7", "9", "11"),
    "13": _degrees("1", "3", "5", "b7", "9", "11", "13"),
    "maj13": _degrees("1", "3", "5", "7", "9", "11", "13"),
    "min13": _degrees("1", "b3", "5", "b7", "9", "11", "13"),
}
COMMON_CHORD_TABLE = tuple(list(SHORTHANDS)[:17])
# Longest names first so "maj7" is not read as "maj" + "7".
_SHORTHAND_SCAN = sorted(SHORTHANDS, key=len, reverse=True)

_ROOT_ONLY = _degrees("1")


class HarteSyntaxError(ValueError):
    def __init__(self, message: str, symbol: str, offset: int):
        self.symbol = symbol
        self.offset = offset
        super().__init__(f"{message} at offset {offset} in {symbol!r}")


class UnknownShorthand(HarteSyntaxError):
    pass


class EmptyDegreeList(HarteSyntaxError):
    pass


class MalformedRoot(HarteSyntaxError):
    pass


class MalformedDegree(HarteSyntaxError):
    pass


@dataclass(frozen=True, eq=False)
class HarteChord:
    root: SpelledPitchClass | None
    shorthand: str | None = None
    added_degrees: frozenset[Degree] = field(default_factory=frozenset)
    omitted_degrees: frozenset[Degree] = field(default_factory=frozenset)
    bass: Degree | None = None
    no_chord: bool = False
    lower: HarteChord | None = None  # second layer of an ``A|B`` polychord

    def _identity(self):
        if self.no_chord:
            return ("N",)
        lower = self.lower._identity() if self.lower is not None else None
        return (self.root, interval_set(self), self.bass, lower)

    def __eq__(self, other):
        if not isinstance(other, HarteChord):
            return NotImplemented
        return self._identity() == other._identity()

    def __hash__(self):
        return hash(self._identity())

    def __str__(self) -> str:
        return render_harte(self)


NO_CHORD = HarteChord(root=None, no_chord=True)


class _Parser:
    def __init__(self, symbol: str):
        self.s = symbol
        self.i = 0

    def peek(self) -> str:
        return self.s[self.i] if self.i < len(self.s) else ""

    def chord(self) -> HarteChord:
        if self.s == "N":
            return NO_CHORD
        upper = self.layer()
        if self.peek() == "|":
            self.i += 1
            lower = self.layer()
            upper = HarteChord(
                upper.root, upper.shorthand, upper.added_degrees, upper.omitted_degrees, upper.bass, lower=lower
            )
        if self.i != len(self.s):
            raise MalformedDegree(f"unexpected {self.peek()!r}", self.s, self.i)
        return upper

    def layer(self) -> HarteChord:
        root = self.root()
        shorthand = None
        added: set[Degree] = set()
        omitted: set[Degree] = set()
        if self.peek() == ":":
            self.i += 1
            if self.peek() != "(":
                shorthand = self.shorthand()
            if self.peek() == "(":
                added, omitted = self.degree_list()
            elif shorthand is None:
                raise UnknownShorthand("missing shorthand after ':'", self.s, self.i)
        bass = None
        if self.peek() == "/":
            self.i += 1
            bass = self.degree()
        return HarteChord(root, shorthand, frozenset(added), frozenset(omitted), bass)

    def root(self) -> SpelledPitchClass:
        start = self.i
        letter = self.peek()
        if letter not in LETTERS or not letter:
            raise MalformedRoot("expected root letter A-G", self.s, start)
        self.i += 1
        mods = ""
        while self.peek() in ("b", "#", "-") and self.peek():
            mods += self.peek()
            self.i += 1
        if "#" in mods and ("b" in mods or "-" in mods):
            raise MalformedRoot("root mixes sharps and flats", self.s, start)
        return SpelledPitchClass(letter, mods.count("#") - len(mods.replace("#", "")))

    def shorthand(self) -> str:
        start = self.i
        rest = self.s[self.i:]
        for name in _SHORTHAND_SCAN:
            if rest.startswith(name):
                nxt = rest[len(name):len(name) + 1]
                if nxt in ("", "(", "/", "|"):
                    self.i += len(name)
                    return name
        end = start
        while end < len(self.s) and self.s[end] not in "(/|":
            end += 1
        raise UnknownShorthand(f"unknown shorthand {self.s[start:end]!r}", self.s, start)

    def degree_list(self) -> tuple[set[Degree], set[Degree]]:
        open_at = self.i
        self.i += 1
        added: set[Degree] = set()
        omitted: set[Degree] = set()
        if self.peek() == ")":
            raise EmptyDegreeList("empty degree list", self.s, open_at)
        while True:
            missing = self.peek() == "*"
            if missing:
                self.i += 1
            (omitted if missing else added).add(self.degree())
            ch = self.peek()
            if ch == ",":
                self.i += 1
                continue
            if ch == ")":
                self.i += 1
                return added, omitted
            raise MalformedDegree("expected ',' or ')'", self.s, self.i)

    def degree(self) -> Degree:
        start = self.i
        acc = 0
        while self.peek() in ("b", "#") and self.peek():
            acc += 1 if self.peek() == "#" else -1
            self.i += 1
        digits = ""
        while self.peek().isdigit():
            digits += self.peek()
            self.i += 1
        if not digits:
            raise MalformedDegree("expected degree number", self.s, start)
        number = int(digits)
        if not 1 <= number <= MAX_DEGREE:
            raise MalformedDegree(f"degree {number} outside 1..{MAX_DEGREE}", self.s, start)
        return Degree(acc, number)


def parse_harte(symbol: str) -> HarteChord:
    """Parse a Harte symbol such as ``"G:7/3"``, ``"E-:min"`` or ``"C:(3,#5,6,7)"``."""
    symbol = symbol.strip()
    if not symbol:
        raise MalformedRoot("empty symbol", symbol, 0)
    return _Parser(symbol).chord()


def _base_set(c: HarteChord) -> frozenset[Degree]:
    if c.shorthand is not None:
        return SHORTHANDS[c.shorthand]
    if c.added_degrees or c.omitted_degrees:
        return _ROOT_ONLY
    return SHORTHANDS["maj"]


def interval_set(c: HarteChord) -> frozenset[Degree]:
    """Degrees sounding above the root: shorthand expansion, plus additions, minus omissions."""
    if c.no_chord:
        raise ValueError("'N' has no intervals")
    return (_base_set(c) | c.added_degrees) - c.omitted_degrees


def sorted_degrees(degrees: Iterable[Degree]) -> list[Degree]:
    return sorted(degrees, key=Degree.sort_key)


def shorthand_for(degrees: frozenset[Degree]) -> str | None:
    for name, expansion in SHORTHANDS.items():
        if expansion == degrees:
            return name
    return None


def _render_layer(c: HarteChord) -> str:
    degrees = interval_set(c)
    name = shorthand_for(degrees)
    if name is not None:
        body = f"{c.root}:{name}"
    else:
        items = [str(d) for d in sorted_degrees(degrees - _ROOT_ONLY)]
        if Degree(0, 1) not in degrees:
            items.insert(0, "*1")
        elif not items:
            items = ["1"]
        body = f"{c.root}:({','.join(items)})"
    if c.bass is not None:
        body += f"/{c.bass}"
    return body


def render_harte(c: HarteChord) -> str:
    """Canonical text; flats as ``b``, shorthand used when the degree set matches one exactly."""
    if c.no_chord:
        return "N"
    text = _render_layer(c)
    if c.lower is not None:
        text += "|" + _render_layer(c.lower)
    return text


def pitch_class_set(c: HarteChord) -> frozenset[int]:
    """Sounding pitch classes (C = 0); a polychord contributes both layers."""
    if c.no_chord:
        raise ValueError("'N' has no pitch classes")
    pcs = frozenset((c.root.pc + d.semitones) % 12 for d in interval_set(c))
    if c.lower is not None:
        pcs |= pitch_class_set(c.lower)
    return pcs


def chord_type_key(c: HarteChord) -> str:
    """Root- and bass-free type label, e.g. ``"min"`` or ``"(1,3,#5,6,7)"``.

    A polychord is classified by its upper layer.
    """
    if c.no_chord:
        raise ValueError("'N' has no chord type")
    degrees = interval_set(c)
    name = shorthand_for(degrees)
    if name is not None:
        return name
    return "(" + ",".join(str(d) for d in sorted_degrees(degrees)) + ")"


_SPELLINGS = ("C", "Db", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B")


def _respell(pc: SpelledPitchClass, semitones: int) -> SpelledPitchClass:
    name = _SPELLINGS[(pc.pc + semitones) % 12]
    return SpelledPitchClass(name[0], -1 if name.endswith("b") else (1 if name.endswith("#") else 0))


def transpose(c: HarteChord, semitones: int) -> HarteChord:
    if c.no_chord:
        return c
    lower = transpose(c.lower, semitones) if c.lower is not None else None
    return HarteChord(
        _respell(c.root, semitones), c.shorthand, c.added_degrees, c.omitted_degrees, c.bass, lower=lower
    )


def chord_warnings(c: HarteChord) -> list[tuple[str, str]]:
    """Non-fatal findings as ``(rule, message)`` pairs."""
    out: list[tuple[str, str]] = []
    if c.no_chord:
        return out
    layers = [c] if c.lower is None else [c, c.lower]
    if c.lower is not None:
        out.append(("harte.nonstandard-extension", "polychord '|' notation is a nonstandard extension"))
    for layer in layers:
        base = _base_set(layer) | layer.added_degrees
        for d in sorted_degrees(layer.omitted_degrees - base):
            out.append(("harte.omission-not-present", f"omitted degree {d} is not in the chord"))
        if layer.bass is not None and layer.bass not in interval_set(layer):
            out.append(("harte.bass-not-member", f"bass degree {layer.bass} is not a chord member"))
        if layer.shorthand == "min9":
            out.append(("harte.min9-as-printed", "min9 expands with b9 as in the common-chord table"))
    return out


def describe(c: HarteChord) -> dict:
    """Structured view used by the CLI."""
    if c.no_chord:
        return {"symbol": "N", "no_chord": True}
    out = {
        "symbol": render_harte(c),
        "no_chord": False,
        "root": str(c.root),
        "shorthand": c.shorthand,
        "added_degrees": [str(d) for d in sorted_degrees(c.added_degrees)],
        "omitted_degrees": [str(d) for d in sorted_degrees(c.omitted_degrees)],
        "bass": str(c.bass) if c.bass is not None else None,
        "intervals": [str(d) for d in sorted_degrees(interval_set(c))],
        "pitch_classes": sorted(pitch_class_set(c)),
        "type_key": chord_type_key(c),
    }
    if c.lower is not None:
        out["lower"] = describe(c.lower)
    return out
