"""Corpus statistics: census, pitch and chord-type histograms, per-file profiles.

Every statistic is computed per file first and then folded, so totals do not
depend on file order or on how parsing was spread across workers.
"""

from __future__ import annotations

import math
import re
import statistics
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

from .annotations import KeyContext, key_context
from .harte import chord_type_key, parse_harte
from .humdrum import BARLINE, DATA, NULL_TOKEN, TANDEM, HumdrumDocument
from .kern import KernEvent, count_notes_and_onsets, duration_name, event_seconds, parse_kern_token
from .pitch import SpelledPitch

TRILOGIES = ("Original", "Prequel", "Sequel")
SD_KIND = "population"

_MEASURE_RE = re.compile(r"^=+(\d+)")
_TEMPO_RE = re.compile(r"^\*MM(\d+(?:\.\d+)?)$")


def _sig6(x: float) -> float:
    return float(f"{x:.6g}")


@dataclass(frozen=True)
class FileProfile:
    file_id: str
    note_count: int
    onset_count: int
    rest_count: int
    measure_count: int
    duration_seconds: float | None
    key: KeyContext | None
    trilogy: str | None = None
    extra: Mapping[str, str] = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        out = {
            "file_id": self.file_id,
            "note_count": self.note_count,
            "onset_count": self.onset_count,
            "rest_count": self.rest_count,
            "measure_count": self.measure_count,
            "duration_seconds": self.duration_seconds,
            "key": str(self.key) if self.key else None,
            "trilogy": self.trilogy,
        }
        for k, v in sorted(self.extra.items()):
            out.setdefault(k, v)
        return out


@dataclass(frozen=True)
class CorpusCensus:
    file_count: int
    notes_incl_ties: int
    onsets: int
    rests: int
    longest_note: str | None
    shortest_note_excl_grace: str | None
    highest_pitch: str | None
    lowest_pitch: str | None
    total_measures: int
    mean_measures: float
    sd_measures: float
    longest_theme_measures: int
    shortest_theme_measures: int
    keyed_files: int
    unkeyed_files: int
    major_files: int
    minor_files: int
    sd_kind: str = SD_KIND
    excluded_files: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        d = asdict(self)
        d["excluded_files"] = list(self.excluded_files)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> CorpusCensus:
        kw = dict(d)
        kw["excluded_files"] = tuple(kw.get("excluded_files", ()))
        return cls(**kw)


@dataclass(frozen=True)
class Histogram:
    bins: tuple[tuple[str, int], ...]
    total: int
    meta: Mapping = field(default_factory=dict, compare=False)

    @property
    def labels(self) -> list[str]:
        return [b[0] for b in self.bins]

    def as_dict(self) -> dict:
        return {
            "bins": [{"label": label, "count": count} for label, count in self.bins],
            "total": self.total,
            "meta": dict(self.meta),
        }


class KeyTally(NamedTuple):
    keyed: int
    unkeyed: int
    major: int
    minor: int


@dataclass
class _FileStats:
    file_id: str
    notes: int
    onsets: int
    rests: int
    measures: int
    seconds: float | None
    key: KeyContext | None
    longest: Fraction | None
    shortest: Fraction | None
    highest: SpelledPitch | None
    lowest: SpelledPitch | None
    pitches: Counter


def kern_events(doc: HumdrumDocument) -> list[KernEvent]:
    """Decoded non-null tokens of every kern spine, in record order."""
    cols = [s.index for s in doc.spines if s.exclusive_name == "kern"]
    out = []
    for _, rec in doc.data_records():
        for c in cols:
            tok = rec.tokens[c]
            if tok != NULL_TOKEN:
                out.append(parse_kern_token(tok))
    return out


def measure_count(doc: HumdrumDocument) -> int:
    """Numbered barlines, plus an unnumbered barline that opens the music."""
    count = 0
    seen_data = False
    first_barline = True
    for rec in doc.records:
        if rec.kind == DATA:
            seen_data = True
        elif rec.kind == BARLINE:
            tok = rec.tokens[0]
            if _MEASURE_RE.match(tok):
                count += 1
            elif first_barline and not seen_data:
                count += 1
            first_barline = False
    return count


def duration_seconds(doc: HumdrumDocument) -> float | None:
    """Sum of timed kern events (notes and rests) under the tempo in force.

    Each ``*MM`` applies from its record onward; events before the first
    marking use it.  Without any ``*MM`` the duration is unknown.
    """
    kern = [s for s in doc.spines if s.exclusive_name == "kern"]
    if not kern:
        return None
    col = kern[0].index
    marks = []
    for i, rec in enumerate(doc.records):
        if rec.kind == TANDEM:
            m = _TEMPO_RE.match(rec.tokens[col])
            if m:
                marks.append((i, float(m.group(1))))
    if not marks:
        return None
    tempo = marks[0][1]
    upcoming = iter(marks)
    nxt = next(upcoming, None)
    total = 0.0
    for i, rec in enumerate(doc.records):
        while nxt is not None and nxt[0] <= i:
            tempo = nxt[1]
            nxt = next(upcoming, None)
        if rec.kind != DATA or rec.tokens[col] == NULL_TOKEN:
            continue
        e = parse_kern_token(rec.tokens[col])
        if e.duration is not None:
            total += event_seconds(e, tempo)
    return total


def _file_stats(doc: HumdrumDocument) -> _FileStats:
    events = kern_events(doc)
    counts = count_notes_and_onsets(events)
    notes = [e for e in events if e.pitch is not None]
    timed = [e.duration for e in notes if e.duration is not None]
    pitches = [e.pitch for e in notes]
    return _FileStats(
        file_id=doc.source_name,
        notes=counts.notes,
        onsets=counts.onsets,
        rests=counts.rests,
        measures=measure_count(doc),
        seconds=duration_seconds(doc),
        key=key_context(doc),
        longest=max(timed) if timed else None,
        shortest=min(timed) if timed else None,
        highest=max(pitches, key=SpelledPitch.sort_key) if pitches else None,
        lowest=min(pitches, key=SpelledPitch.sort_key) if pitches else None,
        pitches=Counter(pitches),
    )


def _pick(values, fn, key=None):
    present = [v for v in values if v is not None]
    if not present:
        return None
    return fn(present, key=key) if key else fn(present)


def _census_from_stats(stats: Sequence[_FileStats], excluded: Iterable[str] = ()) -> CorpusCensus:
    measures = [s.measures for s in stats]
    n = len(stats)
    mean = statistics.fmean(measures) if n else 0.0
    sd = statistics.pstdev(measures) if n else 0.0
    longest = _pick([s.longest for s in stats], max)
    shortest = _pick([s.shortest for s in stats], min)
    highest = _pick([s.highest for s in stats], max, SpelledPitch.sort_key)
    lowest = _pick([s.lowest for s in stats], min, SpelledPitch.sort_key)
    tally = _tally(s.key for s in stats)
    return CorpusCensus(
        file_count=n,
        notes_incl_ties=sum(s.notes for s in stats),
        onsets=sum(s.onsets for s in stats),
        rests=sum(s.rests for s in stats),
        longest_note=duration_name(longest) if longest is not None else None,
        shortest_note_excl_grace=duration_name(shortest) if shortest is not None else None,
        highest_pitch=str(highest) if highest else None,
        lowest_pitch=str(lowest) if lowest else None,
        total_measures=sum(measures),
        mean_measures=_sig6(mean),
        sd_measures=_sig6(sd),
        longest_theme_measures=max(measures, default=0),
        shortest_theme_measures=min(measures, default=0),
        keyed_files=tally.keyed,
        unkeyed_files=tally.unkeyed,
        major_files=tally.major,
        minor_files=tally.minor,
        excluded_files=tuple(excluded),
    )


def census(corpus: Sequence[HumdrumDocument], excluded: Iterable[str] = ()) -> CorpusCensus:
    """Table-style census over validated documents.

    ``excluded`` names files left out by the caller; it is only recorded.
    Measure SD is the population SD.
    """
    return _census_from_stats([_file_stats(d) for d in corpus], excluded)


def pitch_histogram(corpus: Sequence[HumdrumDocument]) -> Histogram:
    counts: Counter = Counter()
    for doc in corpus:
        counts.update(_file_stats(doc).pitches)
    ordered = sorted(counts, key=SpelledPitch.sort_key)
    bands: list[dict] = []
    for i, p in enumerate(ordered):
        if not bands or bands[-1]["octave"] != p.octave:
            bands.append({"octave": p.octave, "first": i, "last": i})
        else:
            bands[-1]["last"] = i
    bins = tuple((str(p), counts[p]) for p in ordered)
    return Histogram(bins, sum(counts.values()), {"octave_bands": bands})


def chord_type_counts(corpus: Sequence[HumdrumDocument]) -> Counter:
    """Type-key occurrences over non-null **harte tokens; ``N`` is not a chord type."""
    counts: Counter = Counter()
    for doc in corpus:
        cols = [s.index for s in doc.spines if s.exclusive_name == "harte"]
        for _, rec in doc.data_records():
            for c in cols:
                tok = rec.tokens[c]
                if tok == NULL_TOKEN:
                    continue
                chord = parse_harte(tok)
                if not chord.no_chord:
                    counts[chord_type_key(chord)] += 1
    return counts


def chord_type_distribution(corpus: Sequence[HumdrumDocument], top_fraction: float = 1.0) -> Histogram:
    """Descending chord-type bins; the shortest prefix covering ``top_fraction`` of tokens."""
    if not 0 < top_fraction <= 1:
        raise ValueError("top_fraction must be in (0, 1]")
    counts = chord_type_counts(corpus)
    population = sum(counts.values())
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    needed = Fraction(str(top_fraction)) * population
    bins, running = [], 0
    for label, count in ordered:
        if running >= needed and bins:
            break
        bins.append((label, count))
        running += count
    meta = {"population": population, "top_fraction": top_fraction, "counting": "tokens"}
    return Histogram(tuple(bins), running, meta)


def _episode_order(value) -> float:
    if value is None or str(value).strip() == "":
        return math.inf
    text = str(value).strip().upper()
    roman = {"I": 1, "II": 2, "III": 3, "IV": 4, "V": 5, "VI": 6, "VII": 7, "VIII": 8, "IX": 9}
    if text in roman:
        return roman[text]
    try:
        return float(text)
    except ValueError:
        return math.inf


def normalize_trilogy(value) -> str | None:
    if not value:
        return None
    text = str(value).strip().lower()
    for t in TRILOGIES:
        if text.startswith(t.lower()):
            return t
    return None


def _profile(stats: _FileStats, row: Mapping[str, str]) -> FileProfile:
    lowered = {k.lower(): v for k, v in row.items()}
    extra = {k: v for k, v in row.items() if k.lower() not in ("file_id", "trilogy")}
    return FileProfile(
        file_id=stats.file_id,
        note_count=stats.notes,
        onset_count=stats.onsets,
        rest_count=stats.rests,
        measure_count=stats.measures,
        duration_seconds=_sig6(stats.seconds) if stats.seconds is not None else None,
        key=stats.key,
        trilogy=normalize_trilogy(lowered.get("trilogy")),
        extra=extra,
    )


def file_profiles(
    corpus: Sequence[HumdrumDocument], metadata: Mapping[str, Mapping[str, str]] | None = None
) -> list[FileProfile]:
    """One profile per file, grouped Original, Prequel, Sequel, then ungrouped.

    Within a group files follow the metadata ``episode`` column when present,
    then input order.  ``metadata`` maps file_id to a row of text columns.
    """
    metadata = metadata or {}
    profiles = [_profile(_file_stats(d), metadata.get(d.source_name, {})) for d in corpus]
    group = {t: i for i, t in enumerate(TRILOGIES)}

    def order(item):
        i, p = item
        row = {k.lower(): v for k, v in metadata.get(p.file_id, {}).items()}
        return (group.get(p.trilogy, len(TRILOGIES)), _episode_order(row.get("episode")), i)

    return [p for _, p in sorted(enumerate(profiles), key=order)]


def _tally(keys: Iterable[KeyContext | None]) -> KeyTally:
    keyed = unkeyed = major = minor = 0
    for k in keys:
        if k is None:
            unkeyed += 1
            continue
        keyed += 1
        if k.mode == "major":
            major += 1
        else:
            minor += 1
    return KeyTally(keyed, unkeyed, major, minor)


def key_mode_tally(corpus: Sequence[HumdrumDocument]) -> KeyTally:
    return _tally(key_context(d) for d in corpus)


def census_from_profiles_consistent(c: CorpusCensus, profiles: Sequence[FileProfile]) -> bool:
    """True when census totals equal the fold of the per-file profiles."""
    return (
        c.file_count == len(profiles)
        and c.notes_incl_ties == sum(p.note_count for p in profiles)
        and c.onsets == sum(p.onset_count for p in profiles)
        and c.rests == sum(p.rest_count for p in profiles)
        and c.total_measures == sum(p.measure_count for p in profiles)
    )


__all__ = [
    "CorpusCensus",
    "FileProfile",
    "Histogram",
    "KeyTally",
    "census",
    "chord_type_distribution",
    "file_profiles",
    "key_mode_tally",
    "pitch_histogram",
]
