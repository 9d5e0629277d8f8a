"""Parsing, validation and census statistics for humdrum thematic corpora."""

__version__ = "0.1.0"

from .analytics import (  # noqa: E402
    CorpusCensus,
    FileProfile,
    Histogram,
    census,
    chord_type_distribution,
    file_profiles,
    key_mode_tally,
    pitch_histogram,
)
from .annotations import build_timeline, key_context, parse_cadence_token, parse_harm_token, resolve_pedals  # noqa: E402
from .harte import HarteChord, chord_type_key, interval_set, parse_harte, pitch_class_set, render_harte  # noqa: E402
from .humdrum import HumdrumDocument, events_of, parse_document, reference_metadata, serialize  # noqa: E402
from .kern import KernEvent, count_notes_and_onsets, event_seconds, parse_kern_token  # noqa: E402
from .validation import ValidationProfile, validate  # noqa: E402

__all__ = [
    "CorpusCensus",
    "FileProfile",
    "HarteChord",
    "Histogram",
    "HumdrumDocument",
    "KernEvent",
    "ValidationProfile",
    "build_timeline",
    "census",
    "chord_type_distribution",
    "chord_type_key",
    "count_notes_and_onsets",
    "event_seconds",
    "events_of",
    "file_profiles",
    "interval_set",
    "key_context",
    "key_mode_tally",
    "parse_cadence_token",
    "parse_document",
    "parse_harm_token",
    "parse_harte",
    "parse_kern_token",
    "pitch_class_set",
    "pitch_histogram",
    "reference_metadata",
    "render_harte",
    "resolve_pedals",
    "serialize",
    "validate",
]
