"""Brute-force census of a humdrum directory, written without the swtc package.

Used only as a test oracle.  It deliberately re-derives every rule from raw
text with its own tables so that it cannot share a bug with the library.
"""

import re
import statistics
from collections import Counter
from fractions import Fraction
from pathlib import Path

STEP = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}
NAMES = {
    Fraction(3, 2): "Dotted whole note",
    Fraction(1): "Whole note",
    Fraction(3, 4): "Dotted half note",
    Fraction(1, 2): "Half note",
    Fraction(3, 8): "Dotted quarter note",
    Fraction(1, 4): "Quarter note",
    Fraction(3, 16): "Dotted eighth note",
    Fraction(1, 8): "Eighth note",
    Fraction(1, 16): "16th note",
    Fraction(1, 32): "32nd note",
    Fraction(1, 64): "64th note",
}
TOKEN = re.compile(r"^(\[?)(\d*)(\.*)([a-gA-G]+|r)([#-]*)")


def grid(path):
    rows = []
    for line in Path(path).read_text().splitlines():
        if not line or line.startswith("!!"):
            continue
        rows.append(line.split("\t"))
    return rows


def pitch(letters, acc):
    n = len(letters)
    octave = 3 + n if letters[0].islower() else 4 - n
    shift = acc.count("#") - acc.count("-")
    midi = 12 * (octave + 1) + STEP[letters[0].upper()] + shift
    name = letters[0].upper() + ("#" * shift if shift > 0 else "b" * -shift) + str(octave)
    return midi, name


def file_census(path):
    rows = grid(path)
    header = rows[0]
    kcol = header.index("**kern")
    notes = onsets = rests = measures = 0
    durations, pitches = [], []
    keys = []
    seen_data = False
    first_bar = True
    chords = Counter()
    hcol = header.index("**harte") if "**harte" in header else None
    for row in rows[1:]:
        tok = row[kcol]
        if tok.startswith("="):
            if re.match(r"^=+\d", tok) or (first_bar and not seen_data):
                measures += 1
            first_bar = False
            continue
        if tok.startswith("*"):
            m = re.match(r"^\*([A-Ga-g])[#-]*:$", tok)
            if m:
                keys.append("major" if m.group(1).isupper() else "minor")
            continue
        if tok.startswith("!") or tok == ".":
            continue
        seen_data = True
        if hcol is not None and row[hcol] not in (".", "N"):
            chords[row[hcol]] += 1
        grace = "q" in tok
        m = TOKEN.match(tok.replace("q", ""))
        if m.group(4) == "r":
            rests += 1
            continue
        notes += 1
        if not ("_" in tok or "]" in tok):
            onsets += 1
        pitches.append(pitch(m.group(4), m.group(5)))
        if not grace:
            d = Fraction(1, int(m.group(2)))
            if m.group(3):
                d *= Fraction(3, 2)
            durations.append(d)
    return {
        "notes": notes,
        "onsets": onsets,
        "rests": rests,
        "measures": measures,
        "durations": durations,
        "pitches": pitches,
        "mode": keys[0] if keys else None,
        "chords": chords,
    }


def corpus_census(root):
    files = sorted(p for p in Path(root).rglob("*") if p.suffix in (".krn", ".krm"))
    per = [file_census(f) for f in files]
    measures = [f["measures"] for f in per]
    all_durs = [d for f in per for d in f["durations"]]
    all_pitches = [p for f in per for p in f["pitches"]]
    modes = [f["mode"] for f in per]
    return {
        "file_count": len(per),
        "notes_incl_ties": sum(f["notes"] for f in per),
        "onsets": sum(f["onsets"] for f in per),
        "rests": sum(f["rests"] for f in per),
        "total_measures": sum(measures),
        "mean_measures": statistics.fmean(measures),
        "sd_measures": statistics.pstdev(measures),
        "longest_theme_measures": max(measures),
        "shortest_theme_measures": min(measures),
        "longest_note": NAMES[max(all_durs)],
        "shortest_note_excl_grace": NAMES[min(all_durs)],
        "highest_pitch": max(all_pitches)[1],
        "lowest_pitch": min(all_pitches)[1],
        "keyed_files": sum(m is not None for m in modes),
        "unkeyed_files": sum(m is None for m in modes),
        "major_files": modes.count("major"),
        "minor_files": modes.count("minor"),
        "pitch_counts": Counter(name for _, name in all_pitches),
        "harte_tokens": sum(sum(f["chords"].values()) for f in per),
    }
