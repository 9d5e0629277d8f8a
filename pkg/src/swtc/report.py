"""Report envelope and its JSON, CSV and SVG emitters.

Output is byte-stable: keys are sorted, reals carry six significant digits,
and SVG coordinates are printed with two decimals.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from . import __version__

WIDTH, HEIGHT = 960, 540
_MARGIN = {"left": 70, "right": 70, "top": 50, "bottom": 110}
_BAND_FILLS = ("#eef2f7", "#f9f3e6")
_BAR_FILL = "#4a6fa5"


class UnsupportedFormat(ValueError):
    pass


@dataclass(frozen=True)
class ReportEnvelope:
    kind: str  # census | pitch-histogram | chord-distribution | profiles | validation | harte
    payload: Any
    corpus_fingerprint: str | None = None
    tool_version: str = __version__
    generated_at: str | None = None

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "tool_version": self.tool_version,
            "corpus_fingerprint": self.corpus_fingerprint,
            "generated_at": self.generated_at,
            "payload": self.payload,
        }


def build_timestamp() -> str | None:
    """UTC time from ``SOURCE_DATE_EPOCH``; without it the stamp is omitted to keep output reproducible."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if not epoch:
        return None
    return datetime.fromtimestamp(int(epoch), tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _canonical(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return float(f"{obj:.6g}")
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if hasattr(obj, "as_dict"):
        return _canonical(obj.as_dict())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def to_json(report: ReportEnvelope) -> str:
    return json.dumps(_canonical(report.as_dict()), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _csv_rows(report: ReportEnvelope) -> tuple[list[str], list[dict]]:
    payload = _canonical(report.payload)
    if report.kind == "census":
        row = dict(payload)
        row["excluded_files"] = ";".join(row["excluded_files"])
        return list(row), [row]
    if report.kind in ("pitch-histogram", "chord-distribution"):
        return ["label", "count"], payload["bins"]
    if report.kind in ("profiles", "validation"):
        rows = payload
        header: list[str] = []
        for r in rows:
            header.extend(k for k in r if k not in header)
        return header, rows
    raise UnsupportedFormat(f"no CSV form for {report.kind}")


def to_csv(report: ReportEnvelope) -> str:
    header, rows = _csv_rows(report)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\r\n", extrasaction="ignore")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: ("" if v is None else v) for k, v in r.items()})
    return buf.getvalue()


# ---------------------------------------------------------------- SVG

def _esc(text) -> str:
    return str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def _f(x: float) -> str:
    return f"{x:.2f}"


def _nice_max(value: float) -> float:
    if value <= 0:
        return 1.0
    step = 10 ** (len(str(int(value))) - 1)
    top = step
    while top < value:
        top += step if step >= 1 else 1
    return float(top)


def _frame(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH / 2:.2f}" y="28.00" text-anchor="middle" font-family="sans-serif" font-size="16">{_esc(title)}</text>',
    ]


def _plot_box():
    x0, y0 = _MARGIN["left"], _MARGIN["top"]
    x1, y1 = WIDTH - _MARGIN["right"], HEIGHT - _MARGIN["bottom"]
    return x0, y0, x1, y1


def _y_axis(parts, top: float, x: float, side: str, label: str):
    x0, y0, x1, y1 = _plot_box()
    parts.append(f'<line x1="{_f(x)}" y1="{_f(y0)}" x2="{_f(x)}" y2="{_f(y1)}" stroke="#333"/>')
    anchor, dx = ("end", -6) if side == "left" else ("start", 6)
    for i in range(6):
        v = top * i / 5
        y = y1 - (y1 - y0) * i / 5
        parts.append(f'<line x1="{_f(x - 3)}" y1="{_f(y)}" x2="{_f(x + 3)}" y2="{_f(y)}" stroke="#333"/>')
        text = f"{v:.6g}"
        parts.append(
            f'<text x="{_f(x + dx)}" y="{_f(y + 4)}" text-anchor="{anchor}" font-family="sans-serif" font-size="10">{text}</text>'
        )
    lx = x - 50 if side == "left" else x + 50
    parts.append(
        f'<text x="{_f(lx)}" y="{_f((y0 + y1) / 2)}" text-anchor="middle" font-family="sans-serif" font-size="11" '
        f'transform="rotate(-90 {_f(lx)} {_f((y0 + y1) / 2)})">{_esc(label)}</text>'
    )


def _x_labels(parts, labels, slot):
    x0, _, _, y1 = _plot_box()
    for i, label in enumerate(labels):
        cx = x0 + slot * (i + 0.5)
        parts.append(
            f'<text x="{_f(cx)}" y="{_f(y1 + 12)}" text-anchor="end" font-family="sans-serif" font-size="9" '
            f'transform="rotate(-60 {_f(cx)} {_f(y1 + 12)})">{_esc(label)}</text>'
        )


def histogram_svg(hist: dict, title: str, bands: list | None = None) -> str:
    """Bar chart; ``bands`` are octave groups ``{"octave", "first", "last"}`` shaded alternately."""
    bins = hist["bins"]
    x0, y0, x1, y1 = _plot_box()
    parts = _frame(title)
    n = len(bins)
    slot = (x1 - x0) / n if n else 0
    for j, band in enumerate(bands or []):
        bx = x0 + slot * band["first"]
        bw = slot * (band["last"] - band["first"] + 1)
        parts.append(
            f'<rect x="{_f(bx)}" y="{_f(y0)}" width="{_f(bw)}" height="{_f(y1 - y0)}" fill="{_BAND_FILLS[j % 2]}"/>'
        )
        parts.append(
            f'<text x="{_f(bx + bw / 2)}" y="{_f(HEIGHT - 14)}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="11">C{band["octave"]}-B{band["octave"]}</text>'
        )
    top = _nice_max(max((b["count"] for b in bins), default=0))
    for i, b in enumerate(bins):
        h = (y1 - y0) * b["count"] / top
        parts.append(
            f'<rect x="{_f(x0 + slot * i + slot * 0.1)}" y="{_f(y1 - h)}" width="{_f(slot * 0.8)}" '
            f'height="{_f(h)}" fill="{_BAR_FILL}"><title>{_esc(b["label"])}: {b["count"]}</title></rect>'
        )
    _x_labels(parts, [b["label"] for b in bins], slot)
    _y_axis(parts, top, x0, "left", "count")
    parts.append(f'<line x1="{_f(x0)}" y1="{_f(y1)}" x2="{_f(x1)}" y2="{_f(y1)}" stroke="#333"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def profiles_svg(profiles: list[dict], title: str) -> str:
    """Per-theme chart: an ``x`` for the note count (left axis), a dot for seconds (right axis)."""
    x0, y0, x1, y1 = _plot_box()
    parts = _frame(title)
    n = len(profiles)
    slot = (x1 - x0) / n if n else 0
    notes_top = _nice_max(max((p["note_count"] for p in profiles), default=0))
    secs_top = _nice_max(max((p["duration_seconds"] or 0 for p in profiles), default=0))
    prev = None
    for i, p in enumerate(profiles):
        if prev is not None and p.get("trilogy") != prev:
            gx = x0 + slot * i
            parts.append(
                f'<line x1="{_f(gx)}" y1="{_f(y0)}" x2="{_f(gx)}" y2="{_f(y1)}" stroke="#999" stroke-dasharray="4 3"/>'
            )
        prev = p.get("trilogy")
        cx = x0 + slot * (i + 0.5)
        ny = y1 - (y1 - y0) * p["note_count"] / notes_top
        parts.append(
            f'<path d="M{_f(cx - 4)} {_f(ny - 4)}L{_f(cx + 4)} {_f(ny + 4)}M{_f(cx - 4)} {_f(ny + 4)}L{_f(cx + 4)} {_f(ny - 4)}" '
            f'stroke="#b03a2e" stroke-width="1.5"/>'
        )
        if p["duration_seconds"] is not None:
            sy = y1 - (y1 - y0) * p["duration_seconds"] / secs_top
            parts.append(f'<circle cx="{_f(cx)}" cy="{_f(sy)}" r="3.50" fill="#1f618d"/>')
    _x_labels(parts, [p["file_id"] for p in profiles], slot)
    _y_axis(parts, notes_top, x0, "left", "notes (x)")
    _y_axis(parts, secs_top, x1, "right", "seconds (dot)")
    parts.append(f'<line x1="{_f(x0)}" y1="{_f(y1)}" x2="{_f(x1)}" y2="{_f(y1)}" stroke="#333"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


_TITLES = {
    "pitch-histogram": "Pitch distribution",
    "chord-distribution": "Chord-type distribution",
    "profiles": "Theme length: notes and seconds",
}


def to_svg(report: ReportEnvelope) -> str:
    payload = _canonical(report.payload)
    title = _TITLES.get(report.kind)
    if report.kind == "pitch-histogram":
        return histogram_svg(payload, title, payload["meta"].get("octave_bands"))
    if report.kind == "chord-distribution":
        return histogram_svg(payload, title)
    if report.kind == "profiles":
        return profiles_svg(payload, title)
    raise UnsupportedFormat(f"no SVG form for {report.kind}")


_RENDERERS = {"json": to_json, "csv": to_csv, "svg": to_svg}


def write_atomic(path, data: bytes) -> None:
    """Write via a sibling temp file and rename, so a failure leaves no partial file."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(report: ReportEnvelope, fmt: str, sink) -> int:
    """Render ``report`` as ``fmt`` into ``sink`` (a path or a writable stream); returns bytes written."""
    if fmt not in _RENDERERS:
        raise UnsupportedFormat(f"unknown format {fmt!r}")
    data = _RENDERERS[fmt](report).encode("utf-8")
    if isinstance(sink, (str, os.PathLike)):
        write_atomic(sink, data)
    elif hasattr(sink, "buffer"):
        sink.buffer.write(data)
        sink.flush()
    else:
        try:
            sink.write(data)
        except TypeError:
            sink.write(data.decode("utf-8"))
    return len(data)
