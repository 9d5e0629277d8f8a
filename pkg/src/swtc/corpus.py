"""Corpus ingestion: find humdrum files under a directory and parse them."""

from __future__ import annotations

import csv
import hashlib
import logging
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .analytics import normalize_trilogy
from .humdrum import HUMDRUM_SUFFIXES, Diagnostic, HumdrumDocument, HumdrumError, parse_document
from .validation import DEFAULT_PROFILE, ValidationProfile, has_errors, validate

log = logging.getLogger(__name__)

_TRILOGY_DIR = re.compile(r"^(original|prequel|sequel)(?![a-z])", re.IGNORECASE)


class CorpusError(Exception):
    pass


class NoFilesFound(CorpusError):
    pass


class CorpusInvalid(CorpusError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        names = sorted({d.source for d in diagnostics if d.severity == "error"})
        super().__init__(f"{len(names)} file(s) failed validation: {', '.join(names)}")


class CorpusIOError(CorpusError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(d.message for d in diagnostics))


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    file_id: str
    trilogy: str | None = None


@dataclass(frozen=True)
class CorpusManifest:
    root_path: Path
    files: tuple[ManifestEntry, ...]
    metadata_rows: dict = field(default_factory=dict, compare=False)
    skipped: tuple[Path, ...] = ()
    warnings: tuple[str, ...] = ()

    def rows(self) -> dict[str, dict[str, str]]:
        """Metadata rows per file_id with directory-derived trilogy filled in."""
        out = {}
        for e in self.files:
            row = dict(self.metadata_rows.get(e.file_id, {}))
            if e.trilogy and not any(k.lower() == "trilogy" for k in row):
                row["trilogy"] = e.trilogy
            out[e.file_id] = row
        return out


def read_metadata_csv(path) -> dict[str, dict[str, str]]:
    """Rows keyed by the ``file_id`` column; other columns are carried opaquely."""
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "file_id" not in reader.fieldnames:
            raise CorpusError(f"{path}: metadata CSV needs a 'file_id' column")
        return {row["file_id"]: {k: (v or "") for k, v in row.items()} for row in reader}


def _trilogy_from_path(rel: Path) -> str | None:
    for part in rel.parts[:-1]:
        if _TRILOGY_DIR.match(part):
            return normalize_trilogy(part)
    return None


def ingest(root, metadata_path=None) -> CorpusManifest:
    """Collect ``.krn``/``.krm`` files below ``root`` in sorted path order.

    Trilogy comes from a directory named Original/Prequel/Sequel, else from
    the metadata table.  Duplicate stems get a ``-2``, ``-3``... suffix.
    """
    root = Path(root)
    if not root.is_dir():
        raise CorpusIOError([Diagnostic("error", "io.not-a-directory", f"{root} is not a directory")])
    metadata = read_metadata_csv(metadata_path) if metadata_path else {}

    entries, skipped, warnings = [], [], []
    used: dict[str, int] = {}
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        rel = path.relative_to(root)
        if path.suffix.lower() not in HUMDRUM_SUFFIXES:
            skipped.append(rel)
            continue
        file_id = path.stem
        if file_id in used:
            used[file_id] += 1
            new_id = f"{file_id}-{used[file_id]}"
            warnings.append(f"file id {file_id!r} repeated; {rel} renamed to {new_id!r}")
            file_id = new_id
        else:
            used[file_id] = 1
        trilogy = _trilogy_from_path(rel) or normalize_trilogy(
            next((v for k, v in metadata.get(file_id, {}).items() if k.lower() == "trilogy"), None)
        )
        entries.append(ManifestEntry(path, file_id, trilogy))

    if not entries:
        raise NoFilesFound(f"no .krn/.krm files under {root}")
    for w in warnings:
        log.warning(w)
    return CorpusManifest(root, tuple(entries), metadata, tuple(skipped), tuple(warnings))


def fingerprint(manifest: CorpusManifest) -> str:
    """SHA-256 over every ingested file's relative path and bytes."""
    h = hashlib.sha256()
    for e in manifest.files:
        h.update(e.path.relative_to(manifest.root_path).as_posix().encode())
        h.update(b"\0")
        h.update(e.path.read_bytes())
        h.update(b"\0")
    return h.hexdigest()


def _load_one(path: Path, file_id: str, profile: ValidationProfile):
    try:
        text = path.read_bytes().decode("utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        return None, [Diagnostic("error", "io.unreadable", str(exc), source=file_id)], True
    try:
        doc = parse_document(text, file_id)
    except HumdrumError as exc:
        rule = "structure." + re.sub(r"(?<!^)(?=[A-Z])", "-", type(exc).__name__).lower()
        return None, [Diagnostic("error", rule, str(exc), exc.line, source=file_id)], False
    return doc, validate(doc, profile), False


@dataclass
class LoadedCorpus:
    documents: list[HumdrumDocument]
    diagnostics: list[Diagnostic]
    excluded: list[str]


def load_corpus(
    manifest: CorpusManifest,
    profile: ValidationProfile = DEFAULT_PROFILE,
    skip_invalid: bool = False,
    jobs: int = 1,
) -> LoadedCorpus:
    """Parse and validate every manifest file.

    Files with error diagnostics abort the load (:class:`CorpusInvalid`)
    unless ``skip_invalid`` is set, in which case they are listed in
    ``excluded``.  Unreadable files always raise :class:`CorpusIOError`.
    Output order follows the manifest whatever ``jobs`` is.
    """
    args = [(e.path, e.file_id, profile) for e in manifest.files]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_load_one, *zip(*args)))
    else:
        results = [_load_one(*a) for a in args]

    docs, diagnostics, excluded, io_errors = [], [], [], []
    for (doc, diags, io_failed), entry in zip(results, manifest.files):
        diagnostics.extend(diags)
        if io_failed:
            io_errors.extend(diags)
        elif doc is None or has_errors(diags):
            excluded.append(entry.file_id)
        else:
            docs.append(doc)
    if io_errors:
        raise CorpusIOError(io_errors)
    if excluded and not skip_invalid:
        raise CorpusInvalid(diagnostics)
    return LoadedCorpus(docs, diagnostics, excluded)
