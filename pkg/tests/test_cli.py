import csv
import io
import json
import shutil
import xml.etree.ElementTree as ET

import pytest

from conftest import EXCERPT, MINI
from swtc import cli
from swtc.analytics import CorpusCensus, census
from swtc.corpus import CorpusInvalid, NoFilesFound, fingerprint, ingest, load_corpus
from swtc.report import ReportEnvelope, UnsupportedFormat, emit, to_csv, to_json, to_svg

SVG_NS = "{http://www.w3.org/2000/svg}"


@pytest.fixture
def corpus(tmp_path):
    root = tmp_path / "corpus"
    shutil.copytree(MINI, root)
    return root


def _run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_ingest_sorted_and_skips_decoys(corpus):
    (corpus / "README.txt").write_text("not humdrum")
    (corpus / "Sequel" / "notes.csv").write_text("a,b\n")
    manifest = ingest(corpus)
    assert [e.file_id for e in manifest.files] == ["main_theme", "duel", "rey"]
    assert [e.trilogy for e in manifest.files] == ["Original", "Prequel", "Sequel"]
    assert {p.name for p in manifest.skipped} == {"README.txt", "notes.csv"}


def test_ingest_empty_dir(tmp_path):
    with pytest.raises(NoFilesFound):
        ingest(tmp_path)


def test_duplicate_stems_are_renamed(corpus):
    shutil.copy(corpus / "Sequel" / "rey.krn", corpus / "Original" / "rey.krm")
    manifest = ingest(corpus)
    assert sorted(e.file_id for e in manifest.files) == ["duel", "main_theme", "rey", "rey-2"]
    assert len(manifest.warnings) == 1


def test_fingerprint_tracks_content(corpus):
    before = fingerprint(ingest(corpus))
    assert before == fingerprint(ingest(corpus))
    with open(corpus / "Sequel" / "rey.krn", "a") as fh:
        fh.write("!! trailing comment\n")
    assert fingerprint(ingest(corpus)) != before


def test_invalid_file_aborts_or_is_skipped(corpus):
    (corpus / "Sequel" / "broken.krn").write_text("**kern\t**harte\n4c\tH:maj\n*-\t*-\n")
    with pytest.raises(CorpusInvalid):
        load_corpus(ingest(corpus))
    loaded = load_corpus(ingest(corpus), skip_invalid=True)
    assert loaded.excluded == ["broken"]
    assert census(loaded.documents).file_count == 3


def test_cli_census_json_roundtrip(capsys, corpus):
    code, out, _ = _run(capsys, "census", corpus, "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "census" and doc["generated_at"] is None
    assert len(doc["corpus_fingerprint"]) == 64
    c = CorpusCensus.from_dict(doc["payload"])
    assert (c.file_count, c.notes_incl_ties, c.total_measures) == (3, 24, 7)


def test_cli_census_from_env(capsys, corpus, monkeypatch):
    monkeypatch.setenv("SWTC_CORPUS", str(corpus))
    code, out, _ = _run(capsys, "census")
    assert code == 0 and json.loads(out)["payload"]["file_count"] == 3


def test_cli_timestamp_from_source_date_epoch(capsys, corpus, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    _, out, _ = _run(capsys, "census", corpus)
    assert json.loads(out)["generated_at"] == "1970-01-01T00:00:00Z"


def test_cli_csv_outputs(capsys, corpus, tmp_path):
    code, out, _ = _run(capsys, "pitch-hist", corpus, "--csv")
    assert code == 0
    assert out.startswith("label,count\r\n")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert sum(int(r["count"]) for r in rows) == 24
    target = tmp_path / "census.csv"
    assert _run(capsys, "census", corpus, "--csv", "-o", target)[0] == 0
    (row,) = csv.DictReader(io.StringIO(target.read_text()))
    assert row["notes_incl_ties"] == "24" and row["excluded_files"] == ""


def test_cli_profiles_with_metadata(capsys, corpus, tmp_path):
    meta = tmp_path / "meta.csv"
    meta.write_text("file_id,episode,composer note\nduel,1,\"fast, loud\"\nmain_theme,4,x\n")
    code, out, _ = _run(capsys, "profiles", corpus, "--metadata", meta)
    assert code == 0
    rows = json.loads(out)["payload"]
    assert [r["file_id"] for r in rows] == ["main_theme", "duel", "rey"]
    assert rows[1]["composer note"] == "fast, loud" and rows[1]["episode"] == "1"


def test_cli_svg_outputs(capsys, corpus, tmp_path):
    for cmd in ("pitch-hist", "chord-dist", "profiles"):
        target = tmp_path / f"{cmd}.svg"
        code, out, _ = _run(capsys, cmd, corpus, "--svg", target)
        assert code == 0 and out == ""
        root = ET.fromstring(target.read_text())
        assert root.tag == SVG_NS + "svg"
        assert (root.get("width"), root.get("height")) == ("960", "540")


def test_empty_histogram_svg_is_valid():
    svg = to_svg(ReportEnvelope("pitch-histogram", {"bins": [], "total": 0, "meta": {}}))
    assert ET.fromstring(svg).tag == SVG_NS + "svg"


def test_unsupported_formats():
    with pytest.raises(UnsupportedFormat):
        to_svg(ReportEnvelope("census", {}))
    with pytest.raises(UnsupportedFormat):
        emit(ReportEnvelope("census", {}), "xml", io.StringIO())
    with pytest.raises(UnsupportedFormat):
        to_csv(ReportEnvelope("harte", {}))


def test_json_reals_are_six_significant_digits():
    text = to_json(ReportEnvelope("census", {"x": 2 / 3, "y": 1e-9}))
    payload = json.loads(text)["payload"]
    assert payload == {"x": 0.666667, "y": 1e-9}
    assert text.endswith("}\n")


def test_atomic_write_leaves_no_partial_file(tmp_path, monkeypatch):
    target = tmp_path / "out.json"
    target.write_text("old")

    def boom(*a, **k):
        raise OSError("disk full")

    monkeypatch.setattr("swtc.report.os.replace", boom)
    with pytest.raises(OSError):
        emit(ReportEnvelope("census", {}), "json", target)
    assert target.read_text() == "old"
    assert [p.name for p in tmp_path.iterdir()] == ["out.json"]


def test_cli_exit_codes(capsys, corpus, tmp_path):
    assert _run(capsys, "census", tmp_path / "nope")[0] == 3
    empty = tmp_path / "empty"
    empty.mkdir()
    assert _run(capsys, "census", empty)[0] == 3
    assert _run(capsys, "bogus")[0] == 2
    assert _run(capsys, "chord-dist", corpus, "--top", "1.5")[0] == 2
    (corpus / "Sequel" / "broken.krn").write_text("**kern\n4x\n*-\n")
    code, _, err = _run(capsys, "census", corpus)
    assert code == 1
    assert json.loads(err.splitlines()[0])["error"] == "validation"
    code, out, err = _run(capsys, "census", corpus, "--skip-invalid")
    assert code == 0
    assert json.loads(out)["payload"]["excluded_files"] == ["broken"]


def test_cli_missing_corpus_dir_is_usage(capsys, monkeypatch):
    monkeypatch.delenv("SWTC_CORPUS", raising=False)
    code, _, err = _run(capsys, "census")
    assert code == 2 and "SWTC_CORPUS" in err


def test_cli_validate_excerpt(capsys, tmp_path):
    code, out, _ = _run(capsys, "validate", EXCERPT, "--json")
    assert code == 0 and json.loads(out)["payload"] == []
    code, out, _ = _run(capsys, "validate", EXCERPT, "--strict")
    assert code == 0 and "structure.missing-terminator" in out
    bad = tmp_path / "bad.krn"
    bad.write_text(EXCERPT.read_text().replace("4g\tG:min", "4g", 1))
    code, _, err = _run(capsys, "validate", bad)
    assert code == 1 and json.loads(err)["line"] == 15


def test_cli_harte_parse(capsys):
    code, out, _ = _run(capsys, "harte", "parse", "C:maj(*3)")
    assert code == 0
    payload = json.loads(out)["payload"]
    assert payload["pitch_classes"] == [0, 7]
    code, _, err = _run(capsys, "harte", "parse", "G:xyz")
    assert code == 1
    err_obj = json.loads(err)
    assert err_obj["error"] == "UnknownShorthand" and err_obj["offset"] == 2
