import pytest
from hypothesis import given
from hypothesis import strategies as st

from swtc.humdrum import (
    BARLINE,
    DATA,
    ColumnCountMismatch,
    DuplicateExclusiveRow,
    EmptyInput,
    MissingExclusiveInterpretation,
    UnknownSpine,
    UnsupportedSpineOperation,
    barlines_of,
    events_of,
    parse_document,
    reference_metadata,
    serialize,
)
from swtc.validation import ValidationProfile, validate


def test_excerpt_spines_and_references(excerpt_doc):
    assert excerpt_doc.spine_names == ["kern", "harte", "harm", "altharm", "pedal", "cadence"]
    meta = reference_metadata(excerpt_doc)
    assert meta["COM"] == "John Williams"
    assert meta["OTL"] == "The Imperial March (Darth Vader's Theme)"
    assert meta["ODT"] == "1980"
    assert all(meta[k] for k in ("OCL", "ENC", "ENC2"))


def test_reference_value_keeps_inner_colons(excerpt_doc):
    assert reference_metadata(excerpt_doc)["GAW"] == "Star Wars: Episode V: The Empire Strikes Back"
    assert list(reference_metadata(excerpt_doc)) == ["COM", "OTL", "GAW", "ODT", "OCL", "ENC", "ENC2"]


def test_no_reference_records():
    assert reference_metadata(parse_document("**kern\n4c\n*-\n")) == {}


def test_minimal_file():
    doc = parse_document("**kern\n*-\n")
    assert len(doc.spines) == 1
    assert list(doc.data_records()) == []
    assert doc.warnings == ()


def test_deleted_tab_reports_line(excerpt_text):
    lines = excerpt_text.splitlines()
    target = next(i for i, line in enumerate(lines) if line.startswith("4g\t"))
    lines[target] = lines[target].replace("\t", "", 1)
    with pytest.raises(ColumnCountMismatch) as err:
        parse_document("\n".join(lines))
    assert err.value.line == target + 1
    assert (err.value.expected, err.value.found) == (6, 5)


@pytest.mark.parametrize(
    "text, exc",
    [
        ("", EmptyInput),
        ("\n \n", EmptyInput),
        ("4c\n", MissingExclusiveInterpretation),
        ("!!!COM: x\n", MissingExclusiveInterpretation),
        ("**kern\n**kern\n", DuplicateExclusiveRow),
        ("**kern\t**text\n*^\t*\n", UnsupportedSpineOperation),
        ("**kern\t**text\n*-\t*\n", UnsupportedSpineOperation),
    ],
)
def test_structural_errors(text, exc):
    with pytest.raises(exc):
        parse_document(text)


def test_bom_and_multiple_tabs():
    doc = parse_document("\ufeff**kern\t\t**text\n4c\t\thello\n*-\t*-\n")
    assert doc.spine_names == ["kern", "text"]
    assert serialize(doc) == "**kern\t**text\n4c\thello\n*-\t*-\n"


def test_missing_terminator_is_profile_warning():
    doc = parse_document("**kern\n4c\n")
    assert [w.rule for w in doc.warnings] == ["structure.missing-terminator"]
    assert validate(doc) == []
    strict = validate(doc, ValidationProfile(require_terminator=True))
    assert [(d.severity, d.rule) for d in strict] == [("warning", "structure.missing-terminator")]


def test_unknown_tandem_retained():
    doc = parse_document("**kern\n*Ifoo\n*tb8\n4c\n*-\n")
    assert [t for _, t in doc.spines[0].tandem_interpretations] == ["*Ifoo", "*tb8"]


def test_events_of_harte(excerpt_doc):
    toks = [t for _, t in events_of(excerpt_doc, "harte")]
    assert toks == ["G:min", "E-:min", "G:min", "E-:min", "G:min", "G:min", "E-:min"]


def test_events_of_placeholder_spine(excerpt_doc):
    assert events_of(excerpt_doc, "altharm") == []


def test_events_of_unknown(excerpt_doc):
    with pytest.raises(UnknownSpine):
        events_of(excerpt_doc, "bogus")


def test_barlines_and_record_kinds(excerpt_doc):
    assert [t for _, t in barlines_of(excerpt_doc)] == ["=1-", "=2", "=3"]
    for rec in excerpt_doc.records:
        if rec.kind == BARLINE:
            assert all(t.startswith("=") for t in rec.tokens)


def test_column_count_constant(excerpt_doc):
    for rec in excerpt_doc.records:
        if rec.kind == DATA:
            assert len(rec.tokens) == len(excerpt_doc.spines)


def test_roundtrip_excerpt(excerpt_text, excerpt_doc):
    assert serialize(excerpt_doc) == excerpt_text
    assert serialize(parse_document(serialize(excerpt_doc))) == serialize(excerpt_doc)


def test_local_comments_are_retained():
    doc = parse_document("**kern\t**text\n!\t!note\n4c\tx\n*-\t*-\n")
    assert doc.records[1].kind == "local-comment"
    assert [t for _, t in events_of(doc, "text")] == ["x"]


_kern_tok = st.sampled_from(["4c", "8.e-L", "16b-Jk", "2g", "4r", ".", "[4d", "4d]"])
_harte_tok = st.sampled_from(["G:min", "C:maj", "E-:min", ".", "N", "F:sus4"])


@given(st.lists(st.tuples(_kern_tok, _harte_tok), min_size=1, max_size=30))
def test_roundtrip_grid_property(rows):
    text = "**kern\t**harte\n" + "".join(f"{a}\t{b}\n" for a, b in rows) + "*-\t*-\n"
    doc = parse_document(text)
    assert serialize(doc) == text
    for _, tok in events_of(doc, "kern") + events_of(doc, "harte"):
        assert tok != "." and not tok.startswith("=")
