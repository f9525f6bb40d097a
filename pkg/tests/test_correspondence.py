import numpy as np
import pytest
from hypothesis import given, strategies as st

from argmine.corpus import AnnotationSpan, build_document
from argmine.correspondence import (
    CorrespondenceError,
    collapse_to_words,
    corpus_correspondence,
    cross_tabulate,
    format_side_by_side,
    words_to_spans,
)
from argmine.schemes import AAE_COMPONENT, ARROW, PERSUADE, SchemeId


def arrow_doc(text, tags, doc_id="d"):
    doc = build_document(doc_id, text, scheme=SchemeId.ARROW)
    return doc.with_spans([AnnotationSpan(f"s{k}", t, "sentence", k, k + 1)
                           for k, t in enumerate(tags) if t != "None"])


def test_sentence_tag_copied_to_words():
    doc = arrow_doc("we should ban cars now.", ["E1"])
    assert collapse_to_words(doc, ARROW) == ["E1"] * 5


def test_untagged_words_are_none():
    doc = arrow_doc("we ban. cars now.", ["T", "None"])
    assert collapse_to_words(doc, ARROW) == ["T", "T", "None", "None"]


def test_char_span_takes_first_character_owner():
    doc = build_document("d", "alpha beta gamma", scheme=SchemeId.AAE_COMPONENT)
    doc = doc.with_spans([AnnotationSpan("x", "Cl", "char-range", 0, 7),
                          AnnotationSpan("y", "Pr", "char-range", 7, 16)])
    assert collapse_to_words(doc, SchemeId.AAE_COMPONENT) == ["Cl", "Cl", "Pr"]


def test_identity_matrix():
    tags = ["L", "P", "P", "None", "E", "E"]
    m = cross_tabulate(tags, tags, PERSUADE, PERSUADE)
    cells = m.cells
    for i, r in enumerate(m.rows):
        if m.row_support[i]:
            assert cells[i, i] == 100.0
        else:
            assert np.isnan(cells[i]).all()


def test_half_split_row():
    human = ["E1"] * 10
    synth = ["E"] * 5 + ["C1"] * 5
    m = cross_tabulate(human, synth, ARROW, PERSUADE)
    assert m.cell("E1", "E") == 50.0 and m.cell("E1", "C1") == 50.0
    assert m.row_marginals[m.rows.index("E1")] == 100.0


@given(st.lists(st.tuples(st.sampled_from(ARROW.labels), st.sampled_from(PERSUADE.labels)), min_size=1))
def test_rows_sum_to_one_hundred(pairs):
    human, synth = zip(*pairs)
    m = cross_tabulate(human, synth, ARROW, PERSUADE)
    sums = np.nansum(m.cells, axis=1)
    for i in range(len(m.rows)):
        if m.row_support[i]:
            assert sums[i] == pytest.approx(100.0)
    assert m.col_marginals.sum() == pytest.approx(100.0)


@given(st.lists(st.sampled_from(ARROW.labels), max_size=40))
def test_collapse_is_idempotent(tags):
    text = " ".join(f"w{i}" for i in range(len(tags))) or ""
    doc = build_document("d", text, scheme=SchemeId.ARROW)
    doc = doc.with_spans(words_to_spans(tags))
    once = collapse_to_words(doc, ARROW)
    assert once == list(tags)
    assert collapse_to_words(doc.with_spans(words_to_spans(once)), ARROW) == once


def test_corpus_matrix_requires_matching_documents():
    a = arrow_doc("one two.", ["T"], "a")
    b = build_document("a", "one two.", scheme=SchemeId.PERSUADE)
    b = b.with_spans([AnnotationSpan("x", "L", "word-range", 0, 2)])
    m = corpus_correspondence([a], [b], ARROW, PERSUADE)
    assert m.cell("T", "L") == 100.0 and m.total == 2
    with pytest.raises(CorrespondenceError):
        corpus_correspondence([a], [], ARROW, PERSUADE)
    with pytest.raises(CorrespondenceError):
        cross_tabulate(["T"], [], ARROW, PERSUADE)


def test_side_by_side_layout_and_export():
    human = ["E1", "E1", "T", "None"]
    m1 = cross_tabulate(human, ["E", "E", "L", "None"], ARROW, PERSUADE)
    m2 = cross_tabulate(human, ["Pr", "Cl", "None", "None"], ARROW, AAE_COMPONENT)
    text = format_side_by_side({"PERSUADE": m1, "AAE": m2})
    lines = text.splitlines()
    assert "PERSUADE" in lines[0] and "AAE" in lines[0]
    assert lines[-1].startswith("%") and len(lines) == 2 + len(ARROW.labels) + 1
    assert "|" in lines[1]
    csv_lines = m1.to_delimited().splitlines()
    assert csv_lines[0].split(",")[0] == "human" and csv_lines[0].endswith("%")
    assert len(csv_lines) == len(m1.rows) + 2
