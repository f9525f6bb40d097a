import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from argmine.corpus import (
    AnnotatedDocument,
    AnnotationSpan,
    ConsistencyError,
    CorpusError,
    ParseError,
    SpanRangeError,
    build_document,
    char_span_word_owner,
    corpus_stats,
    format_stats,
    parse_brat_essay,
    parse_html_essay,
    parse_persuade_table,
    read_brat_dir,
    read_corpus,
    relation_candidates,
    sentence_tags,
    split_sentences,
    word_tags,
    write_corpus,
)
from argmine.schemes import PERSUADE, SchemeId

from conftest import random_aae_doc, random_text
from oracles import count_brat_directory


def _texts(text, ranges):
    return [text[s:e] for s, e in ranges]


@pytest.mark.parametrize("para,expected", [
    ("I agree. Why? Because!", ["I agree.", "Why?", "Because!"]),
    ("one long run-on with no punctuation", ["one long run-on with no punctuation"]),
    ('He said "Stop." Then left.', ['He said "Stop."', "Then left."]),
    ("Dr. Smith came. He sat.", ["Dr. Smith came.", "He sat."]),
    ("Wait... what?! Fine", ["Wait...", "what?!", "Fine"]),
    ("It costs 3.5 dollars. Ok.", ["It costs 3.5 dollars.", "Ok."]),
    ("(See the end.) Next one.", ["(See the end.)", "Next one."]),
    ("", []),
    ("   ", []),
])
def test_split_sentences(para, expected):
    assert _texts(para, split_sentences(para)) == expected


@given(st.text(alphabet="ab .!?\"')\n", max_size=60))
def test_sentences_partition_non_whitespace(para):
    ranges = split_sentences(para)
    covered = set()
    for s, e in ranges:
        assert s < e and not para[s].isspace() and not para[e - 1].isspace()
        covered.update(range(s, e))
    assert all(i in covered for i, ch in enumerate(para) if not ch.isspace())
    assert all(a[1] <= b[0] for a, b in zip(ranges, ranges[1:]))


@settings(max_examples=50)
@given(st.integers(0, 10_000))
def test_document_invariants(seed):
    rng = np.random.default_rng(seed)
    doc = build_document("d", random_text(rng))
    paras, sents, words = doc.paragraphs, doc.sentences, doc.words
    assert all(a[1] <= b[0] for a, b in zip(paras, paras[1:]))
    non_ws = {i for i, ch in enumerate(doc.text) if not ch.isspace()}
    assert non_ws == {i for s, e in paras for i in range(s, e) if not doc.text[i].isspace()}
    for s, e in sents:
        assert sum(1 for ps, pe in paras if ps <= s and e <= pe) == 1
    for s, e in words:
        assert not any(ch.isspace() for ch in doc.text[s:e])
    assert all(a[1] < b[0] for a, b in zip(words, words[1:]))


def test_brat_single_major_claim():
    doc = parse_brat_essay("We should ban X. Because Y.", "T1\tMajorClaim 0 16\tWe should ban X.")
    assert [(s.tag, s.start, s.end) for s in doc.spans] == [("MC", 0, 16)]
    assert doc.relations == []


def test_brat_empty_annotations():
    doc = parse_brat_essay("Some text.", "")
    assert doc.spans == [] and doc.relations == []


def test_brat_relations_and_stance():
    txt = "Title\n\nA is true. B holds. C fails.\n"
    ann = ("T1\tClaim 7 16\tA is true\nT2\tPremise 18 25\tB holds\nT3\tPremise 27 34\tC fails\n"
           "R1\tsupports Arg1:T2 Arg2:T1\t\nR2\tattacks Arg1:T3 Arg2:T1\t\nA1\tStance T1 Against\n")
    doc = parse_brat_essay(txt, ann)
    linked = [(r.source, r.target, r.stance) for r in doc.relations if r.linked]
    assert linked == [("T2", "T1", "support"), ("T3", "T1", "attack")]
    claim = [r for r in doc.relations if not r.linked]
    assert len(claim) == 1 and claim[0].target is None and claim[0].stance == "attack"


def test_brat_malformed_line_reports_line_number():
    with pytest.raises(ParseError) as info:
        parse_brat_essay("abc", "T1\tClaim 0 3\tabc\nX9 garbage\n")
    assert info.value.line == 2


def test_brat_out_of_range():
    with pytest.raises(SpanRangeError):
        parse_brat_essay("short", "T1\tClaim 0 40\tshort")


def test_brat_crlf_offsets_survive():
    txt = "Title\r\n\r\nWe agree here.\r\n"
    doc = parse_brat_essay(txt, "T1\tClaim 9 22\tWe agree here")
    assert doc.text[doc.spans[0].start:doc.spans[0].end] == "We agree here"


def test_brat_snippet_mismatch_is_a_warning():
    doc = parse_brat_essay("hello world", "T1\tClaim 0 5\tHELLO")
    assert doc.warnings


def test_fixture_counts_match_independent_oracle(aae_dir):
    docs = read_brat_dir(aae_dir)
    oracle = count_brat_directory(aae_dir)
    for split in ("train", "test"):
        report = corpus_stats([d for d in docs if d.meta["split"] == split])
        got = {**report.counts, **report.components, **report.relations, **report.stances}
        assert got == dict(oracle[split])


def test_relation_candidates_count(rng):
    for _ in range(30):
        doc = random_aae_doc(rng)
        per_para = {}
        for s in doc.spans:
            p = next(i for i, (a, b) in enumerate(doc.paragraphs) if a <= s.start < b)
            per_para[p] = per_para.get(p, 0) + 1
        assert len(relation_candidates(doc)) == sum(n * (n - 1) for n in per_para.values())


PERSUADE_CSV = """essay_id_comp,discourse_id,discourse_start,discourse_end,discourse_type,predictionstring,competition_set,prompt_name,full_text
E1,1,0,12,Lead,0 1 2,train,Cars,"Cars are bad. I think so. Walk more."
E1,2,14,24,Position,3 4 5,train,Cars,"Cars are bad. I think so. Walk more."
E2,3,0,4,Claim,0,test,Phones,"Yes no maybe"
"""


def test_persuade_table():
    docs = parse_persuade_table(PERSUADE_CSV)
    assert [d.doc_id for d in docs] == ["E1", "E2"]
    e1 = docs[0]
    assert [(s.tag, s.start, s.end, s.unit) for s in e1.spans] == [("L", 0, 3, "word-range"), ("P", 3, 6, "word-range")]
    assert word_tags(e1, PERSUADE) == ["L"] * 3 + ["P"] * 3 + ["None"] * 2
    assert e1.meta == {"split": "train", "prompt": "Cars"}


def test_persuade_lead_of_45_words():
    text = " ".join(f"w{i}" for i in range(60))
    end = len(" ".join(f"w{i}" for i in range(45)))
    row = f'E,1,0,{end},Lead,{" ".join(map(str, range(45)))},"{text}"'
    docs = parse_persuade_table("essay_id,discourse_id,discourse_start,discourse_end,discourse_type,"
                                "predictionstring,full_text\n" + row + "\n")
    (span,) = docs[0].spans
    assert span.tag == "L" and span.end - span.start == 45


def test_persuade_inconsistent_offsets():
    bad = PERSUADE_CSV.replace("E1,2,14,24", "E1,2,0,5")
    with pytest.raises(ConsistencyError, match="row 3"):
        parse_persuade_table(bad)
    docs = parse_persuade_table(bad, strict=False)
    assert any("row 3" in w for w in docs[0].warnings)


def test_persuade_untagged_document_is_none():
    csv_text = PERSUADE_CSV.splitlines()[0] + "\nE9,1,0,0,Lead,,train,P,\"a b c\"\n"
    (doc,) = parse_persuade_table(csv_text)
    assert word_tags(doc, PERSUADE) == ["None"] * 3


def test_persuade_texts_from_mapping():
    table = "id,discourse_start,discourse_end,discourse_type,predictionstring\nX,0,3,Claim,0\n"
    (doc,) = parse_persuade_table(table, texts={"X": "abc def"})
    assert doc.text == "abc def"
    with pytest.raises(CorpusError):
        parse_persuade_table(table)


def test_html_paragraphs_and_sentences():
    doc = parse_html_essay("<p>A. B.</p><p>C.</p>")
    assert len(doc.paragraphs) == 2
    assert [doc.sentence_text(k) for k in range(len(doc.sentences))] == ["A.", "B.", "C."]


def test_html_inline_markup_stripped():
    assert parse_html_essay("<p><b>A</b>. B.</p>").text == "A. B."


def test_html_unterminated_final_sentence():
    doc = parse_html_essay("<p>First one. and then no end</p>")
    assert [doc.sentence_text(k) for k in range(2)] == ["First one.", "and then no end"]


def test_html_without_paragraphs_falls_back():
    doc = parse_html_essay("Just text. More.")
    assert len(doc.paragraphs) == 1 and doc.warnings


def test_html_data_tags_become_sentence_spans():
    doc = parse_html_essay('<p><span data-tag="I2">I think so.</span> <span data-tag="E1" '
                           'data-rater="human-2">For example this.</span></p>')
    assert [(s.tag, s.start, s.rater) for s in doc.spans] == [("I2", 0, "human-1"), ("E1", 1, "human-2")]


def test_sentence_tags_pair_resolution():
    doc = build_document("d", "One. Two.")
    doc.spans += [AnnotationSpan("a", "E1", "sentence", 0, 1, rater="human-1"),
                  AnnotationSpan("b", "I2", "sentence", 0, 1, rater="human-2"),
                  AnnotationSpan("c", "T", "sentence", 1, 2, rater="human-2")]
    assert sentence_tags(doc) == ["I2", "T"]
    assert sentence_tags(doc, rater="human-1") == ["E1", "None"]


def test_char_span_projection_rules():
    doc = build_document("d", "alpha beta gamma", scheme=SchemeId.AAE_COMPONENT)
    spans = [AnnotationSpan("x", "Cl", "char-range", 0, 7), AnnotationSpan("y", "Pr", "char-range", 7, 16)]
    assert char_span_word_owner(doc, spans, "majority") == [0, 1, 1]
    assert char_span_word_owner(doc, spans, "first-char") == [0, 0, 1]


def test_stats_empty_and_mixed():
    assert corpus_stats([]).total == 0
    a = build_document("a", "x.")
    b = build_document("b", "y.", scheme=SchemeId.PERSUADE)
    with pytest.raises(CorpusError):
        corpus_stats([a, b])


def test_format_stats_layout(aae_docs):
    text = format_stats(corpus_stats(aae_docs))
    assert "B" in text and "Linked" in text and "Total" in text


def test_canonical_round_trip_is_byte_identical(tmp_path, aae_docs):
    write_corpus(aae_docs, tmp_path / "a")
    back = read_corpus(tmp_path / "a")
    assert [d.to_dict() for d in back] == [d.to_dict() for d in aae_docs]
    write_corpus(back, tmp_path / "b")
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_document_dumps_loads(aae_docs):
    d = aae_docs[0]
    assert AnnotatedDocument.loads(d.dumps()).to_dict() == d.to_dict()
