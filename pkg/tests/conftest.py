import pathlib

import numpy as np
import pytest

from argmine.corpus import AnnotationSpan, build_document, read_brat_dir
from argmine.schemes import ARROW, SchemeId

FIXTURE_DIR = pathlib.Path(__file__).resolve().parents[1] / "src" / "argmine" / "data" / "aae_fixture"

WORDS = ("we", "should", "ban", "cars", "because", "air", "is", "dirty", "and", "kids",
         "walk", "to", "school", "every", "day", "the", "city", "grows", "fast", "yes")


@pytest.fixture(scope="session")
def aae_dir():
    return FIXTURE_DIR


@pytest.fixture
def aae_docs():
    return read_brat_dir(FIXTURE_DIR)


def random_text(rng, paragraphs=(1, 4), sentences=(1, 4), words=(1, 8)):
    paras = []
    for _ in range(rng.integers(*paragraphs, endpoint=True)):
        sents = []
        for _ in range(rng.integers(*sentences, endpoint=True)):
            n = rng.integers(*words, endpoint=True)
            sents.append(" ".join(WORDS[i] for i in rng.integers(0, len(WORDS), n)) + rng.choice([".", "!", "?"]))
        paras.append(" ".join(sents))
    return "\n".join(paras)


def random_arrow_doc(rng, doc_id="doc"):
    doc = build_document(doc_id, random_text(rng), scheme=SchemeId.ARROW)
    spans = []
    for k in range(len(doc.sentences)):
        tag = ARROW.labels[rng.integers(len(ARROW.labels))]
        if tag != "None":
            spans.append(AnnotationSpan(f"S{k}", tag, "sentence", k, k + 1))
    return doc.with_spans(spans)


def random_aae_doc(rng, doc_id="doc"):
    """Random paragraphs with disjoint word-aligned components, links and stances."""
    doc = build_document(doc_id, random_text(rng, paragraphs=(1, 4), sentences=(1, 3), words=(2, 9)),
                         scheme=SchemeId.AAE_COMPONENT)
    spans, rels = [], []
    kinds = ("MajorClaim", "Claim", "Premise")
    short = {"MajorClaim": "MC", "Claim": "Cl", "Premise": "Pr"}
    from argmine.corpus import ArgRelation
    for p, (ps, pe) in enumerate(doc.paragraphs):
        ws = doc.words_in((ps, pe))
        k = 0
        mine = []
        while k < len(ws):
            if rng.random() < 0.4:
                length = int(rng.integers(1, 4))
                seg = ws[k:k + length]
                tid = f"T{len(spans) + 1}"
                spans.append(AnnotationSpan(tid, short[kinds[rng.integers(3)]], "char-range",
                                            doc.words[seg[0]][0], doc.words[seg[-1]][1]))
                mine.append(tid)
                k += length + int(rng.integers(0, 2))
            else:
                k += 1
        for a in mine:
            if rng.random() < 0.3 and len(mine) > 1:
                b = mine[int(rng.integers(len(mine)))]
                if b != a:
                    rels.append(ArgRelation(a, b, True, "support" if rng.random() < 0.8 else "attack"))
    return doc.with_spans(spans, rels)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE, key=str):
        status, title, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n} {status:<4} {title}: {detail}")
