import math

import pytest
from hypothesis import given, strategies as st

from argmine.corpus import AnnotationSpan, build_document
from argmine.metrics import (
    MetricError,
    cohen_kappa,
    evaluate,
    evaluate_labels,
    format_report,
    format_table,
    format_task_summary,
    prf1,
    scored_tags,
)
from argmine.schemes import AAE_BIO, ARROW, PERSUADE, SchemeId

from oracles import brute_kappa, brute_macro_f1, brute_prf

TAGS = ("a", "b", "c", "d")


def test_kappa_worked_example():
    assert cohen_kappa([1, 1, 0, 0], [1, 0, 0, 0], 1) == pytest.approx(0.5)


def test_prf_worked_example():
    pred = ["x", "x", "x", "y", "y"]
    gold = ["x", "x", "y", "x", "y"]
    p, r, f = prf1(pred, gold, "x")
    assert (p, r, f) == pytest.approx((2 / 3, 2 / 3, 2 / 3))


def test_kappa_degenerate_cases():
    assert cohen_kappa(["a", "a"], ["a", "a"], "a") == 1.0
    assert cohen_kappa(["b", "b"], ["b", "b"], "a") == 1.0
    with pytest.raises(MetricError):
        cohen_kappa([], [], "a")
    with pytest.raises(MetricError):
        cohen_kappa(["a"], ["a", "b"], "a")


seqs = st.integers(1, 40).flatmap(lambda n: st.tuples(
    st.lists(st.sampled_from(TAGS), min_size=n, max_size=n),
    st.lists(st.sampled_from(TAGS), min_size=n, max_size=n)))


@given(seqs)
def test_matches_brute_force(pair):
    gold, pred = pair
    rep = evaluate_labels(gold, pred, TAGS)
    for t in TAGS:
        s = rep.per_tag[t]
        assert s.kappa == pytest.approx(brute_kappa(gold, pred, t), abs=1e-12)
        assert (s.precision, s.recall, s.f1) == pytest.approx(brute_prf(gold, pred, t), abs=1e-12)
    assert rep.macro_f1 == pytest.approx(brute_macro_f1(gold, pred, TAGS), abs=1e-12)
    assert rep.accuracy == pytest.approx(sum(g == p for g, p in zip(gold, pred)) / len(gold))


@given(seqs)
def test_kappa_is_symmetric(pair):
    a, b = pair
    for t in TAGS:
        assert cohen_kappa(a, b, t) == pytest.approx(cohen_kappa(b, a, t), abs=1e-12)


@given(seqs, st.randoms())
def test_permutation_invariant(pair, rnd):
    gold, pred = pair
    order = list(range(len(gold)))
    rnd.shuffle(order)
    a = evaluate_labels(gold, pred, TAGS)
    b = evaluate_labels([gold[i] for i in order], [pred[i] for i in order], TAGS)
    assert a.macro_f1 == pytest.approx(b.macro_f1) and a.kappa == pytest.approx(b.kappa)


def test_absent_tags_stay_out_of_averages():
    rep = evaluate_labels(["a", "b", "a"], ["a", "b", "b"], TAGS)
    assert set(rep.kappa) == {"a", "b"} and rep.macro_tags == ("a", "b")
    assert rep.per_tag["c"].f1 == 0.0 and not rep.per_tag["c"].present
    assert rep.metric_sum() == pytest.approx(sum(rep.kappa.values()))


def test_unknown_label_rejected():
    with pytest.raises(MetricError, match="'z'"):
        evaluate_labels(["z"], ["a"], TAGS)


def test_scored_tags():
    labels, macro = scored_tags(ARROW)
    assert "None" in labels and macro == ARROW.labels
    labels, macro = scored_tags(PERSUADE)
    assert "None" in labels and "None" not in macro
    assert scored_tags(AAE_BIO) == (("B", "I", "O"), ("B", "I", "O"))


def arrow_doc(doc_id, tags):
    doc = build_document(doc_id, " ".join(f"s{k}." for k in range(len(tags))), scheme=SchemeId.ARROW)
    return doc.with_spans([AnnotationSpan(f"x{k}", t, "sentence", k, k + 1)
                           for k, t in enumerate(tags) if t != "None"])


def test_evaluate_identical_documents_scores_one():
    docs = [arrow_doc("a", ["I1", "E1", "None"]), arrow_doc("b", ["T", "E1"])]
    rep = evaluate(docs, docs, ARROW)
    assert rep.macro_f1 == 1.0 and rep.accuracy == 1.0 and rep.units == 5
    assert "None" in rep.macro_tags


def test_evaluate_id_mismatch():
    with pytest.raises(MetricError, match="missing predictions"):
        evaluate([arrow_doc("a", ["T"])], [arrow_doc("b", ["T"])], ARROW)


def test_evaluate_unit_count_mismatch():
    with pytest.raises(MetricError):
        evaluate([arrow_doc("a", ["T"])], [arrow_doc("a", ["T", "T"])], ARROW)


def test_format_report_layout():
    rep = evaluate_labels(["a", "b"], ["a", "a"], TAGS)
    text = format_report(rep, title="demo")
    lines = text.splitlines()
    assert lines[0] == "demo" and lines[1].split() == ["Tag", "Kappa", "P", "R", "F1", "Support"]
    assert any(line.startswith("Macro Avg") for line in lines) and lines[-1].startswith("Accuracy")


def test_format_table_layout():
    a = evaluate_labels(["a", "b"], ["a", "b"], TAGS)
    b = evaluate_labels(["a", "b"], ["b", "b"], TAGS)
    text = format_table({"seed": a, "universal": b}, metric="f1", tags=["a", "b", "c"])
    lines = text.splitlines()
    assert lines[0].split() == ["Tag", "seed", "universal"]
    assert lines[1].split() == ["a", "1.000", "0.000"]
    assert lines[3].split() == ["c"]
    assert lines[-1].split()[0] == "Average"
    with pytest.raises(MetricError):
        format_table({"x": a}, metric="auc")


def test_nan_free_outputs():
    rep = evaluate_labels(["a"] * 5, ["a"] * 5, TAGS)
    assert all(not math.isnan(v) for v in rep.kappa.values())


def test_format_table_long_names():
    rep = evaluate_labels(["I1", "None"], ["I1", "None"], ARROW.labels)
    text = format_table({"base": rep}, tags=ARROW.labels, names=ARROW.long_names)
    assert any(line.startswith("Introduction") for line in text.splitlines())


def test_task_summary_layout():
    bio = evaluate_labels(["B", "I", "O"], ["B", "I", "O"], ("B", "I", "O"))
    rel = evaluate_labels(["Linked", "NotLinked"], ["Linked", "Linked"], ("Linked", "NotLinked"))
    text = format_task_summary({"model": {"aae_bio": bio, "aae_relation": rel}})
    header, row = text.splitlines()
    assert header.split()[:3] == ["BIO", "F1", "F1"] and "Stance" in header
    assert row.split()[:5] == ["model", "1.000", "1.000", "1.000", "1.000"]
    assert row.split()[-1] == _expected_rel(rel)


def _expected_rel(rep):
    return f"{rep.macro_f1:.3f}"
