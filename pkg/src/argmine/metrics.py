"""Per-tag agreement and accuracy: one-vs-rest kappa, precision, recall, F1."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import AnnotatedDocument, bio_labels, sentence_tags, word_tags
from .schemes import AAE_BIO, ARROW, TagSet, get_scheme


class MetricError(ValueError):
    pass


def _check(a, b):
    if len(a) != len(b):
        raise MetricError(f"length mismatch: {len(a)} vs {len(b)}")


def _kappa_from_counts(both: int, only_a: int, only_b: int, n: int) -> float:
    neither = n - both - only_a - only_b
    po = (both + neither) / n
    pa = (both + only_a) / n
    pb = (both + only_b) / n
    pe = pa * pb + (1 - pa) * (1 - pb)
    if pe == 1.0:
        return 1.0 if po == 1.0 else 0.0
    return (po - pe) / (1 - pe)


def cohen_kappa(labels_a, labels_b, tag) -> float:
    """Kappa on the binary indicator ``label == tag``."""
    _check(labels_a, labels_b)
    if not labels_a:
        raise MetricError("kappa of empty sequences")
    a = np.asarray([x == tag for x in labels_a])
    b = np.asarray([x == tag for x in labels_b])
    return _kappa_from_counts(int((a & b).sum()), int((a & ~b).sum()), int((~a & b).sum()), len(a))


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def prf1(pred, gold, tag) -> tuple[float, float, float]:
    _check(pred, gold)
    tp = sum(1 for p, g in zip(pred, gold) if p == tag and g == tag)
    fp = sum(1 for p, g in zip(pred, gold) if p == tag and g != tag)
    fn = sum(1 for p, g in zip(pred, gold) if p != tag and g == tag)
    return _prf(tp, fp, fn)


@dataclass(frozen=True)
class TagScore:
    kappa: float
    precision: float
    recall: float
    f1: float
    support: int
    predicted: int

    @property
    def present(self) -> bool:
        return self.support > 0 or self.predicted > 0


@dataclass
class EvalReport:
    tags: tuple
    per_tag: dict
    macro_f1: float
    macro_kappa: float
    accuracy: float
    units: int
    macro_tags: tuple = field(default_factory=tuple)

    @property
    def kappa(self) -> dict:
        return {t: s.kappa for t, s in self.per_tag.items() if s.present}

    @property
    def f1(self) -> dict:
        return {t: s.f1 for t, s in self.per_tag.items() if s.present}

    def metric_sum(self, kind: str = "sum_kappa") -> float:
        """Sum of per-tag kappa (``sum_kappa``) or F1 (``sum_f1``) over tags that occur."""
        values = self.kappa if kind == "sum_kappa" else self.f1
        return float(sum(values.values()))


def evaluate_labels(gold, pred, tags, macro_tags=None) -> EvalReport:
    """All per-tag metrics for two aligned label sequences.

    Tags absent from both sides score zero and stay out of the macro
    averages. ``macro_tags`` restricts the averages further.
    """
    _check(gold, pred)
    tags = tuple(tags)
    index = {t: i for i, t in enumerate(tags)}
    try:
        g = np.fromiter((index[x] for x in gold), dtype=np.int64, count=len(gold))
        p = np.fromiter((index[x] for x in pred), dtype=np.int64, count=len(pred))
    except KeyError as exc:
        raise MetricError(f"label {exc.args[0]!r} is not among {tags}") from None
    n = len(g)
    k = len(tags)
    confusion = np.bincount(g * k + p, minlength=k * k).reshape(k, k)
    per_tag = {}
    for i, t in enumerate(tags):
        tp = int(confusion[i, i])
        support = int(confusion[i].sum())
        predicted = int(confusion[:, i].sum())
        fp, fn = predicted - tp, support - tp
        prec, rec, f = _prf(tp, fp, fn)
        kap = _kappa_from_counts(tp, fn, fp, n) if n else 0.0
        if support == 0 and predicted == 0:
            prec = rec = f = 0.0
        per_tag[t] = TagScore(kap, prec, rec, f, support, predicted)
    chosen = tuple(macro_tags) if macro_tags is not None else tags
    averaged = [t for t in chosen if per_tag[t].present]
    macro_f1 = float(np.mean([per_tag[t].f1 for t in averaged])) if averaged else 0.0
    macro_kappa = float(np.mean([per_tag[t].kappa for t in averaged])) if averaged else 0.0
    accuracy = float(np.trace(confusion) / n) if n else 0.0
    return EvalReport(tags, per_tag, macro_f1, macro_kappa, accuracy, n, tuple(averaged))


def unit_labels(doc: AnnotatedDocument, scheme: TagSet, unit: str | None = None) -> list[str]:
    """Flat per-unit tags: sentences for ARROW, words for everything else."""
    unit = unit or ("sentence" if scheme is ARROW else "word")
    if unit == "sentence":
        return sentence_tags(doc, scheme)
    if unit != "word":
        raise MetricError(f"unknown unit {unit!r}")
    if scheme is AAE_BIO:
        return bio_labels(doc)
    return word_tags(doc, scheme)


def scored_tags(scheme: TagSet) -> tuple[tuple, tuple]:
    """Label inventory and the tags that enter the macro average."""
    labels = scheme.labels
    extra = () if scheme.none_tag is not None else ("O",) if "O" not in labels else ()
    macro = labels if scheme is ARROW else scheme.tags
    return labels + extra, macro


def evaluate(pred_docs, gold_docs, scheme, unit: str | None = None, macro_tags=None) -> EvalReport:
    """Flatten every unit of every document and score predictions against gold.

    Documents are paired by id. For ARROW the average includes the none tag;
    for the other schemes it covers only the scheme's own tags.
    """
    scheme = get_scheme(scheme)
    pred_by = {d.doc_id: d for d in pred_docs}
    gold_by = {d.doc_id: d for d in gold_docs}
    missing_pred = sorted(set(gold_by) - set(pred_by))
    missing_gold = sorted(set(pred_by) - set(gold_by))
    if missing_pred or missing_gold:
        raise MetricError(f"document ids differ; missing predictions: {missing_pred}; "
                          f"missing gold: {missing_gold}")
    gold, pred = [], []
    for doc_id in sorted(gold_by):
        gl = unit_labels(gold_by[doc_id], scheme, unit)
        pl = unit_labels(pred_by[doc_id], scheme, unit)
        if len(gl) != len(pl):
            raise MetricError(f"{doc_id}: {len(gl)} gold units vs {len(pl)} predicted")
        gold.extend(gl)
        pred.extend(pl)
    tags, macro = scored_tags(scheme)
    return evaluate_labels(gold, pred, tags, macro if macro_tags is None else macro_tags)


def _fmt(x: float) -> str:
    return "" if x != x else f"{x:.3f}"


def format_report(report: EvalReport, title: str = "", average_label: str = "Macro Avg") -> str:
    """Per-tag rows with kappa, P, R, F1 and support, then the average row."""
    head = f"{'Tag':<10}{'Kappa':>8}{'P':>8}{'R':>8}{'F1':>8}{'Support':>9}"
    lines = [title] if title else []
    lines += [head, "-" * len(head)]
    for t in report.tags:
        s = report.per_tag[t]
        lines.append(f"{t:<10}{_fmt(s.kappa):>8}{_fmt(s.precision):>8}{_fmt(s.recall):>8}"
                     f"{_fmt(s.f1):>8}{s.support:>9}")
    lines.append("-" * len(head))
    lines.append(f"{average_label:<10}{_fmt(report.macro_kappa):>8}{'':>8}{'':>8}"
                 f"{_fmt(report.macro_f1):>8}{report.units:>9}")
    lines.append(f"{'Accuracy':<10}{_fmt(report.accuracy):>8}")
    return "\n".join(lines)


def format_table(columns: dict, metric: str = "kappa", tags=None, average_label: str = "Average",
                 names: dict | None = None) -> str:
    """Tags down, one column per report (model, split or task), average row last.

    ``metric`` is ``kappa`` or ``f1``. Averages follow each report's own
    macro tag set. ``names`` maps tags to the row labels to print.
    """
    if metric not in ("kappa", "f1"):
        raise MetricError("metric must be kappa or f1")
    cols = list(columns)
    tags = list(tags) if tags is not None else list(next(iter(columns.values())).tags) if cols else []
    names = names or {}
    first = max([10] + [len(names.get(t, t)) + 2 for t in tags] + [len(average_label) + 2])
    width = max([10] + [len(n) + 2 for n in cols])
    lines = [f"{'Tag':<{first}}" + "".join(f"{n:>{width}}" for n in cols)]
    for t in tags:
        cells = []
        for n in cols:
            s = columns[n].per_tag.get(t)
            cells.append(_fmt(getattr(s, metric)) if s is not None and s.present else "")
        lines.append(f"{names.get(t, t):<{first}}" + "".join(f"{c:>{width}}" for c in cells))
    avg = [columns[n].macro_kappa if metric == "kappa" else columns[n].macro_f1 for n in cols]
    lines.append(f"{average_label:<{first}}" + "".join(f"{_fmt(a):>{width}}" for a in avg))
    return "\n".join(lines)


TASK_SUMMARY_COLUMNS = (
    ("aae_bio", None, "BIO F1"), ("aae_bio", "B", "F1 B"), ("aae_bio", "I", "F1 I"), ("aae_bio", "O", "F1 O"),
    ("aae_component", None, "Comp F1"), ("aae_component", "MC", "F1 MC"),
    ("aae_component", "Cl", "F1 Cl"), ("aae_component", "Pr", "F1 Pr"),
    ("aae_relation", None, "Rel F1"), ("aae_stance", None, "Stance F1"),
)


def format_task_summary(rows: dict, columns=TASK_SUMMARY_COLUMNS) -> str:
    """One row per system, F1 columns across tasks; ``rows`` maps name to ``{task: EvalReport}``.

    A column with tag ``None`` shows the task's macro F1. Missing tasks
    leave their cells blank.
    """
    names = list(rows)
    first = max([8] + [len(n) + 2 for n in names])
    width = max(len(c[2]) for c in columns) + 2
    lines = [f"{'':<{first}}" + "".join(f"{c[2]:>{width}}" for c in columns)]
    for n in names:
        cells = []
        for task, tag, _ in columns:
            rep = rows[n].get(task)
            if rep is None:
                cells.append("")
            elif tag is None:
                cells.append(_fmt(rep.macro_f1))
            else:
                s = rep.per_tag.get(tag)
                cells.append(_fmt(s.f1) if s is not None and s.present else "")
        lines.append(f"{n:<{first}}" + "".join(f"{c:>{width}}" for c in cells))
    return "\n".join(lines)
