"""Word-level cross-tabulation of one annotation scheme against another."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .corpus import AnnotatedDocument, AnnotationSpan, word_tags
from .schemes import TagSet, get_scheme

NONE = "None"


class CorrespondenceError(ValueError):
    pass


def collapse_to_words(doc: AnnotatedDocument, scheme, rater: str | None = None) -> list[str]:
    """One tag per word: sentence tags are copied to their words, span tags projected.

    A word touched by two char spans takes the span covering its first
    character. Untagged words get ``None``.
    """
    scheme = get_scheme(scheme)
    tags = word_tags(doc, scheme, rater, rule="first-char")
    if scheme.none_tag is None:
        valid = set(scheme.labels)
        tags = [t if t in valid else NONE for t in tags]
    return tags


def words_to_spans(tags, rater: str = "human-1", none_tag: str = NONE) -> list[AnnotationSpan]:
    """Word-range spans for each maximal run of equal tags."""
    spans = []
    start = 0
    for i in range(1, len(tags) + 1):
        if i == len(tags) or tags[i] != tags[start]:
            if tags[start] != none_tag:
                spans.append(AnnotationSpan(f"W{len(spans)}", tags[start], "word-range", start, i, rater))
            start = i
    return spans


@dataclass
class CorrespondenceMatrix:
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def row_support(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def cells(self) -> np.ndarray:
        """Row percentages; rows with no words are NaN."""
        support = self.row_support[:, None].astype(float)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(support > 0, 100.0 * self.counts / support, np.nan)

    @property
    def row_marginals(self) -> np.ndarray:
        """Share of all words carrying each human tag."""
        return 100.0 * self.row_support / self.total if self.total else np.zeros(len(self.rows))

    @property
    def col_marginals(self) -> np.ndarray:
        """Share of all words carrying each synthetic tag."""
        return 100.0 * self.counts.sum(axis=0) / self.total if self.total else np.zeros(len(self.cols))

    def cell(self, row: str, col: str) -> float:
        return float(self.cells[self.rows.index(row), self.cols.index(col)])

    def __add__(self, other: "CorrespondenceMatrix") -> "CorrespondenceMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise CorrespondenceError("matrices have different layouts")
        return CorrespondenceMatrix(self.rows, self.cols, self.counts + other.counts)

    def to_delimited(self, delimiter: str = ",", digits: int = 1) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
        w.writerow(["human"] + list(self.cols) + ["%"])
        for i, r in enumerate(self.rows):
            row = ["" if np.isnan(x) else f"{x:.{digits}f}" for x in self.cells[i]]
            w.writerow([r] + row + [f"{self.row_marginals[i]:.{digits}f}"])
        w.writerow(["%"] + [f"{x:.{digits}f}" for x in self.col_marginals] + [""])
        return buf.getvalue()


def _order(tags, scheme: TagSet | None):
    if scheme is None:
        return tuple(sorted(set(tags)))
    order = list(scheme.labels)
    if NONE not in order:
        order.append(NONE)
    return tuple(order)


def cross_tabulate(human, synthetic, row_tags=None, col_tags=None) -> CorrespondenceMatrix:
    """Counts of (human tag, synthetic tag) over aligned words.

    ``row_tags``/``col_tags`` may be tag sequences or schemes; by default the
    observed tags are used in sorted order.
    """
    if len(human) != len(synthetic):
        raise CorrespondenceError(f"length mismatch: {len(human)} vs {len(synthetic)}")
    rows = _order(human, row_tags) if row_tags is None or isinstance(row_tags, TagSet) else tuple(row_tags)
    cols = _order(synthetic, col_tags) if col_tags is None or isinstance(col_tags, TagSet) else tuple(col_tags)
    ri = {t: i for i, t in enumerate(rows)}
    ci = {t: i for i, t in enumerate(cols)}
    counts = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for h, s in zip(human, synthetic):
        if h not in ri or s not in ci:
            raise CorrespondenceError(f"tag pair ({h!r}, {s!r}) outside the table layout")
        counts[ri[h], ci[s]] += 1
    return CorrespondenceMatrix(rows, cols, counts)


def corpus_correspondence(docs_human, docs_synthetic, human_scheme, synthetic_scheme,
                          human_rater=None, synthetic_rater=None) -> CorrespondenceMatrix:
    """Matrix over a corpus; documents are paired by id and must share their text."""
    hs, ss = get_scheme(human_scheme), get_scheme(synthetic_scheme)
    by_id = {d.doc_id: d for d in docs_synthetic}
    total = None
    for dh in docs_human:
        ds = by_id.get(dh.doc_id)
        if ds is None:
            raise CorrespondenceError(f"{dh.doc_id}: no synthetic counterpart")
        if ds.words != dh.words:
            raise CorrespondenceError(f"{dh.doc_id}: word segmentation differs between views")
        m = cross_tabulate(collapse_to_words(dh, hs, human_rater),
                           collapse_to_words(ds, ss, synthetic_rater), hs, ss)
        total = m if total is None else total + m
    if total is None:
        rows, cols = _order((), hs), _order((), ss)
        total = CorrespondenceMatrix(rows, cols, np.zeros((len(rows), len(cols)), dtype=np.int64))
    return total


def format_side_by_side(matrices: dict[str, CorrespondenceMatrix], digits: int = 1) -> str:
    """Human tags down; each synthetic scheme's columns side by side; a ``%`` marginal row and column.

    All matrices must share their row layout.
    """
    names = list(matrices)
    if not names:
        return ""
    rows = matrices[names[0]].rows
    if any(m.rows != rows for m in matrices.values()):
        raise CorrespondenceError("matrices have different human rows")
    width = max(7, digits + 5)
    group = "".join(f"| {n:<{len(matrices[n].cols) * width - 2}}" for n in names)
    header = f"{'':<8}" + "".join("|" + "".join(f"{c:>{width}}" for c in matrices[n].cols)[1:] for n in names)
    lines = [f"{'':<8}{group}", header + f"{'%':>{width}}"]

    def fmt(x):
        return "" if np.isnan(x) else f"{x:.{digits}f}"

    first = matrices[names[0]]
    for i, r in enumerate(rows):
        cells = "".join("|" + "".join(f"{fmt(x):>{width}}" for x in matrices[n].cells[i])[1:] for n in names)
        lines.append(f"{r:<8}{cells}{fmt(first.row_marginals[i]):>{width}}")
    marg = "".join("|" + "".join(f"{fmt(x):>{width}}" for x in matrices[n].col_marginals)[1:] for n in names)
    lines.append(f"{'%':<8}{marg}")
    return "\n".join(lines)
