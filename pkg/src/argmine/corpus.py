"""Canonical annotated-document model and readers for the three corpus formats.

Every reader produces :class:`AnnotatedDocument` objects whose text is NFC
normalized and whose paragraphs, sentences and words are character ranges
into that text. Spans carry their own unit (sentence index, word index or
character offset).
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import logging
import os
import re
import unicodedata
from collections import Counter
from dataclasses import asdict, dataclass, field
from html.parser import HTMLParser
from pathlib import Path

from .schemes import (
    AAE_BIO,
    AAE_COMPONENT,
    ARROW,
    PERSUADE,
    SchemeId,
    TagSet,
    get_scheme,
    resolve_pair,
)

log = logging.getLogger(__name__)

UNITS = ("sentence", "word-range", "char-range")
Range = tuple[int, int]


class CorpusError(ValueError):
    pass


class ParseError(CorpusError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class SpanRangeError(CorpusError):
    pass


class ConsistencyError(CorpusError):
    pass


@dataclass
class AnnotationSpan:
    span_id: str
    tag: str
    unit: str
    start: int
    end: int
    rater: str = "human-1"
    votes: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.unit not in UNITS:
            raise CorpusError(f"{self.span_id}: unknown unit {self.unit!r}")
        if not self.start < self.end:
            raise SpanRangeError(f"{self.span_id}: empty or inverted range [{self.start}, {self.end})")
        if self.votes is not None:
            self.votes = tuple(self.votes)


@dataclass
class ArgRelation:
    source: str
    target: str | None
    linked: bool
    stance: str = "none"  # support | attack | none

    def __post_init__(self):
        if self.source == self.target:
            raise CorpusError(f"relation from {self.source} to itself")
        if self.stance not in ("support", "attack", "none"):
            raise CorpusError(f"unknown stance {self.stance!r}")


@dataclass
class AnnotatedDocument:
    doc_id: str
    text: str
    paragraphs: list[Range]
    sentences: list[Range]
    words: list[Range]
    spans: list[AnnotationSpan] = field(default_factory=list)
    relations: list[ArgRelation] = field(default_factory=list)
    source_scheme: SchemeId = SchemeId.ARROW
    meta: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def span(self, span_id: str) -> AnnotationSpan:
        for s in self.spans:
            if s.span_id == span_id:
                return s
        raise KeyError(span_id)

    def word_text(self, i: int) -> str:
        s, e = self.words[i]
        return self.text[s:e]

    def sentence_text(self, i: int) -> str:
        s, e = self.sentences[i]
        return self.text[s:e]

    def words_in(self, rng: Range) -> list[int]:
        s, e = rng
        return [i for i, (ws, we) in enumerate(self.words) if ws >= s and we <= e]

    def paragraph_of_char(self, pos: int) -> int:
        for i, (s, e) in enumerate(self.paragraphs):
            if s <= pos < e:
                return i
        raise CorpusError(f"{self.doc_id}: char {pos} lies outside every paragraph")

    def with_spans(self, spans, relations=None) -> "AnnotatedDocument":
        return AnnotatedDocument(
            self.doc_id, self.text, list(self.paragraphs), list(self.sentences),
            list(self.words), list(spans),
            list(self.relations if relations is None else relations),
            self.source_scheme, dict(self.meta), list(self.warnings),
        )

    # canonical form

    def to_dict(self) -> dict:
        d = asdict(self)
        d["source_scheme"] = self.source_scheme.value
        d["paragraphs"] = [list(r) for r in self.paragraphs]
        d["sentences"] = [list(r) for r in self.sentences]
        d["words"] = [list(r) for r in self.words]
        for s in d["spans"]:
            if s["votes"] is None:
                del s["votes"]
            else:
                s["votes"] = list(s["votes"])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AnnotatedDocument":
        return cls(
            doc_id=d["doc_id"],
            text=d["text"],
            paragraphs=[tuple(r) for r in d["paragraphs"]],
            sentences=[tuple(r) for r in d["sentences"]],
            words=[tuple(r) for r in d["words"]],
            spans=[AnnotationSpan(**s) for s in d.get("spans", [])],
            relations=[ArgRelation(**r) for r in d.get("relations", [])],
            source_scheme=SchemeId(d["source_scheme"]),
            meta=dict(d.get("meta", {})),
            warnings=list(d.get("warnings", [])),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True, indent=1) + "\n"

    @classmethod
    def loads(cls, content: str) -> "AnnotatedDocument":
        return cls.from_dict(json.loads(content))


# --- segmentation -----------------------------------------------------------

ABBREVIATIONS = frozenset(
    "mr mrs ms dr prof sr jr st vs mt e.g i.e approx dept est fig jan feb aug sept oct nov dec".split()
)
_TERMINALS = ".!?"
_CLOSERS = "\"'”’)]}»"
_WORD_RE = re.compile(r"\S+")


def split_sentences(paragraph: str) -> list[Range]:
    """Rule-based sentence ranges (character offsets) within one paragraph.

    A sentence ends at a run of ``.``/``!``/``?`` followed by whitespace or
    the end of the paragraph; closing quotes and brackets directly after the
    run belong to the sentence. A period after a known abbreviation does not
    end a sentence. Whatever remains at the paragraph end is one sentence.
    """
    out: list[Range] = []
    n = len(paragraph)
    i = 0
    start = None
    while i < n:
        ch = paragraph[i]
        if start is None:
            if ch.isspace():
                i += 1
                continue
            start = i
        if ch in _TERMINALS:
            j = i
            while j < n and paragraph[j] in _TERMINALS:
                j += 1
            while j < n and paragraph[j] in _CLOSERS:
                j += 1
            at_boundary = j == n or paragraph[j].isspace()
            if at_boundary and not (ch == "." and j == i + 1 and _is_abbreviation(paragraph, start, i)):
                out.append((start, j))
                start = None
            i = j
            continue
        i += 1
    if start is not None:
        end = n
        while end > start and paragraph[end - 1].isspace():
            end -= 1
        out.append((start, end))
    return out


def _is_abbreviation(text: str, start: int, dot: int) -> bool:
    k = dot
    while k > start and not text[k - 1].isspace():
        k -= 1
    token = text[k:dot].lstrip("\"'“‘([{").lower()
    return token in ABBREVIATIONS


def line_paragraphs(text: str) -> list[Range]:
    """Paragraphs as non-blank lines, trimmed of surrounding whitespace."""
    out = []
    pos = 0
    for line in text.split("\n"):
        s, e = pos, pos + len(line)
        while s < e and text[s].isspace():
            s += 1
        while e > s and text[e - 1].isspace():
            e -= 1
        if e > s:
            out.append((s, e))
        pos += len(line) + 1
    return out


def word_ranges(text: str) -> list[Range]:
    return [m.span() for m in _WORD_RE.finditer(text)]


def build_document(doc_id, text, paragraphs=None, scheme=SchemeId.ARROW, meta=None) -> AnnotatedDocument:
    """Segment ``text`` into paragraphs (newline based unless given), sentences and words."""
    if paragraphs is None:
        paragraphs = line_paragraphs(text)
    sentences = []
    for ps, pe in paragraphs:
        sentences.extend((ps + s, ps + e) for s, e in split_sentences(text[ps:pe]))
    return AnnotatedDocument(
        doc_id=doc_id, text=text, paragraphs=list(paragraphs), sentences=sentences,
        words=word_ranges(text), source_scheme=SchemeId(scheme), meta=dict(meta or {}),
    )


def _nfc_with_offsets(text: str, offsets: list[int]) -> tuple[str, dict[int, int]]:
    """NFC-normalize ``text`` piecewise so that every offset in ``offsets`` maps exactly."""
    if unicodedata.is_normalized("NFC", text):
        return text, {o: o for o in offsets}
    cuts = sorted(set(o for o in offsets if 0 <= o <= len(text)) | {0, len(text)})
    pieces, mapping, pos = [], {}, 0
    for a, b in zip(cuts, cuts[1:]):
        mapping[a] = pos
        piece = unicodedata.normalize("NFC", text[a:b])
        pieces.append(piece)
        pos += len(piece)
    mapping[len(text)] = pos
    return "".join(pieces), mapping


# --- brat standoff (AAE) ----------------------------------------------------

_BRAT_T = re.compile(r"^(T\d+)\t(\S+) (\d+) (\d+)((?:;\d+ \d+)*)\t?(.*)$")
_BRAT_R = re.compile(r"^(R\d+)\t(supports|attacks) Arg1:(T\d+) Arg2:(T\d+)\s*$")
_BRAT_A = re.compile(r"^(A\d+)\tStance (T\d+) (For|Against)\s*$")


def parse_brat_essay(txt_content: str, ann_content: str, doc_id: str = "essay") -> AnnotatedDocument:
    """Read one AAE essay from its ``.txt`` and ``.ann`` contents."""
    records = []
    for lineno, raw in enumerate(ann_content.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        m = _BRAT_T.match(line)
        if m:
            tid, label, s, e, extra, _ = m.groups()
            end = int(extra.rsplit(" ", 1)[1]) if extra else int(e)
            records.append(("T", lineno, tid, label, int(s), end, m.group(6)))
            continue
        m = _BRAT_R.match(line)
        if m:
            records.append(("R", lineno) + m.groups()[1:])
            continue
        m = _BRAT_A.match(line)
        if m:
            records.append(("A", lineno) + m.groups()[1:])
            continue
        raise ParseError(f"unrecognised annotation line {line!r}", lineno)

    offsets = [r[4] for r in records if r[0] == "T"] + [r[5] for r in records if r[0] == "T"]
    # offsets index the raw file, so line endings are left untouched
    text, omap = _nfc_with_offsets(txt_content, offsets)
    doc = build_document(doc_id, text, scheme=SchemeId.AAE_COMPONENT)

    ids = set()
    for kind, lineno, *rest in records:
        if kind != "T":
            continue
        tid, label, s, e, snippet = rest
        if label not in AAE_COMPONENT.long_names.values():
            raise ParseError(f"{tid}: unknown component type {label!r}", lineno)
        if e > len(txt_content) or s >= e:
            raise SpanRangeError(f"line {lineno}: {tid} range [{s}, {e}) outside text of length {len(txt_content)}")
        if snippet and "\t" not in snippet and txt_content[s:e] != snippet:
            doc.warnings.append(f"{tid}: annotation text differs from the essay at [{s}, {e})")
        doc.spans.append(AnnotationSpan(tid, AAE_COMPONENT.expand(label), "char-range", omap[s], omap[e]))
        ids.add(tid)
    for kind, lineno, *rest in records:
        if kind == "R":
            rel, a1, a2 = rest
            for t in (a1, a2):
                if t not in ids:
                    raise ParseError(f"relation refers to unknown component {t}", lineno)
            doc.relations.append(ArgRelation(a1, a2, True, "support" if rel == "supports" else "attack"))
        elif kind == "A":
            tid, value = rest
            if tid not in ids:
                raise ParseError(f"stance refers to unknown component {tid}", lineno)
            doc.relations.append(ArgRelation(tid, None, False, "support" if value == "For" else "attack"))
    return doc


def read_brat_dir(path, split_file: str | None = None) -> list[AnnotatedDocument]:
    """Every ``*.ann``/``*.txt`` pair in a directory, sorted by name.

    When a ``train-test-split.csv`` (``"ID";"SET"`` rows) is present, each
    document's ``meta["split"]`` is set from it.
    """
    path = Path(path)
    splits = {}
    split_path = Path(split_file) if split_file else path / "train-test-split.csv"
    if split_path.exists():
        for row in csv.reader(split_path.read_text(encoding="utf-8").splitlines(), delimiter=";"):
            if len(row) == 2 and row[0] != "ID":
                splits[row[0]] = row[1].lower()
    docs = []
    for ann in sorted(path.glob("*.ann")):
        txt = ann.with_suffix(".txt")
        if not txt.exists():
            raise CorpusError(f"{ann}: missing text file {txt.name}")
        doc = parse_brat_essay(
            txt.read_text(encoding="utf-8"), ann.read_text(encoding="utf-8"), doc_id=ann.stem
        )
        if ann.stem in splits:
            doc.meta["split"] = splits[ann.stem]
        docs.append(doc)
    return docs


# --- PERSUADE table ---------------------------------------------------------

_ID_COLUMNS = ("essay_id_comp", "essay_id", "id")


def parse_persuade_table(csv_content: str, texts: dict[str, str] | None = None,
                         strict: bool = True) -> list[AnnotatedDocument]:
    """Documents from a PERSUADE discourse-element table.

    Essay text comes from a ``full_text`` column or, for the Kaggle layout,
    from ``texts`` keyed by essay id. Word spans follow the
    ``predictionstring`` word indices; the character offsets are checked
    against them and a disagreement larger than surrounding whitespace raises
    :class:`ConsistencyError` (or is recorded as a warning when not strict).
    """
    reader = csv.DictReader(io.StringIO(csv_content))
    if reader.fieldnames is None:
        raise CorpusError("PERSUADE table has no header row")
    id_col = next((c for c in _ID_COLUMNS if c in reader.fieldnames), None)
    missing = [c for c in ("discourse_start", "discourse_end", "discourse_type", "predictionstring")
               if c not in reader.fieldnames]
    if id_col is None or missing:
        raise CorpusError(f"PERSUADE table lacks columns: {missing or list(_ID_COLUMNS)}")

    docs: dict[str, AnnotatedDocument] = {}
    for rowno, row in enumerate(reader, start=2):
        essay = row[id_col]
        if essay not in docs:
            text = row.get("full_text") or (texts or {}).get(essay)
            if text is None:
                raise CorpusError(f"row {rowno}: no text for essay {essay}")
            text = unicodedata.normalize("NFC", text)
            meta = {k: row[c] for k, c in (("split", "competition_set"), ("prompt", "prompt_name"))
                    if row.get(c)}
            docs[essay] = build_document(essay, text, scheme=SchemeId.PERSUADE, meta=meta)
        doc = docs[essay]
        indices = [int(x) for x in row["predictionstring"].split()]
        if not indices:
            continue
        lo, hi = min(indices), max(indices) + 1
        if hi > len(doc.words):
            raise SpanRangeError(f"row {rowno}: word index {hi - 1} beyond {len(doc.words)} words in {essay}")
        if sorted(indices) != list(range(lo, hi)):
            doc.warnings.append(f"row {rowno}: non-contiguous predictionstring, using [{lo}, {hi})")
        _check_persuade_offsets(doc, row, rowno, set(indices), strict)
        tag = PERSUADE.expand(row["discourse_type"])
        span_id = row.get("discourse_id") or f"D{len(doc.spans) + 1}"
        doc.spans.append(AnnotationSpan(str(span_id), tag, "word-range", lo, hi))
    return list(docs.values())


def _check_persuade_offsets(doc, row, rowno, indices, strict):
    try:
        s, e = int(float(row["discourse_start"])), int(float(row["discourse_end"]))
    except ValueError:
        raise ConsistencyError(f"row {rowno}: non-numeric character offsets") from None
    while s < e and s < len(doc.text) and doc.text[s].isspace():
        s += 1
    while e > s and doc.text[e - 1].isspace():
        e -= 1
    by_chars = {i for i, (ws, we) in enumerate(doc.words) if ws < e and we > s}
    if by_chars != indices:
        msg = (f"row {rowno} ({doc.doc_id}): characters [{s}, {e}) cover words "
               f"{_fmt_indices(by_chars)} but predictionstring lists {_fmt_indices(indices)}")
        if strict:
            raise ConsistencyError(msg)
        doc.warnings.append(msg)


def _fmt_indices(ix):
    ix = sorted(ix)
    return f"[{ix[0]}..{ix[-1]}]" if ix else "[]"


# --- HTML essays (ARROW) ----------------------------------------------------

class _ParagraphCollector(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.paragraphs: list[list[tuple[str, tuple]]] = []
        self.loose: list[tuple[str, tuple]] = []
        self.in_p = 0
        self.stack: list[tuple[str, tuple | None]] = []

    def _label(self):
        for _, lab in reversed(self.stack):
            if lab is not None:
                return lab
        return None

    def handle_starttag(self, tag, attrs):
        if tag == "p":
            self.in_p += 1
            self.paragraphs.append([])
        if tag in ("br",):
            self._emit(" ")
            return
        attrs = dict(attrs)
        label = (attrs["data-tag"], attrs.get("data-rater", "human-1")) if "data-tag" in attrs else None
        self.stack.append((tag, label))

    def handle_endtag(self, tag):
        if tag == "p":
            self.in_p = max(0, self.in_p - 1)
        for k in range(len(self.stack) - 1, -1, -1):
            if self.stack[k][0] == tag:
                del self.stack[k:]
                break

    def handle_data(self, data):
        self._emit(data)

    def _emit(self, data):
        lab = self._label()
        target = self.paragraphs[-1] if self.in_p and self.paragraphs else self.loose
        target.extend((ch, lab) for ch in data)


def _collapse(chars):
    out = []
    for ch, lab in chars:
        if ch.isspace():
            if out and out[-1][0] != " ":
                out.append((" ", lab))
        else:
            out.append((ch, lab))
    while out and out[-1][0] == " ":
        out.pop()
    return out


def parse_html_essay(html_content: str, doc_id: str = "essay") -> AnnotatedDocument:
    """Paragraphs from ``<p>`` elements with all other markup stripped.

    Elements carrying a ``data-tag`` attribute (and optional ``data-rater``)
    annotate every sentence whose first character they contain.
    """
    parser = _ParagraphCollector()
    parser.feed(html_content)
    parser.close()
    paras = [_collapse(p) for p in parser.paragraphs]
    paras = [p for p in paras if p]
    fallback = not parser.paragraphs
    if fallback:
        paras = [p for p in [_collapse(parser.loose)] if p]

    chars = []
    ranges = []
    for p in paras:
        if chars:
            chars.append(("\n", None))
        ranges.append((len(chars), len(chars) + len(p)))
        chars.extend(p)
    raw = "".join(ch for ch, _ in chars)
    text = unicodedata.normalize("NFC", raw)
    if text != raw:
        # NFC changed lengths; labels are re-anchored by paragraph only.
        chars = [(ch, None) for ch in text]
        ranges = line_paragraphs(text)
    doc = build_document(doc_id, text, paragraphs=ranges, scheme=SchemeId.ARROW)
    if fallback:
        doc.warnings.append("no paragraph elements; treated the whole fragment as one paragraph")

    for k, (s, _) in enumerate(doc.sentences):
        lab = chars[s][1]
        if lab is not None:
            tag, rater = lab
            doc.spans.append(AnnotationSpan(f"S{k}-{rater}", tag, "sentence", k, k + 1, rater=rater))
    return doc


# --- unit-level tag views -----------------------------------------------------

def sentence_tags(doc: AnnotatedDocument, scheme: TagSet = ARROW, rater: str | None = None) -> list[str]:
    """One tag per sentence.

    With no rater given, resolved spans win, then a pairwise resolution of
    ``human-1``/``human-2``, then whatever single rater is present. Sentences
    without a tag get the scheme's none tag.
    """
    none = scheme.none_tag
    spans = [s for s in doc.spans if s.unit == "sentence"]
    raters = {s.rater for s in spans}
    if rater is None:
        if "resolved" in raters:
            rater = "resolved"
        elif {"human-1", "human-2"} <= raters:
            a = sentence_tags(doc, scheme, "human-1")
            b = sentence_tags(doc, scheme, "human-2")
            return [resolve_pair(x, y, scheme) for x, y in zip(a, b)]
        elif raters:
            rater = sorted(raters)[0]
    tags = [none] * len(doc.sentences)
    for s in spans:
        if s.rater != rater:
            continue
        for k in range(s.start, min(s.end, len(tags))):
            if tags[k] == none:
                tags[k] = s.tag
    return tags


def word_sentence_index(doc: AnnotatedDocument) -> list[int | None]:
    out: list[int | None] = []
    k = 0
    for ws, _ in doc.words:
        while k < len(doc.sentences) and doc.sentences[k][1] <= ws:
            k += 1
        inside = k < len(doc.sentences) and doc.sentences[k][0] <= ws
        out.append(k if inside else None)
    return out


def char_span_word_owner(doc: AnnotatedDocument, spans, rule: str = "majority") -> list[int | None]:
    """For each word, the index (into ``spans``) of the char span that claims it.

    ``majority``: the span covering more than half of the word's characters.
    ``first-char``: the span covering the word's first character, else the
    leftmost span overlapping the word.
    """
    owner: list[int | None] = [None] * len(doc.words)
    order = sorted(range(len(spans)), key=lambda i: (spans[i].start, spans[i].end))
    for w, (ws, we) in enumerate(doc.words):
        for i in order:
            s = spans[i]
            if s.start >= we:
                break
            if s.end <= ws:
                continue
            overlap = min(we, s.end) - max(ws, s.start)
            if rule == "majority":
                if 2 * overlap > we - ws:
                    owner[w] = i
                    break
            elif rule == "first-char":
                if s.start <= ws < s.end:
                    owner[w] = i
                    break
                if owner[w] is None:
                    owner[w] = i
            else:
                raise ValueError(f"unknown projection rule {rule!r}")
    return owner


def word_tags(doc: AnnotatedDocument, scheme: TagSet, rater: str | None = None,
              rule: str = "first-char") -> list[str]:
    """One tag per word, whatever unit the document was annotated at."""
    none = scheme.none_tag if scheme.none_tag is not None else "O"
    spans = [s for s in doc.spans if rater is None or s.rater == rater]
    if spans and all(s.unit == "sentence" for s in spans):
        stags = sentence_tags(doc, scheme, rater)
        return [stags[k] if k is not None else none for k in word_sentence_index(doc)]
    tags = [none] * len(doc.words)
    sent_tags = None
    for s in spans:
        if s.unit == "word-range":
            for w in range(s.start, min(s.end, len(tags))):
                if tags[w] == none:
                    tags[w] = s.tag
        elif s.unit == "sentence" and sent_tags is None:
            sent_tags = sentence_tags(doc, scheme, rater)
    chars = [s for s in spans if s.unit == "char-range"]
    if chars:
        for w, i in enumerate(char_span_word_owner(doc, chars, rule)):
            if i is not None and tags[w] == none:
                tags[w] = chars[i].tag
    if sent_tags is not None:
        for w, k in enumerate(word_sentence_index(doc)):
            if k is not None and tags[w] == none:
                tags[w] = sent_tags[k]
    return tags


def _warn_once(doc: AnnotatedDocument, message: str) -> None:
    if message not in doc.warnings:
        doc.warnings.append(message)


def _boundary_cuts_word(doc: AnnotatedDocument, pos: int) -> bool:
    """True when ``pos`` splits a word with letters or digits on both sides."""
    k = bisect.bisect_right([w[0] for w in doc.words], pos) - 1
    if k < 0:
        return False
    ws, we = doc.words[k]
    if not ws < pos < we:
        return False
    left, right = doc.text[ws:pos], doc.text[pos:we]
    return any(c.isalnum() for c in left) and any(c.isalnum() for c in right)


def component_word_ranges(doc: AnnotatedDocument) -> list[tuple[AnnotationSpan, Range]]:
    """AAE char-range components projected to word ranges by majority overlap."""
    comps = [s for s in doc.spans if s.unit == "char-range"]
    owner = char_span_word_owner(doc, comps, "majority")
    words: dict[int, list[int]] = {}
    for w, i in enumerate(owner):
        if i is not None:
            words.setdefault(i, []).append(w)
    out = []
    for i, span in enumerate(comps):
        ws = words.get(i)
        if not ws:
            _warn_once(doc, f"{span.span_id}: component claims no whole word")
            continue
        if ws != list(range(ws[0], ws[-1] + 1)):
            _warn_once(doc, f"{span.span_id}: non-contiguous word projection")
        cs, ce = span.start, span.end
        # punctuation left outside a component is routine; cut letters are not
        if _boundary_cuts_word(doc, cs):
            _warn_once(doc, f"{span.span_id}: starts inside a word")
        if _boundary_cuts_word(doc, ce):
            _warn_once(doc, f"{span.span_id}: ends inside a word")
        out.append((span, (ws[0], ws[-1] + 1)))
    return out


def bio_labels(doc: AnnotatedDocument) -> list[str]:
    labels = ["O"] * len(doc.words)
    for _, (s, e) in component_word_ranges(doc):
        labels[s] = "B"
        for w in range(s + 1, e):
            labels[w] = "I"
    return labels


def relation_candidates(doc: AnnotatedDocument) -> list[tuple[str, str]]:
    """Ordered pairs of distinct components sharing a paragraph."""
    by_para: dict[int, list[str]] = {}
    for s in doc.spans:
        if s.unit == "char-range":
            by_para.setdefault(doc.paragraph_of_char(s.start), []).append(s)
    out = []
    for p in sorted(by_para):
        comps = sorted(by_para[p], key=lambda s: s.start)
        out.extend((a.span_id, b.span_id) for a in comps for b in comps if a is not b)
    return out


# --- statistics -------------------------------------------------------------

@dataclass
class StatsReport:
    scheme: SchemeId | None
    unit: str
    counts: dict[str, int]
    components: dict[str, int] = field(default_factory=dict)
    relations: dict[str, int] = field(default_factory=dict)
    stances: dict[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def percentages(self, group: str = "counts") -> dict[str, float]:
        table = getattr(self, group)
        total = sum(table.values())
        return {k: (100.0 * v / total if total else 0.0) for k, v in table.items()}


def corpus_stats(corpus: list[AnnotatedDocument], scheme=None) -> StatsReport:
    """Tag distribution at the scheme's native unit.

    ARROW counts sentences, PERSUADE counts words, AAE documents report
    BIO word tags plus component, relation and stance counts.
    """
    schemes = {d.source_scheme for d in corpus}
    if len(schemes) > 1:
        raise CorpusError(f"mixed schemes in one corpus: {sorted(s.value for s in schemes)}")
    if scheme is None:
        scheme = next(iter(schemes)) if schemes else None
    if scheme is None:
        return StatsReport(None, "none", {})
    scheme_id = get_scheme(scheme).scheme

    if scheme_id is SchemeId.ARROW:
        counts = Counter(t for d in corpus for t in sentence_tags(d, ARROW))
        return StatsReport(scheme_id, "sentence", {t: counts.get(t, 0) for t in ARROW.labels})
    if scheme_id is SchemeId.PERSUADE:
        counts = Counter(t for d in corpus for t in word_tags(d, PERSUADE))
        return StatsReport(scheme_id, "word", {t: counts.get(t, 0) for t in PERSUADE.labels})

    bio = Counter(t for d in corpus for t in bio_labels(d))
    comps = Counter(s.tag for d in corpus for s in d.spans if s.unit == "char-range")
    n_pairs = sum(len(relation_candidates(d)) for d in corpus)
    linked = sum(1 for d in corpus for r in d.relations if r.linked)
    stance = Counter(r.stance for d in corpus for r in d.relations if r.stance != "none")
    return StatsReport(
        SchemeId.AAE_COMPONENT, "word",
        counts={t: bio.get(t, 0) for t in AAE_BIO.labels},
        components={t: comps.get(t, 0) for t in AAE_COMPONENT.labels},
        relations={"NotLinked": n_pairs - linked, "Linked": linked},
        stances={"Support": stance.get("support", 0), "Attack": stance.get("attack", 0)},
    )


def format_stats(report: StatsReport, scheme: TagSet | None = None) -> str:
    """Plain-text distribution table (tag, count, percentage)."""
    names = scheme.long_names if scheme is not None else {}
    lines = []

    def block(title, table):
        total = sum(table.values())
        lines.append(f"{title:<24}{'count':>12}{'percent':>10}")
        for tag, n in table.items():
            pct = 100.0 * n / total if total else 0.0
            lines.append(f"{names.get(tag, tag):<24}{n:>12,}{pct:>9.1f}%")
        lines.append(f"{'Total':<24}{total:>12,}{(100.0 if total else 0.0):>9.1f}%")

    block(f"{report.unit} tags", report.counts)
    for title, table in (("components", report.components), ("relations", report.relations),
                         ("stance", report.stances)):
        if table:
            lines.append("")
            block(title, table)
    return "\n".join(lines)


# --- corpus directories -----------------------------------------------------

INDEX_NAME = "index.json"


def write_corpus(docs: list[AnnotatedDocument], out_dir) -> Path:
    """Write canonical document files plus an index; byte-identical on rerun."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for d in docs:
        name = _safe_name(d.doc_id) + ".json"
        (out / name).write_text(d.dumps(), encoding="utf-8")
        entries.append({"doc_id": d.doc_id, "file": name, "scheme": d.source_scheme.value})
    (out / INDEX_NAME).write_text(json.dumps({"documents": entries}, indent=1) + "\n", encoding="utf-8")
    return out


def read_corpus(in_dir) -> list[AnnotatedDocument]:
    root = Path(in_dir)
    index = json.loads((root / INDEX_NAME).read_text(encoding="utf-8"))
    return [AnnotatedDocument.loads((root / e["file"]).read_text(encoding="utf-8"))
            for e in index["documents"]]


def _safe_name(doc_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", doc_id) or "doc"


def iter_files(path, suffix):
    for root, _, files in os.walk(path):
        for f in sorted(files):
            if f.endswith(suffix):
                yield Path(root) / f
