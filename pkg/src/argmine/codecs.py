"""Model inputs and targets for the six annotation tasks.

Token tasks put a label on one position per unit (the mask in front of a
sentence, or the first subword of a word) and mark every other position
with :data:`IGNORE`. Sequence tasks (relation, stance) carry their single
label on the class token. Paragraphs are closed by a separator token.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field

from .corpus import (
    AnnotatedDocument,
    ArgRelation,
    CorpusError,
    bio_labels,
    component_word_ranges,
    relation_candidates,
    sentence_tags,
    word_sentence_index,
    word_tags,
)
from .schemes import (
    AAE_BIO,
    AAE_COMPONENT,
    AAE_RELATION,
    AAE_STANCE,
    ARROW,
    PERSUADE,
    TagSet,
    orphan_inside_positions,
)
from .tokenizer import Vocab

log = logging.getLogger(__name__)

IGNORE = -100

TASK_SCHEMES: dict[str, TagSet] = {
    "arrow_sentence": ARROW,
    "persuade_word": PERSUADE,
    "aae_bio": AAE_BIO,
    "aae_component": AAE_COMPONENT,
    "aae_relation": AAE_RELATION,
    "aae_stance": AAE_STANCE,
}
SEQUENCE_TASKS = frozenset({"aae_relation", "aae_stance"})


class CodecError(ValueError):
    pass


@dataclass
class EncodedExample:
    input_ids: list[int]
    target_ids: list[int]
    labeled_positions: list[int]
    task: str
    doc_id: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.input_ids) != len(self.target_ids):
            raise CodecError("input and target lengths differ")
        actual = [i for i, t in enumerate(self.target_ids) if t != IGNORE]
        if actual != list(self.labeled_positions):
            raise CodecError("labeled positions disagree with non-ignored targets")
        if self.task not in TASK_SCHEMES:
            raise CodecError(f"unknown task {self.task!r}")

    @property
    def head(self) -> str:
        return "sequence" if self.task in SEQUENCE_TASKS else "label"

    @property
    def scheme(self) -> TagSet:
        return TASK_SCHEMES[self.task]

    def labels(self) -> list[int]:
        return [self.target_ids[i] for i in self.labeled_positions]

    def truncated(self, max_tokens: int) -> "EncodedExample":
        """Prefix of at most ``max_tokens``; sequence tasks keep their closing ``<cls><sep>``."""
        n = len(self.input_ids)
        if n <= max_tokens:
            return self
        if self.head == "sequence":
            keep = list(range(max_tokens - 2)) + [n - 2, n - 1]
        else:
            keep = list(range(max_tokens))
        ids = [self.input_ids[i] for i in keep]
        tgt = [self.target_ids[i] for i in keep]
        return EncodedExample(ids, tgt, [i for i, t in enumerate(tgt) if t != IGNORE],
                              self.task, self.doc_id, dict(self.meta))


def _example(ids, tgt, task, doc_id, **meta) -> EncodedExample:
    return EncodedExample(ids, tgt, [i for i, t in enumerate(tgt) if t != IGNORE], task, doc_id, meta)


def _paragraph_words(doc: AnnotatedDocument) -> list[list[int]]:
    out = [[] for _ in doc.paragraphs]
    p = 0
    for w, (ws, _) in enumerate(doc.words):
        while p < len(doc.paragraphs) and doc.paragraphs[p][1] <= ws:
            p += 1
        if p == len(doc.paragraphs):
            raise CorpusError(f"{doc.doc_id}: word {w} lies outside every paragraph")
        out[p].append(w)
    return out


def encode_arrow(doc: AnnotatedDocument, vocab: Vocab, scheme: TagSet = ARROW,
                 rater: str | None = None) -> EncodedExample:
    """``<mask>`` before every sentence, ``<sep>`` after every paragraph, ``<cls>`` last."""
    tags = sentence_tags(doc, scheme, rater)
    sent_of_word = word_sentence_index(doc)
    ids, tgt = [], []
    mask_pos = []
    for words in _paragraph_words(doc):
        current = None
        for w in words:
            k = sent_of_word[w]
            if k != current:
                current = k
                mask_pos.append(len(ids))
                ids.append(vocab.mask)
                tgt.append(scheme.label_id(tags[k]))
            pieces = vocab.encode_word(doc.word_text(w))
            ids.extend(pieces)
            tgt.extend([IGNORE] * len(pieces))
        ids.append(vocab.sep)
        tgt.append(IGNORE)
    if not doc.paragraphs:
        ids.append(vocab.sep)
        tgt.append(IGNORE)
    ids.append(vocab.cls)
    tgt.append(IGNORE)
    return _example(ids, tgt, "arrow_sentence", doc.doc_id)


def _encode_word_labels(doc, vocab, labels, task, **meta) -> EncodedExample:
    ids, tgt, first = [], [], []
    for words in _paragraph_words(doc):
        for w in words:
            pieces = vocab.encode_word(doc.word_text(w))
            first.append(len(ids))
            ids.extend(pieces)
            tgt.append(labels[w])
            tgt.extend([IGNORE] * (len(pieces) - 1))
        ids.append(vocab.sep)
        tgt.append(IGNORE)
    if not doc.paragraphs:
        ids.append(vocab.sep)
        tgt.append(IGNORE)
    ids.append(vocab.cls)
    tgt.append(IGNORE)
    return _example(ids, tgt, task, doc.doc_id, word_positions=first, **meta)


def encode_persuade(doc: AnnotatedDocument, vocab: Vocab, scheme: TagSet = PERSUADE,
                    rater: str | None = None) -> EncodedExample:
    tags = word_tags(doc, scheme, rater)
    return _encode_word_labels(doc, vocab, [scheme.label_id(t) for t in tags], "persuade_word")


def encode_aae_bio(doc: AnnotatedDocument, vocab: Vocab) -> EncodedExample:
    labels = bio_labels(doc)
    for msg in doc.warnings:
        log.debug("%s: %s", doc.doc_id, msg)
    return _encode_word_labels(doc, vocab, [AAE_BIO.label_id(t) for t in labels], "aae_bio")


def decode_bio(labels) -> list[tuple[int, int]]:
    """Maximal B-initiated runs as half-open word ranges.

    An ``I`` with no preceding ``B`` or ``I`` opens a new component and is
    logged as a warning.
    """
    orphans = set(orphan_inside_positions(labels))
    out = []
    start = None
    for i, lab in enumerate(labels):
        if lab == "B" or i in orphans:
            if i in orphans:
                log.warning("orphan I at word %d opens a component", i)
            if start is not None:
                out.append((start, i))
            start = i
        elif lab == "O":
            if start is not None:
                out.append((start, i))
            start = None
        elif lab != "I":
            raise CodecError(f"label {lab!r} is not B, I or O")
    if start is not None:
        out.append((start, len(labels)))
    return out


def spans_to_bio(ranges, n_words: int) -> list[str]:
    labels = ["O"] * n_words
    for s, e in ranges:
        labels[s] = "B"
        for w in range(s + 1, e):
            labels[w] = "I"
    return labels


def gold_components(doc: AnnotatedDocument) -> list[tuple[int, int]]:
    return [rng for _, rng in component_word_ranges(doc)]


def encode_aae_component(doc: AnnotatedDocument, components, vocab: Vocab,
                         strategy: str = "block") -> EncodedExample:
    """Class labels on the words of each component block.

    ``block``: every word's first subword carries the gold class of the
    component it belongs to; predictions are decoded by majority per block.
    ``b_position``: only the first word of each block is labeled.
    Blocks that do not overlap any gold component stay in the block map but
    carry no target.
    """
    if strategy not in ("block", "b_position"):
        raise CodecError(f"unknown component strategy {strategy!r}")
    gold = [None] * len(doc.words)
    for span, (s, e) in component_word_ranges(doc):
        for w in range(s, e):
            gold[w] = AAE_COMPONENT.label_id(span.tag)
    labels = [IGNORE] * len(doc.words)
    block_words = []
    for s, e in components:
        words = list(range(s, e))
        block_words.append(words)
        chosen = words if strategy == "block" else words[:1]
        for w in chosen:
            if gold[w] is not None:
                labels[w] = gold[w]
    ex = _encode_word_labels(doc, vocab, labels, "aae_component", strategy=strategy)
    first = ex.meta["word_positions"]
    ex.meta["blocks"] = [[first[w] for w in (ws if strategy == "block" else ws[:1])] for ws in block_words]
    ex.meta["components"] = [list(c) for c in components]
    return ex


def majority_label(votes, scheme: TagSet = AAE_COMPONENT) -> str:
    """Most frequent label; ties go to the earlier label in declaration order."""
    counts = Counter(votes)
    top = max(counts.values())
    return min((t for t, c in counts.items() if c == top), key=scheme.labels.index)


def decode_components(predicted: dict[int, str], blocks) -> list[str]:
    """One class per block from position-level predictions."""
    return [majority_label([predicted[p] for p in block]) for block in blocks]


# --- relation and stance ------------------------------------------------------

def _component_words(doc) -> dict[str, tuple[int, int]]:
    return {span.span_id: rng for span, rng in component_word_ranges(doc)}


def _marked_paragraphs(doc, vocab, paragraphs, marks: dict[int, list[tuple[int, str]]]):
    """Token ids for the given paragraphs with marked component word ranges."""
    para_words = _paragraph_words(doc)
    ids = []
    for p in paragraphs:
        words = para_words[p]
        k = 0
        while k < len(words):
            w = words[k]
            hit = marks.get(w)
            if hit:
                end, role = hit[0]
                marker = vocab.source_marker if role == "source" else vocab.target_marker
                ids.extend([vocab.sep, marker, vocab.colon()])
                for ww in range(w, end):
                    ids.extend(vocab.encode_word(doc.word_text(ww)))
                ids.append(vocab.sep)
                k += end - w
                continue
            ids.extend(vocab.encode_word(doc.word_text(w)))
            k += 1
        if p != paragraphs[-1]:
            ids.append(vocab.sep)
    return ids


def _sequence_example(ids, vocab, label_id, task, doc_id, **meta):
    ids = ids + [vocab.cls, vocab.sep]
    tgt = [IGNORE] * len(ids)
    tgt[-2] = label_id
    return _example(ids, tgt, task, doc_id, **meta)


def encode_aae_relation(doc: AnnotatedDocument, source: str, target: str, vocab: Vocab) -> EncodedExample:
    """Paragraph text with ``<sep><Source>:…<sep>`` and ``<sep><Target>:…<sep>`` inserts."""
    if source == target:
        raise CodecError("source and target must differ")
    words = _component_words(doc)
    try:
        src, tgt = words[source], words[target]
    except KeyError as exc:
        raise CodecError(f"{doc.doc_id}: component {exc.args[0]} has no word projection") from None
    if src[0] < tgt[1] and tgt[0] < src[1]:
        raise CodecError(f"{doc.doc_id}: components {source} and {target} overlap")
    sp = doc.paragraph_of_char(doc.words[src[0]][0])
    tp = doc.paragraph_of_char(doc.words[tgt[0]][0])
    if sp != tp:
        raise CodecError(f"{doc.doc_id}: {source} and {target} lie in different paragraphs")
    marks = {src[0]: [(src[1], "source")], tgt[0]: [(tgt[1], "target")]}
    ids = _marked_paragraphs(doc, vocab, [sp], marks)
    linked = any(r.linked and r.source == source and r.target == target for r in doc.relations)
    label = AAE_RELATION.label_id("Linked" if linked else "NotLinked")
    return _sequence_example(ids, vocab, label, "aae_relation", doc.doc_id, pair=[source, target])


def relation_examples(doc: AnnotatedDocument, vocab: Vocab) -> list[EncodedExample]:
    projected = _component_words(doc)
    out = []
    for a, b in relation_candidates(doc):
        if a in projected and b in projected:
            out.append(encode_aae_relation(doc, a, b, vocab))
    return out


def encode_aae_stance(doc: AnnotatedDocument, item: ArgRelation, vocab: Vocab) -> EncodedExample | None:
    """Stance input for a linked pair, or for a claim against the major-claim paragraphs.

    For a claim (relation with no target) the claim's paragraph and every
    paragraph holding a major claim are joined in document order, with the
    claim marked as source and each major claim as target. Returns ``None``
    (with a warning) when the essay has no major claim.
    """
    words = _component_words(doc)
    label = AAE_STANCE.label_id("Support" if item.stance == "support" else "Attack")
    if item.target is not None:
        if item.stance == "none":
            raise CodecError("relation carries no stance")
        ex = encode_aae_relation(doc, item.source, item.target, vocab)
        ids = ex.input_ids[:-2]
        return _sequence_example(ids, vocab, label, "aae_stance", doc.doc_id, pair=[item.source, item.target])

    if item.source not in words:
        raise CodecError(f"{doc.doc_id}: claim {item.source} has no word projection")
    majors = [s for s in doc.spans if s.tag == "MC" and s.span_id in words]
    if not majors:
        log.warning("%s: claim %s has no major claim to attach to; skipped", doc.doc_id, item.source)
        return None
    src = words[item.source]
    marks = {src[0]: [(src[1], "source")]}
    paras = {doc.paragraph_of_char(doc.words[src[0]][0])}
    for mc in majors:
        s, e = words[mc.span_id]
        marks.setdefault(s, [(e, "target")])
        paras.add(doc.paragraph_of_char(doc.words[s][0]))
    ids = _marked_paragraphs(doc, vocab, sorted(paras), marks)
    return _sequence_example(ids, vocab, label, "aae_stance", doc.doc_id,
                             pair=[item.source, [m.span_id for m in majors]])


def stance_examples(doc: AnnotatedDocument, vocab: Vocab) -> list[EncodedExample]:
    out = []
    for r in doc.relations:
        if r.stance == "none":
            continue
        ex = encode_aae_stance(doc, r, vocab)
        if ex is not None:
            out.append(ex)
    return out


def encode_document(doc: AnnotatedDocument, vocab: Vocab, task: str) -> list[EncodedExample]:
    """All examples a document yields for ``task``."""
    if task == "arrow_sentence":
        return [encode_arrow(doc, vocab)]
    if task == "persuade_word":
        return [encode_persuade(doc, vocab)]
    if task == "aae_bio":
        return [encode_aae_bio(doc, vocab)]
    if task == "aae_component":
        return [encode_aae_component(doc, gold_components(doc), vocab)]
    if task == "aae_relation":
        return relation_examples(doc, vocab)
    if task == "aae_stance":
        return stance_examples(doc, vocab)
    raise CodecError(f"unknown task {task!r}")


def render_example(ex: EncodedExample, vocab: Vocab) -> str:
    """Three aligned rows: tokens, targets (``<->`` where ignored) and positions."""
    scheme = ex.scheme
    toks = [vocab.piece(t) for t in ex.input_ids]
    tgts = ["<->" if t == IGNORE else scheme.labels[t] for t in ex.target_ids]
    pos = [str(i) for i in range(len(toks))]
    widths = [max(len(a), len(b), len(c)) for a, b, c in zip(toks, tgts, pos)]
    rows = []
    for row in (toks, tgts, pos):
        rows.append(" ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(rows)


def unit_positions(ex: EncodedExample) -> list[int]:
    """Positions whose predictions make up the example's units."""
    if ex.task == "aae_component":
        return sorted({p for block in ex.meta["blocks"] for p in block})
    return list(ex.labeled_positions)


def unit_labels(ex: EncodedExample, predicted: dict[int, int] | None = None) -> list[str]:
    """Unit-level tag names: gold targets, or ``predicted`` label ids by position.

    Units are sentences, words, component blocks or the single sequence
    label, depending on the task. A component block with no gold word is
    reported as ``None``.
    """
    scheme = ex.scheme
    if ex.task == "aae_component":
        out = []
        for block in ex.meta["blocks"]:
            if predicted is None:
                votes = [scheme.labels[ex.target_ids[p]] for p in block if ex.target_ids[p] != IGNORE]
            else:
                votes = [scheme.labels[predicted[p]] for p in block]
            out.append(majority_label(votes) if votes else "None")
        return out
    ids = [ex.target_ids[p] if predicted is None else predicted[p] for p in ex.labeled_positions]
    return [scheme.labels[i] for i in ids]


def gold_unit_labels(doc: AnnotatedDocument, task: str) -> list[str]:
    """Reference unit labels in the same order prediction emits them."""
    plain = Vocab([])
    return [t for ex in encode_document(doc, plain, task) for t in unit_labels(ex)]
