"""Tag inventories for the three annotation schemes and vote resolution.

ARROW is sentence-level with a resolution hierarchy used when two raters
(or several models) disagree. PERSUADE and the four AAE tasks have no
hierarchy; their ties fall back to tag-declaration order.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class SchemeId(str, enum.Enum):
    ARROW = "ARROW"
    PERSUADE = "PERSUADE"
    AAE_BIO = "AAE_BIO"
    AAE_COMPONENT = "AAE_COMPONENT"
    AAE_RELATION = "AAE_RELATION"
    AAE_STANCE = "AAE_STANCE"


class SchemeError(ValueError):
    """Raised for tags or votes that do not fit a tag set."""


@dataclass(frozen=True)
class TagSet:
    scheme: SchemeId
    tags: tuple[str, ...]
    none_tag: str | None = None
    hierarchy: tuple[str, ...] = ()
    # Total order used to break ties. Defaults to hierarchy followed by the
    # remaining tags in declaration order, then the none tag.
    tie_order: tuple[str, ...] = ()
    long_names: dict[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(set(self.hierarchy)) != len(self.hierarchy):
            raise SchemeError(f"{self.scheme}: duplicate tags in hierarchy")
        unknown = set(self.hierarchy) - set(self.tags)
        if unknown:
            raise SchemeError(f"{self.scheme}: hierarchy tags {sorted(unknown)} not in tag set")
        if not self.tie_order:
            rest = [t for t in self.tags if t not in self.hierarchy]
            order = list(self.hierarchy) + rest
            if self.none_tag is not None:
                order.append(self.none_tag)
            object.__setattr__(self, "tie_order", tuple(order))
        if set(self.tie_order) != set(self.labels):
            raise SchemeError(f"{self.scheme}: tie order must be a permutation of the labels")

    @property
    def labels(self) -> tuple[str, ...]:
        """Model output inventory: the tags plus the none tag, if any."""
        if self.none_tag is None:
            return self.tags
        return self.tags + (self.none_tag,)

    @property
    def num_labels(self) -> int:
        return len(self.labels)

    def label_id(self, tag: str) -> int:
        try:
            return self.labels.index(tag)
        except ValueError:
            raise SchemeError(f"tag {tag!r} not in {self.scheme.value}") from None

    def rank(self, tag: str) -> int:
        try:
            return self.tie_order.index(tag)
        except ValueError:
            raise SchemeError(f"tag {tag!r} not in {self.scheme.value}") from None

    def expand(self, tag: str) -> str:
        """Canonical short tag for a long name (``"Lead"`` -> ``"L"``)."""
        if tag in self.labels:
            return tag
        for short, name in self.long_names.items():
            if name == tag:
                return short
        raise SchemeError(f"tag {tag!r} not in {self.scheme.value}")


ARROW = TagSet(
    SchemeId.ARROW,
    tags=("I1", "I2", "E1", "E2", "O", "C", "T"),
    none_tag="None",
    hierarchy=("I2", "O", "E1", "E2", "T"),
    # I1 and C sit outside the raters' hierarchy; they are placed so that
    # ensemble ties stay deterministic.
    tie_order=("I1", "I2", "O", "E1", "E2", "T", "C", "None"),
    long_names={
        "I1": "Introduction", "I2": "Controlling Idea", "E1": "Evidence",
        "E2": "Elaboration", "O": "Opposing Position", "C": "Conclusion",
        "T": "Transitions", "None": "None",
    },
)

PERSUADE = TagSet(
    SchemeId.PERSUADE,
    tags=("L", "P", "C1", "C2", "R", "E", "C3"),
    none_tag="None",
    long_names={
        "L": "Lead", "P": "Position", "C1": "Claim", "C2": "Counterclaim",
        "R": "Rebuttal", "E": "Evidence", "C3": "Concluding Statement", "None": "None",
    },
)

AAE_BIO = TagSet(SchemeId.AAE_BIO, tags=("B", "I", "O"))

AAE_COMPONENT = TagSet(
    SchemeId.AAE_COMPONENT,
    tags=("MC", "Cl", "Pr"),
    long_names={"MC": "MajorClaim", "Cl": "Claim", "Pr": "Premise"},
)

AAE_RELATION = TagSet(SchemeId.AAE_RELATION, tags=("Linked", "NotLinked"))

AAE_STANCE = TagSet(SchemeId.AAE_STANCE, tags=("Support", "Attack"))

REGISTRY: dict[SchemeId, TagSet] = {
    t.scheme: t for t in (ARROW, PERSUADE, AAE_BIO, AAE_COMPONENT, AAE_RELATION, AAE_STANCE)
}


def get_scheme(scheme: SchemeId | str | TagSet) -> TagSet:
    if isinstance(scheme, TagSet):
        return scheme
    try:
        return REGISTRY[SchemeId(scheme)]
    except ValueError:
        raise SchemeError(f"unknown scheme {scheme!r}") from None


def load_scheme_file(path) -> TagSet:
    """Read a declarative scheme file.

    The file is JSON with keys ``name`` (one of the scheme ids), ``tags``,
    and optionally ``none_tag``, ``hierarchy`` and ``tie_order``.
    """
    with open(path, encoding="utf-8") as fh:
        spec = json.load(fh)
    try:
        return TagSet(
            SchemeId(spec["name"]),
            tags=tuple(spec["tags"]),
            none_tag=spec.get("none_tag"),
            hierarchy=tuple(spec.get("hierarchy", ())),
            tie_order=tuple(spec.get("tie_order", ())),
            long_names=dict(spec.get("long_names", {})),
        )
    except KeyError as exc:
        raise SchemeError(f"{path}: missing key {exc.args[0]!r}") from None


def resolve_pair(tag_a: str, tag_b: str, scheme: TagSet) -> str:
    """Resolve two raters' tags: agreement wins, otherwise the earlier tag in the tie order."""
    ra, rb = scheme.rank(tag_a), scheme.rank(tag_b)
    return tag_a if ra <= rb else tag_b


def resolve_votes(votes: Sequence[str], scheme: TagSet) -> str:
    if not votes:
        raise SchemeError("cannot resolve an empty vote list")
    counts = Counter(votes)
    top = max(counts.values())
    tied = [t for t, c in counts.items() if c == top]
    return min(tied, key=scheme.rank)


def orphan_inside_positions(labels: Iterable[str]) -> list[int]:
    """Indices of ``I`` labels that are not preceded by ``B`` or ``I``."""
    out = []
    prev = "O"
    for i, lab in enumerate(labels):
        if lab == "I" and prev not in ("B", "I"):
            out.append(i)
        prev = lab
    return out


def validate_annotation(doc, scheme: TagSet | SchemeId | str) -> list[str]:
    """Structural checks on a document's spans; returns human-readable violations."""
    scheme = get_scheme(scheme)
    violations = []
    allowed = set(scheme.labels)
    for span in doc.spans:
        if span.tag not in allowed:
            violations.append(f"{span.span_id}: tag {span.tag!r} not in {scheme.scheme.value}")

    by_key: dict[tuple, list] = {}
    for span in doc.spans:
        by_key.setdefault((span.unit, span.rater), []).append(span)
    for group in by_key.values():
        group = sorted(group, key=lambda s: (s.start, s.end))
        for a, b in zip(group, group[1:]):
            if b.start < a.end:
                violations.append(f"{a.span_id}/{b.span_id}: overlapping {a.unit} spans")

    if scheme.scheme is SchemeId.AAE_BIO:
        word_spans = sorted((s for s in doc.spans if s.unit == "word-range"), key=lambda s: s.start)
        labels = ["O"] * len(doc.words)
        for s in word_spans:
            for w in range(s.start, min(s.end, len(labels))):
                labels[w] = s.tag
        for i in orphan_inside_positions(labels):
            violations.append(f"word {i}: I tag without an opening B")
    return violations
