"""Seeded toy essays with learnable sentence-level ARROW tags.

Each tag has its own sentence templates with cue words, so a small model
can learn the mapping. Prompts differ by topic vocabulary only.
"""

from __future__ import annotations

import numpy as np

from .corpus import AnnotatedDocument, AnnotationSpan, build_document
from .schemes import SchemeId

TOPICS = (
    ("school uniforms", "students", "classrooms"),
    ("online classes", "teachers", "computers"),
    ("community service", "volunteers", "neighbors"),
    ("summer projects", "families", "libraries"),
    ("cell phones", "drivers", "roads"),
    ("extracurricular sports", "coaches", "teams"),
    ("space exploration", "scientists", "rockets"),
    ("electric cars", "engineers", "batteries"),
    ("later start times", "parents", "buses"),
)

TEMPLATES = {
    "I1": ("Many people today talk about {t}.",
           "Have you ever thought about {t} and {a}?",
           "Everyone has an opinion about {t} these days."),
    "I2": ("I believe that {t} should be required for {a}.",
           "In my opinion {t} are good for {a}.",
           "My position is that {a} benefit from {t}."),
    "E1": ("For example my friend used {t} with {b} last year.",
           "Studies show that {a} with {t} score higher.",
           "For instance one of our {b} tried {t} and it worked."),
    "E2": ("This shows that {t} really help {a} grow.",
           "Because of this {a} feel more confident every day.",
           "That means {b} become better places for everyone."),
    "O": ("Some people argue that {t} waste time for {a}.",
          "Others say that {t} cost too much money.",
          "Critics claim {a} do not need {t} at all."),
    "C": ("In conclusion {t} are worth it for {a}.",
          "To sum up {a} and {b} gain from {t}.",
          "Overall it is clear that {t} matter."),
    "T": ("Furthermore there is another reason.",
          "Next let us look at the other side.",
          "Finally we should consider one more point."),
    "None": ("Okay.", "Thanks for reading.", "Um well yes."),
}

# paragraph plans: list of tag sequences
_PLANS = (
    (("I1", "I2"), ("T", "E1", "E2"), ("O", "E2"), ("C",)),
    (("I1", "I2"), ("T", "E1", "E1", "E2"), ("C", "None")),
    (("I2",), ("E1", "E2"), ("T", "O", "E1"), ("C",)),
)


def _sentence(tag: str, topic, rng) -> str:
    options = TEMPLATES[tag]
    template = options[int(rng.integers(len(options)))]
    t, a, b = topic
    return template.format(t=t, a=a, b=b)


def synthetic_essay(doc_id: str, prompt: int, rng, plan=None) -> AnnotatedDocument:
    """One essay whose sentences carry the tags of ``plan`` (a random plan if None)."""
    topic = TOPICS[prompt % len(TOPICS)]
    plan = plan if plan is not None else _PLANS[int(rng.integers(len(_PLANS)))]
    paragraphs = []
    tags = []
    for para in plan:
        paragraphs.append(" ".join(_sentence(tag, topic, rng) for tag in para))
        tags.extend(para)
    text = "\n".join(paragraphs)
    doc = build_document(doc_id, text, scheme=SchemeId.ARROW, meta={"prompt": f"prompt-{prompt}"})
    if len(doc.sentences) != len(tags):
        raise AssertionError(f"{doc_id}: template sentences did not split as planned")
    spans = [AnnotationSpan(f"S{k}", tag, "sentence", k, k + 1) for k, tag in enumerate(tags) if tag != "None"]
    return doc.with_spans(spans)


def synthetic_arrow_corpus(n_essays: int, prompts: int = 5, seed: int = 0,
                           single_tag: bool = False) -> list[AnnotatedDocument]:
    """``n_essays`` essays spread round-robin over ``prompts`` prompts.

    ``single_tag`` gives each essay one tag throughout (cycled over the tags).
    """
    rng = np.random.default_rng(seed)
    tags = ("I1", "I2", "E1", "E2", "O", "C", "T")
    docs = []
    for i in range(n_essays):
        plan = None
        if single_tag:
            tag = tags[i % len(tags)]
            plan = ((tag, tag), (tag, tag, tag))
        docs.append(synthetic_essay(f"essay-{i:04d}", i % prompts, rng, plan))
    return docs


def strip_annotations(docs) -> list[AnnotatedDocument]:
    return [d.with_spans([], []) for d in docs]


def corpus_text(docs) -> list[str]:
    return [d.text for d in docs]
