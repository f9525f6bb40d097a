"""Leave-prompt-out seed models, voted synthetic labels and a universal retrain."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace

from .codecs import encode_arrow
from .corpus import AnnotatedDocument, AnnotationSpan
from .encoder import ModelConfig, Params, init_params
from .schemes import ARROW, TagSet, resolve_votes
from .tokenizer import Vocab
from .training import TrainConfig, TrainResult, predict_labels, train

log = logging.getLogger(__name__)


class EnsembleError(ValueError):
    pass


class LeakageError(AssertionError):
    pass


@dataclass(frozen=True)
class ModelSplit:
    train: tuple[str, ...]
    dev: str
    test: str


@dataclass(frozen=True)
class SeedPlan:
    prompts: tuple[str, ...]
    models: tuple[ModelSplit, ...]

    def to_json(self) -> str:
        return json.dumps({"prompts": list(self.prompts),
                           "models": [{"train": list(m.train), "dev": m.dev, "test": m.test}
                                      for m in self.models]}, indent=1)

    @classmethod
    def from_json(cls, content: str) -> "SeedPlan":
        d = json.loads(content)
        plan = cls(tuple(d["prompts"]),
                   tuple(ModelSplit(tuple(m["train"]), m["dev"], m["test"]) for m in d["models"]))
        plan.check()
        return plan

    def check(self) -> None:
        for i, m in enumerate(self.models):
            if m.dev == m.test or {m.dev, m.test} & set(m.train):
                raise LeakageError(f"model {i}: dev/test prompt appears in its training prompts")


def build_seed_plan(prompts, k: int = 5) -> SeedPlan:
    """Model ``i`` tests on prompt ``i``, develops on the next prompt, trains on the rest."""
    prompts = tuple(prompts)
    n = len(prompts)
    if len(set(prompts)) != n:
        raise EnsembleError("prompt ids must be distinct")
    if k < 1 or n < 3 or k > n:
        raise EnsembleError(f"need at least 3 prompts and 1 <= k <= {n}; got k={k}")
    models = []
    for i in range(k):
        test, dev = prompts[i], prompts[(i + 1) % n]
        models.append(ModelSplit(tuple(p for p in prompts if p not in (test, dev)), dev, test))
    plan = SeedPlan(prompts, tuple(models))
    plan.check()
    return plan


def _prompt(doc: AnnotatedDocument) -> str:
    try:
        return doc.meta["prompt"]
    except KeyError:
        raise EnsembleError(f"{doc.doc_id}: document has no prompt id") from None


def split_for_model(docs, split: ModelSplit):
    """Documents for training, dev and test; raises on any cross-over."""
    train_docs = [d for d in docs if _prompt(d) in split.train]
    dev_docs = [d for d in docs if _prompt(d) == split.dev]
    test_docs = [d for d in docs if _prompt(d) == split.test]
    held = {d.doc_id for d in test_docs}
    if held & {d.doc_id for d in train_docs + dev_docs}:
        raise LeakageError(f"test documents leak into training for prompt {split.test}")
    return train_docs, dev_docs, test_docs


def train_seed_models(docs, vocab: Vocab, plan: SeedPlan, model_config: ModelConfig,
                      train_config: TrainConfig) -> list[TrainResult]:
    results = []
    for i, split in enumerate(plan.models):
        train_docs, dev_docs, _ = split_for_model(docs, split)
        if not train_docs:
            raise EnsembleError(f"model {i} has no training documents")
        params = init_params(model_config, seed=train_config.seed + i)
        cfg = replace(train_config, seed=train_config.seed + i)
        log.info("seed model %d: %d train, %d dev docs", i, len(train_docs), len(dev_docs))
        results.append(train(params, [encode_arrow(d, vocab) for d in train_docs], cfg,
                             dev_examples=[encode_arrow(d, vocab) for d in dev_docs] or None))
    return results


def predict_sentence_tags(params: Params, doc: AnnotatedDocument, vocab: Vocab,
                          scheme: TagSet = ARROW) -> list[str]:
    ex = encode_arrow(doc.with_spans([], []), vocab, scheme)
    return [scheme.labels[i] for i in predict_labels(params, ex)]


def synthesize_labels(models, docs, vocab: Vocab, scheme: TagSet = ARROW) -> list[AnnotatedDocument]:
    """Every sentence gets the hierarchy-resolved tag of the models' votes.

    Spans are written with rater ``resolved`` and keep the raw votes in
    model order.
    """
    models = list(models)
    if not models:
        raise EnsembleError("no models")
    for m in models:
        if m.config.num_labels != scheme.num_labels:
            raise EnsembleError(f"model predicts {m.config.num_labels} labels, "
                                f"scheme {scheme.scheme.value} has {scheme.num_labels}")
        if m.config.vocab_size < len(vocab):
            raise EnsembleError("model vocabulary is smaller than the tokenizer's")
    out = []
    for doc in docs:
        votes = [predict_sentence_tags(m, doc, vocab, scheme) for m in models]
        spans = []
        for k in range(len(doc.sentences)):
            vk = tuple(v[k] for v in votes)
            spans.append(AnnotationSpan(f"S{k}", resolve_votes(vk, scheme), "sentence", k, k + 1,
                                        rater="resolved", votes=vk))
        out.append(doc.with_spans(spans, []))
    return out


def vote_table(docs) -> list[dict]:
    """One row per sentence with the resolved tag and every raw vote."""
    rows = []
    for doc in docs:
        for s in doc.spans:
            if s.rater == "resolved" and s.votes is not None:
                row = {"doc_id": doc.doc_id, "sentence": s.start, "resolved": s.tag}
                row.update({f"vote_{i}": v for i, v in enumerate(s.votes)})
                rows.append(row)
    return rows


def train_universal(synthetic_docs, vocab: Vocab, model_config: ModelConfig,
                    train_config: TrainConfig, dev_docs=None) -> TrainResult:
    if not synthetic_docs:
        raise EnsembleError("empty synthetic corpus")
    params = init_params(model_config, seed=train_config.seed)
    examples = [encode_arrow(d, vocab) for d in synthetic_docs]
    dev = [encode_arrow(d, vocab) for d in dev_docs] if dev_docs else None
    return train(params, examples, train_config, dev_examples=dev)


@dataclass
class EnsembleRun:
    plan: SeedPlan
    seed_results: list[TrainResult]
    synthetic: list[AnnotatedDocument]
    universal: TrainResult
    notes: list[str] = field(default_factory=list)


def run_protocol(labeled_docs, unlabeled_docs, vocab: Vocab, model_config: ModelConfig,
                 train_config: TrainConfig, k: int = 5) -> EnsembleRun:
    """Seed models on the labeled prompts, voted labels on the unlabeled essays, one universal model."""
    prompts = sorted({_prompt(d) for d in labeled_docs})
    plan = build_seed_plan(prompts, k)
    seeds = train_seed_models(labeled_docs, vocab, plan, model_config, train_config)
    synthetic = synthesize_labels([r.params for r in seeds], unlabeled_docs, vocab)
    universal = train_universal(synthetic, vocab, model_config, train_config)
    return EnsembleRun(plan, seeds, synthetic, universal)
