import numpy as np
import pytest

from argmine.encoder import ModelConfig, init_params
from argmine.ensemble import (
    EnsembleError,
    LeakageError,
    ModelSplit,
    SeedPlan,
    build_seed_plan,
    run_protocol,
    split_for_model,
    synthesize_labels,
    vote_table,
)
from argmine.schemes import ARROW
from argmine.synthetic import strip_annotations, synthetic_arrow_corpus
from argmine.tokenizer import Vocab, train_vocab
from argmine.training import TrainConfig

PROMPTS = [f"p{i}" for i in range(9)]
CFG = ModelConfig(layers=1, heads=1, width=8, segment_len=32, vocab_size=16, num_labels=ARROW.num_labels)


def constant_model(tag, seed=0):
    """A model whose head ignores its input and always picks ``tag``."""
    p = init_params(CFG, seed)
    p.arrays["label_head.w"][:] = 0.0
    p.arrays["label_head.b"][:] = 0.0
    p.arrays["label_head.b"][ARROW.label_id(tag)] = 1.0
    return p


def test_plan_for_nine_prompts():
    plan = build_seed_plan(PROMPTS, 5)
    assert len(plan.models) == 5
    for i, m in enumerate(plan.models):
        assert m.test == f"p{i}" and m.dev == f"p{i + 1}"
        assert len(m.train) == 7 and m.test not in m.train and m.dev not in m.train
    assert len({m.test for m in plan.models}) == 5


def test_plan_edges():
    assert len(build_seed_plan(PROMPTS, 1).models) == 1
    last = build_seed_plan(PROMPTS, 9).models[-1]
    assert (last.test, last.dev) == ("p8", "p0")
    for bad in (0, 10):
        with pytest.raises(EnsembleError):
            build_seed_plan(PROMPTS, bad)
    with pytest.raises(EnsembleError):
        build_seed_plan(["a", "b"], 1)
    with pytest.raises(EnsembleError):
        build_seed_plan(["a", "a", "b"], 1)


def test_plan_json_round_trip():
    plan = build_seed_plan(PROMPTS, 5)
    assert SeedPlan.from_json(plan.to_json()) == plan


def test_leaky_plan_rejected():
    leaky = SeedPlan(("a", "b", "c"), (ModelSplit(("a", "b"), "b", "c"),))
    with pytest.raises(LeakageError):
        leaky.check()
    with pytest.raises(LeakageError):
        SeedPlan.from_json(leaky.to_json())


def test_split_detects_shared_documents():
    docs = synthetic_arrow_corpus(6, prompts=3, seed=0)
    split = ModelSplit(("prompt-0",), "prompt-1", "prompt-2")
    tr, dev, te = split_for_model(docs, split)
    assert {d.meta["prompt"] for d in te} == {"prompt-2"} and tr and dev
    clone = te[0].with_spans(te[0].spans)
    clone.meta = {**te[0].meta, "prompt": "prompt-0"}
    with pytest.raises(LeakageError):
        split_for_model(docs + [clone], split)


def test_unanimous_and_tied_votes():
    vocab = Vocab([])
    docs = strip_annotations(synthetic_arrow_corpus(2, prompts=1, seed=3))
    same = synthesize_labels([constant_model("E2"), constant_model("E2")], docs, vocab)
    assert all(s.tag == "E2" for d in same for s in d.spans)
    tied = synthesize_labels([constant_model("E1"), constant_model("T")], docs, vocab)
    assert all(s.tag == "E1" and s.votes == ("E1", "T") for d in tied for s in d.spans)
    mixed = [constant_model(t) for t in ("E2", "E2", "E1", "I2", "C")]
    assert all(s.tag == "E2" for d in synthesize_labels(mixed, docs, vocab) for s in d.spans)


def test_synthetic_corpus_keeps_sentences():
    vocab = Vocab([])
    docs = strip_annotations(synthetic_arrow_corpus(3, seed=1))
    out = synthesize_labels([constant_model("O")], docs, vocab)
    for a, b in zip(docs, out):
        assert a.sentences == b.sentences and a.text == b.text
        assert [s.start for s in b.spans] == list(range(len(a.sentences)))
    rows = vote_table(out)
    assert len(rows) == sum(len(d.sentences) for d in docs)
    assert set(rows[0]) == {"doc_id", "sentence", "resolved", "vote_0"}


def test_mismatched_models_rejected():
    docs = strip_annotations(synthetic_arrow_corpus(1, seed=0))
    other = ModelConfig(layers=1, heads=1, width=8, segment_len=32, vocab_size=16, num_labels=3)
    with pytest.raises(EnsembleError):
        synthesize_labels([init_params(other)], docs, Vocab([]))
    with pytest.raises(EnsembleError):
        synthesize_labels([], docs, Vocab([]))
    with pytest.raises(EnsembleError):
        synthesize_labels([constant_model("T")], docs, train_vocab(["abcdefghijklmnop qrstuvwxyz"], 40))


def test_protocol_is_deterministic():
    labeled = synthetic_arrow_corpus(10, prompts=5, seed=2)
    unlabeled = strip_annotations(synthetic_arrow_corpus(3, prompts=5, seed=9))
    vocab = train_vocab([d.text for d in labeled], 200)
    mcfg = ModelConfig(layers=1, heads=2, width=16, segment_len=64, vocab_size=len(vocab),
                       num_labels=ARROW.num_labels)
    tcfg = TrainConfig(epochs=2, learning_rate=0.01)
    a = run_protocol(labeled, unlabeled, vocab, mcfg, tcfg, k=3)
    b = run_protocol(labeled, unlabeled, vocab, mcfg, tcfg, k=3)
    assert vote_table(a.synthetic) == vote_table(b.synthetic)
    assert all(np.array_equal(a.universal.params[n], b.universal.params[n]) for n in a.universal.params.arrays)
    assert len(a.seed_results) == 3
