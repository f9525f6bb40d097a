import math

import numpy as np
import pytest

from argmine import autodiff as ad
from argmine.codecs import IGNORE, EncodedExample
from argmine.encoder import MemoryState, ModelConfig, init_params, segment_graph
from argmine.training import (
    AdamW,
    NumericalError,
    TrainConfig,
    TrainingError,
    all_ignored_count,
    backward,
    example_loss,
    masked_cross_entropy,
    split_dev,
    train,
)

from oracles import finite_difference_errors, pick_entries


def label_example(n, seed=0, vocab=30, labels=8, every=3, task="arrow_sentence"):
    rng = np.random.default_rng(seed)
    ids = rng.integers(8, vocab, n).tolist()
    tgt = [int(rng.integers(labels)) if i % every == 0 else IGNORE for i in range(n)]
    return EncodedExample(ids, tgt, [i for i, t in enumerate(tgt) if t != IGNORE], task)


def sequence_example(n, label, seed=0, vocab=30):
    rng = np.random.default_rng(seed)
    ids = rng.integers(8, vocab, n - 2).tolist() + [4, 3]
    tgt = [IGNORE] * n
    tgt[n - 2] = label
    return EncodedExample(ids, tgt, [n - 2], "aae_relation")


def test_cross_entropy_one_hot_is_near_zero():
    scores = np.array([[50.0, 0, 0], [0, 50.0, 0]])
    rep, _ = masked_cross_entropy(scores, [0, 1])
    assert rep.loss < 1e-12 and rep.accuracy == 1.0


def test_cross_entropy_uniform_is_log_k():
    rep, _ = masked_cross_entropy(np.zeros((4, 7)), [0, 3, 6, 2])
    assert rep.loss == pytest.approx(math.log(7), abs=1e-12)


def test_ignored_target_never_matters():
    scores = np.random.default_rng(0).normal(size=(3, 5))
    a, ga = masked_cross_entropy(scores, [1, IGNORE, 4])
    scores2 = scores.copy()
    scores2[1] = 99.0
    b, gb = masked_cross_entropy(scores2, [1, IGNORE, 4])
    assert a.loss == b.loss and np.array_equal(ga[[0, 2]], gb[[0, 2]])
    assert not ga[1].any()


def test_all_ignored_warns_and_counts(caplog):
    before = all_ignored_count()
    rep, grad = masked_cross_entropy(np.ones((2, 3)), [IGNORE, IGNORE])
    assert rep.loss == 0.0 and not grad.any()
    assert all_ignored_count() == before + 1
    assert "ignored" in caplog.text


def test_cross_entropy_gradient_matches_differences():
    rng = np.random.default_rng(1)
    scores = rng.normal(size=(4, 5))
    targets = [2, IGNORE, 0, 4]
    _, grad = masked_cross_entropy(scores, targets)
    eps = 1e-6
    for idx in np.ndindex(scores.shape):
        s = scores.copy()
        s[idx] += eps
        hi = masked_cross_entropy(s, targets)[0].loss
        s[idx] -= 2 * eps
        lo = masked_cross_entropy(s, targets)[0].loss
        assert grad[idx] == pytest.approx((hi - lo) / (2 * eps), abs=1e-8)


def test_target_out_of_range():
    with pytest.raises(TrainingError):
        masked_cross_entropy(np.zeros((1, 3)), [3])


@pytest.mark.parametrize("layers", [1, 2, 3])
@pytest.mark.parametrize("head", ["label", "sequence"])
def test_gradients_match_finite_differences(layers, head):
    num_labels = 8 if head == "label" else 2
    cfg = ModelConfig(layers=layers, heads=2, width=8, segment_len=12, vocab_size=30, num_labels=num_labels)
    params = init_params(cfg, seed=layers)
    ex = label_example(12, seed=layers) if head == "label" else sequence_example(12, 1, seed=layers)
    _, grads = backward(params, ex)
    picks = pick_entries(params.arrays, 30, np.random.default_rng(layers), grads)
    errors = finite_difference_errors(lambda: example_loss(params, ex).loss, grads, params.arrays, picks)
    assert max(errors) <= 1e-4


def test_rows_outside_the_example_get_zero_gradient():
    cfg = ModelConfig(layers=1, heads=1, width=8, segment_len=16, vocab_size=30, num_labels=8)
    params = init_params(cfg, 0)
    ex = label_example(10)
    _, grads = backward(params, ex)
    unused = sorted(set(range(30)) - set(ex.input_ids))
    assert unused and not grads["embed"][unused].any()
    assert not grads["seq_head.w"].any()


def test_memory_receives_no_gradient():
    cfg = ModelConfig(layers=2, heads=2, width=8, segment_len=4, vocab_size=30, num_labels=3)
    params = init_params(cfg, 2)
    prev = np.random.default_rng(0).normal(size=(4, 8))
    emb_prev = ad.Tensor(prev, requires_grad=True)
    t = params.tensors()
    _, memory = segment_graph(t, [9, 10, 11, 12], MemoryState.empty(cfg), cfg, embedded=emb_prev)
    h, _ = segment_graph(t, [13, 14, 15, 16], memory, cfg)
    ad.sum_all(h).backward()
    assert emb_prev.grad is None or not emb_prev.grad.any()
    moved = prev.copy()
    moved[0] += 1e-3
    _, memory2 = segment_graph(t, [9, 10, 11, 12], MemoryState.empty(cfg), cfg, embedded=ad.Tensor(moved))
    h2, _ = segment_graph(t, [13, 14, 15, 16], memory2, cfg)
    assert np.abs(h2.data - h.data).max() > 0


def test_non_finite_loss_raises():
    cfg = ModelConfig(layers=2, heads=1, width=8, segment_len=8, vocab_size=30, num_labels=8)
    params = init_params(cfg, 0)
    params.arrays["layer1.ff.w1"][:] = np.nan
    with np.errstate(invalid="ignore"), pytest.raises(NumericalError):
        backward(params, label_example(8))


def test_non_finite_gradient_names_the_layer(monkeypatch):
    import argmine.training as tr

    real = tr.masked_cross_entropy

    def poisoned(scores, targets):
        rep, grad = real(scores, targets)
        return rep, grad * np.inf

    monkeypatch.setattr(tr, "masked_cross_entropy", poisoned)
    cfg = ModelConfig(layers=2, heads=1, width=8, segment_len=8, vocab_size=30, num_labels=8)
    with np.errstate(invalid="ignore"), pytest.raises(NumericalError, match="non-finite gradient in "):
        backward(init_params(cfg, 0), label_example(8))


def test_adamw_first_step_moves_by_learning_rate():
    cfg = ModelConfig(layers=1, heads=1, width=4, segment_len=4, vocab_size=10, num_labels=2)
    params = init_params(cfg, 0)
    before = params.copy()
    grads = {k: np.ones_like(v) for k, v in params.arrays.items()}
    AdamW(params, lr=0.01).step(params, grads)
    for k in params.arrays:
        np.testing.assert_allclose(before[k] - params[k], 0.01, rtol=1e-5)


def test_split_dev_is_seeded_and_disjoint():
    items = list(range(20))
    tr, dev = split_dev(items, 0.25, 3)
    assert sorted(tr + dev) == items and len(dev) == 5
    assert split_dev(items, 0.25, 3) == (tr, dev)


def small_setup():
    cfg = ModelConfig(layers=1, heads=2, width=16, segment_len=16, vocab_size=30, num_labels=8)
    examples = [label_example(20, seed=s) for s in range(6)]
    return init_params(cfg, 0), examples


def test_training_is_deterministic(tmp_path):
    params, examples = small_setup()
    cfg = TrainConfig(epochs=3, learning_rate=0.01, dev_fraction=0.2, seed=4)
    a = train(params, examples, cfg, log_path=tmp_path / "a.jsonl")
    b = train(params, examples, cfg, log_path=tmp_path / "b.jsonl")
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()
    assert len(a.log) == 3 and len((tmp_path / "a.jsonl").read_text().splitlines()) == 3
    assert all(np.array_equal(a.params[k], b.params[k]) for k in a.params.arrays)


def test_training_lowers_loss_and_leaves_input_untouched():
    params, examples = small_setup()
    snapshot = params.copy()
    res = train(params, examples, TrainConfig(epochs=8, learning_rate=0.01, dev_fraction=0.0))
    assert res.log[-1]["train_loss"] < res.log[0]["train_loss"]
    assert all(np.array_equal(snapshot[k], params[k]) for k in params.arrays)
    assert 1 <= res.best_epoch <= 8


def test_empty_dataset_raises():
    params, _ = small_setup()
    with pytest.raises(TrainingError):
        train(params, [], TrainConfig(epochs=1))


def test_config_validation():
    with pytest.raises(TrainingError):
        TrainConfig(epochs=0)
    with pytest.raises(TrainingError):
        TrainConfig(stop_metric="loss")


def test_training_on_truncated_equals_pre_truncated():
    params, examples = small_setup()
    cfg = TrainConfig(epochs=2, max_tokens=10, dev_fraction=0.0, learning_rate=0.01)
    a = train(params, examples, cfg)
    b = train(params, [ex.truncated(10) for ex in examples], cfg)
    assert all(np.array_equal(a.params[k], b.params[k]) for k in a.params.arrays)


def test_sequence_truncation_keeps_class_token():
    ex = sequence_example(20, 1)
    cut = ex.truncated(8)
    assert len(cut.input_ids) == 8 and cut.input_ids[-2:] == [4, 3] and cut.labels() == [1]


def test_on_epoch_can_stop_training():
    params, examples = small_setup()
    seen = []
    res = train(params, examples, TrainConfig(epochs=10, dev_fraction=0.0),
                on_epoch=lambda rec, model: seen.append(rec["epoch"]) or rec["epoch"] == 3)
    assert seen == [1, 2, 3] and len(res.log) == 3
