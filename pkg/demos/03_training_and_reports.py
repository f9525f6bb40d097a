"""
Training a sentence tagger and reading the reports
==================================================

Fit a small encoder on synthetic ARROW essays, watch the epoch log, then
score it on unseen essays next to an untrained copy. The per-tag report
and the side-by-side kappa table are the two layouts the evaluate command
prints.
"""

import time

from argmine.codecs import encode_arrow, unit_labels, unit_positions
from argmine.encoder import ModelConfig, init_params
from argmine.metrics import evaluate_labels, format_report, format_table, scored_tags
from argmine.schemes import ARROW
from argmine.synthetic import synthetic_arrow_corpus
from argmine.tokenizer import train_vocab
from argmine.training import TrainConfig, predict_labels, train

train_docs = synthetic_arrow_corpus(20, prompts=4, seed=11)
test_docs = synthetic_arrow_corpus(8, prompts=4, seed=12)
vocab = train_vocab([d.text for d in train_docs], 400)

mcfg = ModelConfig(layers=2, heads=2, width=32, segment_len=64, vocab_size=len(vocab),
                   num_labels=ARROW.num_labels)
examples = [encode_arrow(d, vocab) for d in train_docs]
print(f"{len(examples)} essays, {sum(len(ex.labeled_positions) for ex in examples)} labeled sentences, "
      f"{init_params(mcfg).size()} parameters")


def show(record, model):
    print(f"  epoch {record['epoch']:>2}  loss {record['train_loss']:.3f}  dev loss {record['dev_loss']:.3f}")


t0 = time.perf_counter()
result = train(init_params(mcfg, 0), examples, TrainConfig(epochs=12, learning_rate=3e-3, dev_fraction=0.2),
               on_epoch=show)
print(f"best epoch {result.best_epoch}, {time.perf_counter() - t0:.1f}s")


def score(params):
    gold, pred = [], []
    for d in test_docs:
        ex = encode_arrow(d, vocab)
        pos = unit_positions(ex)
        gold += unit_labels(ex)
        pred += unit_labels(ex, dict(zip(pos, predict_labels(params, ex, pos).tolist())))
    tags, macro = scored_tags(ARROW)
    return evaluate_labels(gold, pred, tags, macro)


trained = score(result.params)
untrained = score(init_params(mcfg, 0))
print()
print(format_report(trained, title="held-out essays"))
print()
print(format_table({"untrained": untrained, "trained": trained}, tags=ARROW.labels, names=ARROW.long_names))
