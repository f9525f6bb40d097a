"""
From a few labeled prompts to a universal model
===============================================

Five seed models each hold out one prompt for testing and the next for
early stopping. Their votes on unlabeled essays are merged by a fixed
precedence among tied tags, and a single model is trained on the result.
Finally the voted labels are cross-tabulated against the hidden gold tags
of those same essays.
"""

from collections import Counter

from argmine.correspondence import corpus_correspondence, format_side_by_side
from argmine.encoder import ModelConfig
from argmine.ensemble import run_protocol, vote_table
from argmine.schemes import ARROW
from argmine.synthetic import strip_annotations, synthetic_arrow_corpus
from argmine.tokenizer import train_vocab
from argmine.training import TrainConfig

labeled = synthetic_arrow_corpus(25, prompts=5, seed=8)
hidden = synthetic_arrow_corpus(12, prompts=5, seed=80)
unlabeled = strip_annotations(hidden)
vocab = train_vocab([d.text for d in labeled + unlabeled], 400)

mcfg = ModelConfig(layers=2, heads=2, width=32, segment_len=64, vocab_size=len(vocab),
                   num_labels=ARROW.num_labels)
run = run_protocol(labeled, unlabeled, vocab, mcfg, TrainConfig(epochs=10, learning_rate=3e-3), k=5)

print("seed plan")
for i, m in enumerate(run.plan.models):
    print(f"  model {i}: test {m.test}, dev {m.dev}, train {', '.join(m.train)}")

rows = vote_table(run.synthetic)
split = [r for r in rows if len({v for k, v in r.items() if k.startswith("vote_")}) > 1]
print(f"\n{len(rows)} sentences voted, {len(split)} without a unanimous vote")
for r in split[:5]:
    votes = [r[f"vote_{i}"] for i in range(5)]
    print(f"  {r['doc_id']}#{r['sentence']}: {' '.join(votes)} -> {r['resolved']}")
print("resolved tags:", dict(Counter(r["resolved"] for r in rows).most_common()))

best = [r.best_epoch for r in run.seed_results]
print(f"\nseed models stopped at epochs {best}; universal model trained on {len(run.synthetic)} essays")

# rows are the hidden gold tags, columns the voted ones, both at word level
matrix = corpus_correspondence(hidden, run.synthetic, ARROW, ARROW, synthetic_rater="resolved")
print(f"\nword-level correspondence, {matrix.total} words (row %)")
print(format_side_by_side({"voted": matrix}))
