"""
How far back can a token see?
=============================

A segment attends over its own tokens plus a memory of cached layer
inputs from earlier segments. Each layer can look one window further back,
so stacking layers stretches the receptive field. This script measures
that directly: nudge one early embedding and check which later positions
move.
"""

import numpy as np

from argmine.encoder import ModelConfig, Trace, forward_segment, init_params, stream_document

# id 7 occurs only at position 0, so its embedding row is a private knob
ids = np.r_[7, np.random.default_rng(0).integers(8, 64, 47)]


def reach(layers: int, segment_len: int = 4, mem_len: int = 4) -> int:
    cfg = ModelConfig(layers=layers, heads=2, width=16, segment_len=segment_len,
                      mem_len=mem_len, vocab_size=64, num_labels=3)
    params = init_params(cfg, seed=1)
    base = stream_document(params, ids)
    params.arrays["embed"][7] += 0.5
    moved = stream_document(params, ids)
    changed = np.flatnonzero(np.abs(moved - base).max(axis=1) > 1e-12)
    return int(changed.max())


print(f"{'layers':>6}  {'window':>6}  {'expected':>8}  {'furthest moved':>14}")
for n in (1, 2, 3, 4):
    print(f"{n:>6}  {4:>6}  {4 * n:>8}  {reach(n):>14}")

# the window is the larger of segment and memory length
print("\nmem_len 8, segment 4, two layers:", reach(2, mem_len=8))

# attention for the second segment, first layer: four query rows over
# four cached keys followed by four current ones
cfg = ModelConfig(layers=1, heads=1, width=8, segment_len=4, mem_len=4, vocab_size=64, num_labels=3)
params = init_params(cfg, seed=2)
_, memory = forward_segment(params, ids[:4])
trace = Trace()
forward_segment(params, ids[4:8], memory, trace)
np.set_printoptions(precision=2, suppress=True)
print("\nattention, keys = 4 remembered + 4 current")
print(trace.attention[0][0])
