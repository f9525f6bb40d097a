"""Loss, gradients, AdamW and the epoch loop with dev-based model selection."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from . import autodiff as ad
from .codecs import IGNORE, EncodedExample
from .encoder import Params, stream_document, stream_graph
from .metrics import evaluate_labels

log = logging.getLogger(__name__)

STOP_METRICS = ("sum_kappa", "macro_f1")


class NumericalError(FloatingPointError):
    pass


class TrainingError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    max_tokens: int = 2048
    batch_size: int = 1
    learning_rate: float = 1e-3
    weight_decay: float = 0.0
    dev_fraction: float = 0.1
    seed: int = 0
    stop_metric: str = "sum_kappa"

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.max_tokens < 3:
            raise TrainingError("epochs, batch_size must be positive and max_tokens at least 3")
        if not 0.0 <= self.dev_fraction < 1.0:
            raise TrainingError("dev_fraction must lie in [0, 1)")
        if self.stop_metric not in STOP_METRICS:
            raise TrainingError(f"stop_metric must be one of {STOP_METRICS}")


@dataclass
class LossReport:
    loss: float
    count: int
    correct: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.count if self.count else 0.0


_all_ignored_warnings = 0


def all_ignored_count() -> int:
    """How many loss calls so far saw no labeled position."""
    return _all_ignored_warnings


def masked_cross_entropy(scores: np.ndarray, targets) -> tuple[LossReport, np.ndarray]:
    """Mean cross-entropy over rows whose target is not ``IGNORE``.

    Returns the report and the gradient with respect to ``scores``. With no
    labeled row the loss is 0 and a warning is logged.
    """
    global _all_ignored_warnings
    targets = np.asarray(targets, dtype=np.int64)
    keep = targets != IGNORE
    grad = np.zeros_like(scores)
    n = int(keep.sum())
    if n == 0:
        _all_ignored_warnings += 1
        log.warning("every position is ignored; loss is 0")
        return LossReport(0.0, 0, 0), grad
    s = scores[keep]
    y = targets[keep]
    if y.min() < 0 or y.max() >= scores.shape[-1]:
        raise TrainingError(f"target outside [0, {scores.shape[-1]})")
    z = s - s.max(axis=-1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=-1, keepdims=True))
    rows = np.arange(n)
    loss = -logp[rows, y].mean()
    p = np.exp(logp)
    p[rows, y] -= 1.0
    grad[keep] = p / n
    correct = int((s.argmax(axis=-1) == y).sum())
    return LossReport(float(loss), n, correct), grad


def _head_names(example: EncodedExample) -> tuple[str, str]:
    return ("seq_head.w", "seq_head.b") if example.head == "sequence" else ("label_head.w", "label_head.b")


def _layer_of(name: str) -> str:
    return name.split(".")[0]


def backward(params: Params, example: EncodedExample) -> tuple[LossReport, dict[str, np.ndarray]]:
    """Loss and parameter gradients for one example (sums over all its segments)."""
    positions = np.asarray(example.labeled_positions, dtype=np.int64)
    if positions.size == 0:
        report, _ = masked_cross_entropy(np.zeros((0, params.config.num_labels)), [])
        return report, {k: np.zeros_like(v) for k, v in params.arrays.items()}
    t = params.tensors(requires_grad=True)
    outs, _ = stream_graph(t, example.input_ids, params.config)
    hidden = ad.concat(outs) if len(outs) > 1 else outs[0]
    w, b = _head_names(example)
    scores = ad.add(ad.matmul(ad.take_rows(hidden, positions), t[w]), t[b])
    report, g = masked_cross_entropy(scores.data, [example.target_ids[p] for p in positions])
    if not np.isfinite(report.loss):
        raise NumericalError(f"non-finite loss on {example.doc_id or 'example'}")
    scores.backward(g)
    grads = {}
    for name, tensor in t.items():
        gr = tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)
        if not np.all(np.isfinite(gr)):
            raise NumericalError(f"non-finite gradient in {_layer_of(name)} ({name})")
        grads[name] = gr
    return report, grads


def example_loss(params: Params, example: EncodedExample) -> LossReport:
    scores = predict_scores(params, example)
    report, _ = masked_cross_entropy(scores, [example.target_ids[p] for p in example.labeled_positions])
    return report


def predict_scores(params: Params, example: EncodedExample, positions=None) -> np.ndarray:
    """Head scores at ``positions`` (default: the labeled positions)."""
    positions = example.labeled_positions if positions is None else positions
    positions = np.asarray(positions, dtype=np.int64)
    if positions.size == 0:
        return np.zeros((0, params.config.num_labels), dtype=params.config.dtype)
    hidden = stream_document(params, example.input_ids)
    w, b = _head_names(example)
    return hidden[positions] @ params[w] + params[b]


def predict_labels(params: Params, example: EncodedExample, positions=None) -> np.ndarray:
    return predict_scores(params, example, positions).argmax(axis=-1)


class AdamW:
    def __init__(self, params: Params, lr=1e-3, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.0):
        self.lr, self.betas, self.eps, self.weight_decay = lr, betas, eps, weight_decay
        self.m = {k: np.zeros_like(v) for k, v in params.arrays.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.arrays.items()}
        self.steps = 0

    def step(self, params: Params, grads: dict[str, np.ndarray]) -> None:
        self.steps += 1
        b1, b2 = self.betas
        c1 = 1 - b1 ** self.steps
        c2 = 1 - b2 ** self.steps
        for k, g in grads.items():
            m, v = self.m[k], self.v[k]
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            p = params.arrays[k]
            if self.weight_decay:
                p -= self.lr * self.weight_decay * p
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def split_dev(examples, fraction: float, seed: int):
    """Seeded shuffle split; returns ``(train, dev)``."""
    examples = list(examples)
    n_dev = int(round(fraction * len(examples)))
    if fraction > 0 and len(examples) > 1:
        n_dev = max(1, n_dev)
    n_dev = min(n_dev, len(examples) - 1) if examples else 0
    order = np.random.default_rng(seed).permutation(len(examples))
    dev = [examples[i] for i in sorted(order[:n_dev])]
    train = [examples[i] for i in sorted(order[n_dev:])]
    return train, dev


def dev_metric(gold: list[int], pred: list[int], num_labels: int, metric: str) -> float:
    report = evaluate_labels(gold, pred, list(range(num_labels)))
    return report.metric_sum() if metric == "sum_kappa" else report.macro_f1


@dataclass
class TrainResult:
    params: Params
    log: list[dict] = field(default_factory=list)
    best_epoch: int = 0
    best_metric: float = float("nan")

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.log)


def evaluate_examples(params: Params, examples, num_labels: int, metric: str):
    gold, pred, loss_sum, count = [], [], 0.0, 0
    for ex in examples:
        scores = predict_scores(params, ex)
        targets = ex.labels()
        rep, _ = masked_cross_entropy(scores, targets) if targets else (LossReport(0.0, 0, 0), None)
        loss_sum += rep.loss * rep.count
        count += rep.count
        gold.extend(targets)
        pred.extend(scores.argmax(axis=-1).tolist())
    value = dev_metric(gold, pred, num_labels, metric) if gold else float("nan")
    return (loss_sum / count if count else float("nan")), value


def train(params: Params, examples, config: TrainConfig = TrainConfig(), dev_examples=None,
          log_path=None, on_epoch=None) -> TrainResult:
    """Train a copy of ``params``; returns the parameters of the best dev epoch.

    When ``dev_examples`` is None a seeded ``dev_fraction`` of ``examples`` is
    held out. Inputs longer than ``max_tokens`` are truncated. Each epoch
    appends one record to the log (and to ``log_path`` as JSON lines).
    ``on_epoch(record, model)`` may return True to stop early.
    """
    examples = [ex.truncated(config.max_tokens) for ex in examples]
    if dev_examples is None:
        train_set, dev_set = split_dev(examples, config.dev_fraction, config.seed)
    else:
        train_set, dev_set = examples, [ex.truncated(config.max_tokens) for ex in dev_examples]
    if not train_set:
        raise TrainingError("no training examples")
    num_labels = params.config.num_labels
    model = params.copy()
    opt = AdamW(model, config.learning_rate, weight_decay=config.weight_decay)
    rng = np.random.default_rng(config.seed)
    result = TrainResult(model.copy())
    best = -np.inf
    fh = open(log_path, "w", encoding="utf-8") if log_path else None
    try:
        for epoch in range(1, config.epochs + 1):
            order = rng.permutation(len(train_set))
            loss_sum = 0.0
            count = correct = 0
            for start in range(0, len(order), config.batch_size):
                batch = [train_set[i] for i in order[start:start + config.batch_size]]
                total = None
                weight = 0
                for ex in batch:
                    rep, grads = backward(model, ex)
                    loss_sum += rep.loss * rep.count
                    count += rep.count
                    correct += rep.correct
                    if rep.count == 0:
                        continue
                    weight += 1
                    if total is None:
                        total = grads
                    else:
                        for k in total:
                            total[k] += grads[k]
                if total is not None:
                    if weight > 1:
                        for k in total:
                            total[k] /= weight
                    opt.step(model, total)
            record = {"epoch": epoch,
                      "train_loss": loss_sum / count if count else float("nan"),
                      "train_accuracy": correct / count if count else float("nan")}
            if dev_set:
                dev_loss, value = evaluate_examples(model, dev_set, num_labels, config.stop_metric)
                record["dev_loss"] = dev_loss
                record[f"dev_{config.stop_metric}"] = value
            else:
                value = -record["train_loss"]
            if value > best:
                best = value
                result.best_epoch = epoch
                result.best_metric = value
                result.params = model.copy()
            record["best_epoch"] = result.best_epoch
            result.log.append(record)
            log.info("epoch %d %s", epoch, record)
            if fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
                fh.flush()
            if on_epoch and on_epoch(record, model):
                break
    finally:
        if fh:
            fh.close()
    return result


def config_dict(config: TrainConfig) -> dict:
    return asdict(config)
