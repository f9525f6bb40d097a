"""Segment-recurrent transformer encoder with relative attention.

Layer ``n`` of segment ``t+1`` reads queries from its own input
``h[t+1, n-1]`` and keys/values from ``[SG(h[t, n-1]) ; h[t+1, n-1]]``
where ``SG`` is a stop-gradient. Cached memories are plain arrays, so no
gradient can reach the previous segment.

Attention is bidirectional inside the current segment. Looking back, a
query sees at most ``window = max(segment_len, mem_len)`` positions, which
bounds the dependency reach of an ``N``-layer stack at ``N * window``.
Positions enter only through relative offsets (content bias ``u``,
position bias ``v`` and a projection of sinusoidal offset embeddings).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor

CHECKPOINT_MAGIC = b"ARGMINE-CKPT 1\n"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    layers: int = 2
    heads: int = 2
    width: int = 32
    segment_len: int = 64
    vocab_size: int = 500
    num_labels: int = 8
    mem_len: int | None = None
    ffn_width: int | None = None
    dtype: str = "float64"

    def __post_init__(self):
        if self.mem_len is None:
            object.__setattr__(self, "mem_len", self.segment_len)
        if self.ffn_width is None:
            object.__setattr__(self, "ffn_width", 4 * self.width)
        if self.width % self.heads:
            raise ConfigError(f"width {self.width} is not divisible by heads {self.heads}")
        if self.segment_len < 1 or self.mem_len < 0 or self.layers < 1:
            raise ConfigError("segment_len and layers must be >= 1, mem_len >= 0")

    @property
    def head_dim(self) -> int:
        return self.width // self.heads

    @property
    def window(self) -> int:
        return max(self.segment_len, self.mem_len)

    @property
    def reach(self) -> int:
        """Largest token distance that can influence an output."""
        return self.layers * self.window


def _layer_shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    d, f, h, dh = cfg.width, cfg.ffn_width, cfg.heads, cfg.head_dim
    return {
        "w_q": (d, d), "w_k": (d, d), "w_v": (d, d), "w_o": (d, d), "w_r": (d, d),
        "bias_u": (h, dh), "bias_v": (h, dh),
        "ln1.g": (d,), "ln1.b": (d,),
        "ff.w1": (d, f), "ff.b1": (f,), "ff.w2": (f, d), "ff.b2": (d,),
        "ln2.g": (d,), "ln2.b": (d,),
    }


class Params:
    """Named parameter arrays plus the config they were built for."""

    def __init__(self, config: ModelConfig, arrays: dict[str, np.ndarray]):
        self.config = config
        self.arrays = arrays
        expected = self.shapes(config)
        if set(arrays) != set(expected):
            raise ConfigError(f"parameter names differ: {sorted(set(arrays) ^ set(expected))}")
        for name, shape in expected.items():
            if arrays[name].shape != shape:
                raise ConfigError(f"{name}: shape {arrays[name].shape} != {shape}")

    @staticmethod
    def shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
        out = {"embed": (cfg.vocab_size, cfg.width)}
        for n in range(cfg.layers):
            for k, s in _layer_shapes(cfg).items():
                out[f"layer{n}.{k}"] = s
        out["label_head.w"] = (cfg.width, cfg.num_labels)
        out["label_head.b"] = (cfg.num_labels,)
        out["seq_head.w"] = (cfg.width, cfg.num_labels)
        out["seq_head.b"] = (cfg.num_labels,)
        return out

    def __getitem__(self, name):
        return self.arrays[name]

    def copy(self) -> "Params":
        return Params(self.config, {k: v.copy() for k, v in self.arrays.items()})

    def size(self) -> int:
        return sum(a.size for a in self.arrays.values())

    def tensors(self, requires_grad=False) -> dict[str, Tensor]:
        return {k: Tensor(v, requires_grad=requires_grad, name=k) for k, v in self.arrays.items()}

    def save(self, path, extra: dict | None = None) -> None:
        """Checkpoint layout: magic line, one JSON header line, raw little-endian arrays.

        Arrays are written in sorted-name order; the header lists each
        array's name, shape, dtype and byte offset into the payload.
        """
        entries, offset = [], 0
        names = sorted(self.arrays)
        for name in names:
            a = self.arrays[name]
            dt = a.dtype.newbyteorder("<")
            entries.append({"name": name, "shape": list(a.shape), "dtype": dt.str,
                            "offset": offset, "nbytes": a.nbytes})
            offset += a.nbytes
        header = {"config": asdict(self.config), "arrays": entries, "extra": extra or {}}
        with open(path, "wb") as fh:
            fh.write(CHECKPOINT_MAGIC)
            fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
            for name in names:
                a = self.arrays[name]
                fh.write(np.ascontiguousarray(a, dtype=a.dtype.newbyteorder("<")).tobytes())

    @classmethod
    def load(cls, path) -> tuple["Params", dict]:
        with open(path, "rb") as fh:
            if fh.readline() != CHECKPOINT_MAGIC:
                raise ConfigError(f"{path}: not a checkpoint")
            header = json.loads(fh.readline())
            payload = fh.read()
        arrays = {}
        for e in header["arrays"]:
            buf = payload[e["offset"]:e["offset"] + e["nbytes"]]
            arrays[e["name"]] = np.frombuffer(buf, dtype=np.dtype(e["dtype"])).reshape(e["shape"]).copy()
        return cls(ModelConfig(**header["config"]), arrays), header.get("extra", {})


def init_params(config: ModelConfig, seed: int = 0) -> Params:
    """Uniform initialisation scaled by ``1/sqrt(fan_in)``; layer-norm gains 1, biases 0."""
    rng = np.random.default_rng(seed)
    dt = np.dtype(config.dtype)
    arrays = {}
    for name, shape in Params.shapes(config).items():
        leaf = name.rsplit(".", 1)[-1]
        if name == "embed":
            a = rng.uniform(-1.0, 1.0, shape)
        elif leaf == "g":
            a = np.ones(shape)
        elif leaf == "b" or name.endswith((".b1", ".b2")):
            a = np.zeros(shape)
        elif leaf in ("bias_u", "bias_v"):
            a = rng.uniform(-1.0, 1.0, shape) / np.sqrt(config.head_dim)
        else:
            a = rng.uniform(-1.0, 1.0, shape) / np.sqrt(shape[0])
        arrays[name] = a.astype(dt)
    return Params(config, arrays)


@dataclass
class MemoryState:
    """Per-layer cached inputs from earlier segments. Never differentiated."""

    layers: list[np.ndarray]

    @classmethod
    def empty(cls, config: ModelConfig) -> "MemoryState":
        return cls([np.zeros((0, config.width), dtype=config.dtype) for _ in range(config.layers)])

    def __len__(self):
        return self.layers[0].shape[0] if self.layers else 0


def relative_embeddings(offsets: np.ndarray, width: int, dtype="float64") -> np.ndarray:
    inv_freq = 1.0 / (10000.0 ** (np.arange(0, width, 2) / width))
    ang = offsets[:, None].astype(np.float64) * inv_freq[None, :]
    return np.concatenate([np.sin(ang), np.cos(ang)], axis=1).astype(dtype)


@dataclass
class Trace:
    """Optional per-layer record for inspection in tests and notebooks."""

    queries: list[np.ndarray] = field(default_factory=list)
    attention: list[np.ndarray] = field(default_factory=list)


def _layer(t: dict[str, Tensor], n: int, x: Tensor, mem: np.ndarray, cfg: ModelConfig,
           trace: Trace | None) -> Tensor:
    p = f"layer{n}."
    qlen, mlen = x.shape[0], mem.shape[0]
    klen = qlen + mlen
    h, dh = cfg.heads, cfg.head_dim

    cat = ad.concat([Tensor(mem), x]) if mlen else x

    def heads(z, length):
        return ad.transpose(ad.reshape(z, (length, h, dh)), (1, 0, 2))

    q = heads(x @ t[p + "w_q"], qlen)
    k = heads(cat @ t[p + "w_k"], klen)
    v = heads(cat @ t[p + "w_v"], klen)

    # offset(i, j) = (mlen + i) - j, from -(qlen-1) up to klen-1
    lo = -(qlen - 1)
    offs = np.arange(lo, klen, dtype=np.int64)
    rel = Tensor(relative_embeddings(offs, cfg.width, cfg.dtype))
    pos = heads(rel @ t[p + "w_r"], len(offs))

    u = ad.reshape(t[p + "bias_u"], (h, 1, dh))
    vb = ad.reshape(t[p + "bias_v"], (h, 1, dh))
    content = (q + u) @ ad.transpose(k, (0, 2, 1))
    position_full = (q + vb) @ ad.transpose(pos, (0, 2, 1))
    off = mlen + np.arange(qlen)[:, None] - np.arange(klen)[None, :]
    position = ad.gather_last(position_full, off - lo)
    scores = (content + position) * (1.0 / np.sqrt(dh))
    probs = ad.masked_softmax(scores, off <= cfg.window)

    att = ad.reshape(ad.transpose(probs @ v, (1, 0, 2)), (qlen, cfg.width)) @ t[p + "w_o"]
    h1 = ad.layer_norm(x + att, t[p + "ln1.g"], t[p + "ln1.b"])
    ff = ad.gelu(h1 @ t[p + "ff.w1"] + t[p + "ff.b1"]) @ t[p + "ff.w2"] + t[p + "ff.b2"]
    out = ad.layer_norm(h1 + ff, t[p + "ln2.g"], t[p + "ln2.b"])
    if trace is not None:
        trace.queries.append(q.data.copy())
        trace.attention.append(probs.data.copy())
    return out


def segment_graph(t: dict[str, Tensor], segment, memory: MemoryState, cfg: ModelConfig,
                  trace: Trace | None = None, embedded: Tensor | None = None):
    """Differentiable forward pass over one segment.

    Returns the top hidden states (a Tensor) and the next memory. When
    ``embedded`` is given it replaces the embedding lookup, which lets
    tests take gradients with respect to the input embeddings.
    """
    segment = np.asarray(segment, dtype=np.int64)
    if segment.size == 0:
        raise ValueError("empty segment")
    if segment.size > cfg.segment_len:
        raise ValueError(f"segment of {segment.size} tokens exceeds segment_len {cfg.segment_len}")
    if len(memory.layers) != cfg.layers:
        raise ConfigError(f"memory has {len(memory.layers)} layers, model has {cfg.layers}")
    x = embedded if embedded is not None else ad.take_rows(t["embed"], segment)
    new_layers = []
    for n in range(cfg.layers):
        mem = memory.layers[n]
        if mem.shape[1:] != (cfg.width,):
            raise ConfigError(f"memory layer {n} has width {mem.shape[1:]}, expected {cfg.width}")
        if cfg.mem_len:
            new_layers.append(np.concatenate([mem, x.data])[-cfg.mem_len:].copy())
        else:
            new_layers.append(mem[:0])
        x = _layer(t, n, x, mem, cfg, trace)
    return x, MemoryState(new_layers)


def forward_segment(params: Params, segment, memory: MemoryState | None = None, trace: Trace | None = None):
    cfg = params.config
    memory = memory if memory is not None else MemoryState.empty(cfg)
    with ad.no_grad():
        out, mem = segment_graph(params.tensors(), segment, memory, cfg, trace)
    return out.data, mem


def stream_graph(t: dict[str, Tensor], ids, cfg: ModelConfig, memory: MemoryState | None = None):
    """Run consecutive segments, threading memory; returns per-segment hidden Tensors."""
    ids = np.asarray(ids, dtype=np.int64)
    memory = memory if memory is not None else MemoryState.empty(cfg)
    outs = []
    for start in range(0, len(ids), cfg.segment_len):
        h, memory = segment_graph(t, ids[start:start + cfg.segment_len], memory, cfg)
        outs.append(h)
    return outs, memory


def stream_document(params: Params, ids, memory: MemoryState | None = None) -> np.ndarray:
    """Hidden states for every position of a sequence of any length."""
    cfg = params.config
    if len(ids) == 0:
        return np.zeros((0, cfg.width), dtype=cfg.dtype)
    with ad.no_grad():
        outs, _ = stream_graph(params.tensors(), ids, cfg, memory)
    return np.concatenate([o.data for o in outs])


def _check_positions(positions, n):
    positions = np.asarray(positions, dtype=np.int64).reshape(-1)
    if positions.size and (positions.min() < 0 or positions.max() >= n):
        raise IndexError(f"positions must lie in [0, {n})")
    return positions


def classify_positions(params: Params, ids, memory: MemoryState | None = None, positions=()) -> np.ndarray:
    positions = _check_positions(positions, len(ids))
    if positions.size == 0:
        return np.zeros((0, params.config.num_labels), dtype=params.config.dtype)
    hidden = stream_document(params, ids, memory)
    return hidden[positions] @ params["label_head.w"] + params["label_head.b"]


def class_position(ids, cls_id: int) -> int:
    hits = np.flatnonzero(np.asarray(ids) == cls_id)
    if hits.size == 0:
        raise ValueError("input has no class token")
    return int(hits[-1])


def classify_sequence(params: Params, ids, cls_id: int) -> np.ndarray:
    pos = class_position(ids, cls_id)
    hidden = stream_document(params, ids)
    return hidden[pos] @ params["seq_head.w"] + params["seq_head.b"]
