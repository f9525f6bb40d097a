"""A small tape-based reverse-mode autodiff over numpy arrays.

Only the operations the encoder needs are provided. Each op records a
closure that pushes the output gradient to its parents; ``backward`` walks
the graph in reverse topological order.
"""

from __future__ import annotations

import contextlib

import numpy as np

_GRAD_ENABLED = True


@contextlib.contextmanager
def no_grad():
    global _GRAD_ENABLED
    prev, _GRAD_ENABLED = _GRAD_ENABLED, False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "name")

    def __init__(self, data, requires_grad=False, name=None):
        self.data = np.asarray(data)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._backward = None
        self.name = name

    shape = property(lambda self: self.data.shape)
    ndim = property(lambda self: self.data.ndim)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def detach(self) -> "Tensor":
        """Stop-gradient: same values, cut from the graph."""
        return Tensor(self.data)

    def _accum(self, g):
        if self.grad is None:
            self.grad = np.array(g, dtype=self.data.dtype, copy=True)
        else:
            self.grad += g

    def backward(self, grad=None):
        if grad is None:
            grad = np.ones_like(self.data)
        order = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self._accum(grad)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, neg(other))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return take_rows(self, idx)


def _t(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data, parents, backward) -> Tensor:
    out = Tensor(data)
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(p for p in parents if p.requires_grad)
        out._backward = backward
    return out


def _unbroadcast(g, shape):
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def add(a, b) -> Tensor:
    a, b = _t(a), _t(b)

    def bw(g):
        if a.requires_grad:
            a._accum(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b._accum(_unbroadcast(g, b.shape))

    return _make(a.data + b.data, (a, b), bw)


def neg(a) -> Tensor:
    a = _t(a)
    return _make(-a.data, (a,), lambda g: a._accum(-g))


def mul(a, b) -> Tensor:
    a, b = _t(a), _t(b)

    def bw(g):
        if a.requires_grad:
            a._accum(_unbroadcast(g * b.data, a.shape))
        if b.requires_grad:
            b._accum(_unbroadcast(g * a.data, b.shape))

    return _make(a.data * b.data, (a, b), bw)


def matmul(a, b) -> Tensor:
    a, b = _t(a), _t(b)

    def bw(g):
        if a.requires_grad:
            a._accum(_unbroadcast(g @ np.swapaxes(b.data, -1, -2), a.shape))
        if b.requires_grad:
            b._accum(_unbroadcast(np.swapaxes(a.data, -1, -2) @ g, b.shape))

    return _make(a.data @ b.data, (a, b), bw)


def reshape(a, shape) -> Tensor:
    a = _t(a)
    return _make(a.data.reshape(shape), (a,), lambda g: a._accum(g.reshape(a.shape)))


def transpose(a, axes) -> Tensor:
    a = _t(a)
    inv = np.argsort(axes)
    return _make(np.transpose(a.data, axes), (a,), lambda g: a._accum(np.transpose(g, inv)))


def concat(tensors, axis=0) -> Tensor:
    tensors = [_t(x) for x in tensors]
    sizes = np.cumsum([x.shape[axis] for x in tensors])[:-1]

    def bw(g):
        for x, part in zip(tensors, np.split(g, sizes, axis=axis)):
            if x.requires_grad:
                x._accum(part)

    return _make(np.concatenate([x.data for x in tensors], axis=axis), tensors, bw)


def take_rows(a, idx) -> Tensor:
    """``a[idx]`` along the first axis; repeated indices accumulate."""
    a = _t(a)
    idx = np.asarray(idx)

    def bw(g):
        full = np.zeros_like(a.data)
        np.add.at(full, idx, g)
        a._accum(full)

    return _make(a.data[idx], (a,), bw)


def gather_last(a, idx) -> Tensor:
    """``take_along_axis`` on the last axis.

    Indices must be distinct within each row of ``idx``; the backward pass
    scatters without accumulation.
    """
    a = _t(a)
    idx = np.broadcast_to(idx, a.shape[:-1] + idx.shape[-1:])

    def bw(g):
        full = np.zeros_like(a.data)
        np.put_along_axis(full, idx, g, axis=-1)
        a._accum(full)

    return _make(np.take_along_axis(a.data, idx, axis=-1), (a,), bw)


def masked_softmax(a, mask) -> Tensor:
    """Softmax over the last axis; entries where ``mask`` is False get probability 0."""
    a = _t(a)
    x = np.where(mask, a.data, -np.inf)
    x = x - x.max(axis=-1, keepdims=True)
    e = np.exp(x)
    y = e / e.sum(axis=-1, keepdims=True)

    def bw(g):
        a._accum(y * (g - (g * y).sum(axis=-1, keepdims=True)))

    return _make(y, (a,), bw)


def layer_norm(x, gamma, beta, eps=1e-5) -> Tensor:
    x, gamma, beta = _t(x), _t(gamma), _t(beta)
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    d = x.shape[-1]

    def bw(g):
        if gamma.requires_grad:
            gamma._accum(_unbroadcast(g * xhat, gamma.shape))
        if beta.requires_grad:
            beta._accum(_unbroadcast(g, beta.shape))
        if x.requires_grad:
            gx = g * gamma.data
            x._accum(inv / d * (d * gx - gx.sum(-1, keepdims=True)
                                - xhat * (gx * xhat).sum(-1, keepdims=True)))

    return _make(xhat * gamma.data + beta.data, (x, gamma, beta), bw)


_GELU_C = np.sqrt(2.0 / np.pi)


def gelu(x) -> Tensor:
    """Tanh approximation of GELU."""
    x = _t(x)
    u = _GELU_C * (x.data + 0.044715 * x.data ** 3)
    t = np.tanh(u)
    y = 0.5 * x.data * (1.0 + t)

    def bw(g):
        du = _GELU_C * (1.0 + 3 * 0.044715 * x.data ** 2)
        x._accum(g * (0.5 * (1.0 + t) + 0.5 * x.data * (1.0 - t * t) * du))

    return _make(y, (x,), bw)


def sum_all(a) -> Tensor:
    a = _t(a)
    return _make(np.asarray(a.data.sum()), (a,), lambda g: a._accum(np.broadcast_to(g, a.shape)))
