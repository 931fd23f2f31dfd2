"""Reverse-mode automatic differentiation over numpy arrays.

A tiny tape: every operation returns a :class:`Var` holding the forward
value, its parent ``Var`` nodes, and a closure that maps the output
cotangent to parent cotangents.  Plain numpy arrays (or Python floats)
mixed into an operation are treated as constants and receive no gradient,
which keeps graphs small when only parameters are differentiated.

Gradient accumulation is a deterministic sequential sum in graph order,
so repeated backward passes over the same graph structure are bit-stable.
"""

import numpy as np


class Var:
    """One node of the compute graph."""

    __slots__ = ("value", "grad", "parents", "vjp")

    def __init__(self, value, parents=(), vjp=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self.parents = parents
        self.vjp = vjp

    @property
    def shape(self):
        return self.value.shape

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return mul(self, -1.0)


def value_of(x):
    return x.value if isinstance(x, Var) else np.asarray(x, dtype=np.float64)


def _unbroadcast(g, shape):
    """Sum a broadcast cotangent back down to ``shape``."""
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def _binary(a, b, out, vjp_a, vjp_b):
    parents, vjps = [], []
    if isinstance(a, Var):
        parents.append(a)
        vjps.append((vjp_a, a.value.shape))
    if isinstance(b, Var):
        parents.append(b)
        vjps.append((vjp_b, b.value.shape))
    if not parents:
        return Var(out)

    def vjp(g):
        return [_unbroadcast(fn(g), shp) for fn, shp in vjps]

    return Var(out, tuple(parents), vjp)


def add(a, b):
    av, bv = value_of(a), value_of(b)
    return _binary(a, b, av + bv, lambda g: g, lambda g: g)


def sub(a, b):
    av, bv = value_of(a), value_of(b)
    return _binary(a, b, av - bv, lambda g: g, lambda g: -g)


def mul(a, b):
    av, bv = value_of(a), value_of(b)
    return _binary(a, b, av * bv, lambda g: g * bv, lambda g: g * av)


def div(a, b):
    av, bv = value_of(a), value_of(b)
    out = av / bv
    return _binary(a, b, out, lambda g: g / bv, lambda g: -g * out / bv)


def square(a):
    av = value_of(a)
    if not isinstance(a, Var):
        return Var(av * av)
    return Var(av * av, (a,), lambda g: [2.0 * g * av])


def log(a):
    av = value_of(a)
    if not isinstance(a, Var):
        return Var(np.log(av))
    return Var(np.log(av), (a,), lambda g: [g / av])


def exp(a):
    av = value_of(a)
    out = np.exp(av)
    if not isinstance(a, Var):
        return Var(out)
    return Var(out, (a,), lambda g: [g * out])


def tanh(a):
    av = value_of(a)
    out = np.tanh(av)
    if not isinstance(a, Var):
        return Var(out)
    return Var(out, (a,), lambda g: [g * (1.0 - out * out)])


def softplus(a):
    av = value_of(a)
    out = np.logaddexp(0.0, av)
    if not isinstance(a, Var):
        return Var(out)
    with np.errstate(over="ignore"):
        sig = 1.0 / (1.0 + np.exp(-av))
    return Var(out, (a,), lambda g: [g * sig])


def matmul(a, b):
    av, bv = value_of(a), value_of(b)
    out = av @ bv
    return _binary(a, b, out, lambda g: g @ bv.T, lambda g: av.T @ g)


def sum_last(a, keepdims=True):
    av = value_of(a)
    out = av.sum(axis=-1, keepdims=keepdims)
    if not isinstance(a, Var):
        return Var(out)

    def vjp(g):
        gg = g if keepdims else np.expand_dims(g, -1)
        return [np.broadcast_to(gg, av.shape).copy()]

    return Var(out, (a,), vjp)


def mean_all(a):
    av = value_of(a)
    n = av.size
    out = av.mean()
    if not isinstance(a, Var):
        return Var(out)
    return Var(out, (a,), lambda g: [np.broadcast_to(g / n, av.shape).copy()])


def cumsum_last(a):
    av = value_of(a)
    out = np.cumsum(av, axis=-1)
    if not isinstance(a, Var):
        return Var(out)

    def vjp(g):
        return [np.flip(np.cumsum(np.flip(g, axis=-1), axis=-1), axis=-1)]

    return Var(out, (a,), vjp)


def concat_last(parts):
    vals = [value_of(p) for p in parts]
    out = np.concatenate(vals, axis=-1)
    widths = [v.shape[-1] for v in vals]
    parents, segments = [], []
    start = 0
    for p, w in zip(parts, widths):
        if isinstance(p, Var):
            parents.append(p)
            segments.append((start, start + w))
        start += w
    if not parents:
        return Var(out)

    def vjp(g):
        return [g[..., s:e] for s, e in segments]

    return Var(out, tuple(parents), vjp)


def slice_last(a, start, stop):
    av = value_of(a)
    out = av[..., start:stop]
    if not isinstance(a, Var):
        return Var(out)

    def vjp(g):
        full = np.zeros_like(av)
        full[..., start:stop] = g
        return [full]

    return Var(out, (a,), vjp)


def gather_last(a, idx):
    """Select ``a[..., idx]`` row-wise; ``idx`` has shape (B, 1).

    ``a`` may have leading dimension 1 (shared parameters) or B.
    """
    av = value_of(a)
    rows = np.broadcast_to(av, (idx.shape[0], av.shape[-1]))
    out = np.take_along_axis(rows, idx, axis=-1)
    if not isinstance(a, Var):
        return Var(out)

    def vjp(g):
        full = np.zeros(rows.shape)
        np.add.at(full, (np.arange(idx.shape[0])[:, None], idx), g)
        return [_unbroadcast(full, av.shape)]

    return Var(out, (a,), vjp)


def where(mask, a, b):
    """Elementwise select with a constant boolean mask."""
    av, bv = value_of(a), value_of(b)
    out = np.where(mask, av, bv)
    return _binary(
        a, b, out,
        lambda g: np.where(mask, g, 0.0),
        lambda g: np.where(mask, 0.0, g),
    )


def softmax_last(a):
    av = value_of(a)
    shifted = av - av.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=-1, keepdims=True)
    if not isinstance(a, Var):
        return Var(out)

    def vjp(g):
        dot = (g * out).sum(axis=-1, keepdims=True)
        return [out * (g - dot)]

    return Var(out, (a,), vjp)


def backward(root):
    """Accumulate gradients of a scalar ``root`` into every ancestor Var."""
    topo = []
    seen = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in seen:
                stack.append((p, False))

    root.grad = np.ones_like(root.value)
    for node in reversed(topo):
        if node.vjp is None or node.grad is None:
            continue
        for parent, pg in zip(node.parents, node.vjp(node.grad)):
            if parent.grad is None:
                parent.grad = pg
            else:
                parent.grad = parent.grad + pg
