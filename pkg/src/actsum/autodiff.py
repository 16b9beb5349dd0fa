"""Minimal reverse-mode automatic differentiation over numpy arrays.

Just enough machinery to differentiate the recurrent summarizer's joint
loss: elementwise arithmetic with broadcasting, matrix products, the
activations used by the gated encoder and heads, row stacking/slicing,
Gram matrices, principal submatrices, and a Cholesky-backed log
determinant. Values are float64 throughout.

Graphs are built eagerly: every operation returns a new :class:`Tensor`
holding its value and a closure that routes gradients to its parents.
``backward(loss)`` runs an iterative topological sweep, so graph depth is
not limited by the interpreter's recursion limit.
"""

from __future__ import annotations

import numpy as np

from .errors import NotPositiveDefinite

__all__ = [
    "Tensor",
    "constant",
    "parameter",
    "matmul",
    "sigmoid",
    "tanh",
    "gram",
    "submatrix",
    "logdet_psd",
    "log_softmax_rows",
    "take_row",
    "stack_rows",
    "hconcat",
    "tsum",
    "backward",
]


class Tensor:
    """A node in the computation graph: a float64 array plus gradient wiring."""

    __slots__ = ("value", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, value, requires_grad=False, parents=(), backward_fn=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = parents if self.requires_grad else ()
        self._backward = backward_fn if self.requires_grad else None

    @property
    def shape(self):
        return self.value.shape

    def item(self):
        return float(self.value)

    def _accumulate(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        self.grad += g

    # operator sugar -----------------------------------------------------
    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __sub__(self, other):
        return add(self, neg(_lift(other)))

    def __rsub__(self, other):
        return add(_lift(other), neg(self))

    def __neg__(self):
        return neg(self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __matmul__(self, other):
        return matmul(self, _lift(other))

    def __repr__(self):
        return f"Tensor(shape={self.value.shape}, requires_grad={self.requires_grad})"


def constant(value):
    return Tensor(value, requires_grad=False)


def parameter(value):
    return Tensor(value, requires_grad=True)


def _lift(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(g, shape):
    """Reduce a broadcast gradient back to the original operand shape."""
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def add(a, b):
    out = Tensor(a.value + b.value, a.requires_grad or b.requires_grad, (a, b))

    def back(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.value.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g, b.value.shape))

    out._backward = back
    return out


def neg(a):
    out = Tensor(-a.value, a.requires_grad, (a,))
    out._backward = lambda g: a._accumulate(-g)
    return out


def mul(a, b):
    out = Tensor(a.value * b.value, a.requires_grad or b.requires_grad, (a, b))

    def back(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g * b.value, a.value.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g * a.value, b.value.shape))

    out._backward = back
    return out


def matmul(a, b):
    out = Tensor(a.value @ b.value, a.requires_grad or b.requires_grad, (a, b))

    def back(g):
        if a.requires_grad:
            a._accumulate(g @ b.value.T)
        if b.requires_grad:
            b._accumulate(a.value.T @ g)

    out._backward = back
    return out


def _sigmoid(x):
    # piecewise form avoids overflow in exp for large |x|
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(a):
    s = _sigmoid(a.value)
    out = Tensor(s, a.requires_grad, (a,))
    out._backward = lambda g: a._accumulate(g * s * (1.0 - s))
    return out


def tanh(a):
    t = np.tanh(a.value)
    out = Tensor(t, a.requires_grad, (a,))
    out._backward = lambda g: a._accumulate(g * (1.0 - t * t))
    return out


def gram(m):
    """L = M @ M.T, the Gram matrix of the rows of M."""
    out = Tensor(m.value @ m.value.T, m.requires_grad, (m,))
    out._backward = lambda g: m._accumulate((g + g.T) @ m.value)
    return out


def submatrix(a, idx):
    """Principal submatrix a[idx, idx]; gradient scatters back into place."""
    idx = np.asarray(idx, dtype=np.intp)
    grid = np.ix_(idx, idx)
    out = Tensor(a.value[grid], a.requires_grad, (a,))

    def back(g):
        full = np.zeros_like(a.value)
        full[grid] = g
        a._accumulate(full)

    out._backward = back
    return out


def logdet_psd(a):
    """log det of a symmetric positive-definite matrix via Cholesky.

    Raises NotPositiveDefinite when the factorization fails. The empty
    0x0 matrix has determinant 1, hence log det 0.
    """
    n = a.value.shape[0]
    if n == 0:
        val = 0.0
    else:
        try:
            chol = np.linalg.cholesky(a.value)
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite(
                f"Cholesky factorization failed on a {n}x{n} matrix"
            ) from None
        val = 2.0 * float(np.sum(np.log(np.diagonal(chol))))
    out = Tensor(val, a.requires_grad, (a,))

    def back(g):
        inv = np.linalg.inv(a.value)
        a._accumulate(float(g) * 0.5 * (inv + inv.T))

    out._backward = back
    return out


def log_softmax_rows(a):
    """Row-wise log softmax, stabilized by subtracting the row max."""
    x = a.value
    m = x.max(axis=1, keepdims=True)
    shifted = x - m
    lse = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    ls = shifted - lse
    out = Tensor(ls, a.requires_grad, (a,))

    def back(g):
        soft = np.exp(ls)
        a._accumulate(g - soft * g.sum(axis=1, keepdims=True))

    out._backward = back
    return out


def take_row(a, i):
    """Row i of a 2D tensor, kept as shape (1, k)."""
    out = Tensor(a.value[i : i + 1], a.requires_grad, (a,))

    def back(g):
        full = np.zeros_like(a.value)
        full[i : i + 1] = g
        a._accumulate(full)

    out._backward = back
    return out


def stack_rows(tensors):
    """Stack (1, k) tensors into an (n, k) tensor."""
    req = any(t.requires_grad for t in tensors)
    out = Tensor(np.concatenate([t.value for t in tensors], axis=0), req, tuple(tensors))

    def back(g):
        for i, t in enumerate(tensors):
            if t.requires_grad:
                t._accumulate(g[i : i + 1])

    out._backward = back
    return out


def hconcat(tensors):
    """Concatenate 2D tensors along columns."""
    req = any(t.requires_grad for t in tensors)
    out = Tensor(np.concatenate([t.value for t in tensors], axis=1), req, tuple(tensors))

    def back(g):
        col = 0
        for t in tensors:
            w = t.value.shape[1]
            if t.requires_grad:
                t._accumulate(g[:, col : col + w])
            col += w

    out._backward = back
    return out


def tsum(a):
    """Sum of all entries, as a scalar tensor."""
    out = Tensor(a.value.sum(), a.requires_grad, (a,))
    out._backward = lambda g: a._accumulate(np.broadcast_to(g, a.value.shape).copy())
    return out


def backward(loss):
    """Accumulate d(loss)/d(leaf) into .grad of every reachable tensor."""
    if loss.value.shape != ():
        raise ValueError("backward expects a scalar loss tensor")
    order = []
    visited = set()
    stack = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited or not node.requires_grad:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            stack.append((p, False))
    loss._accumulate(np.ones(()))
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)
