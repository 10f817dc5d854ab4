"""Dense float64 tensors with reverse-mode automatic differentiation.

Forward operations execute immediately on numpy arrays. When a ``Tape`` is
active, every op that touches a gradient-bearing tensor appends a backward
rule to it; ``Tape.backward`` then sweeps the rules in reverse execution
order, which is a valid topological order, visiting each node exactly once
and summing gradients where tensors are shared. With no active tape, ops
run forward-only, which is how inference and finite-difference probes stay
cheap.

Everything is 64-bit: gradient checks at eps=1e-5 need the headroom, and
nothing here is large enough for speed to matter.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError
from .rng import SplitMix64

# Additive mask value: exp(MASKED - rowmax) underflows to exactly 0.0.
MASKED = -1e30


class Tensor:
    """N-dimensional float64 value, optionally carrying a gradient."""

    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return scale(self, -1.0)


class Tape:
    """Record of op backward rules in execution order."""

    _active: "Tape | None" = None

    def __init__(self):
        self._nodes: list[tuple[Tensor, Callable[[np.ndarray], None]]] = []

    def __enter__(self) -> "Tape":
        if Tape._active is not None:
            raise RuntimeError("tapes do not nest")
        Tape._active = self
        return self

    def __exit__(self, *exc) -> None:
        Tape._active = None

    def __len__(self) -> int:
        return len(self._nodes)

    @staticmethod
    def current() -> "Tape | None":
        return Tape._active

    def backward(self, loss: Tensor, seed: float = 1.0) -> None:
        """Propagate d(loss)/d(everything) back through the recorded ops.

        ``seed`` scales the whole gradient, which lets a caller average
        per-example losses without an extra graph node.
        """
        loss._accumulate(np.full_like(loss.data, seed))
        for out, rule in reversed(self._nodes):
            if out.grad is not None:
                rule(out.grad)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _record(out: Tensor, rule: Callable[[np.ndarray], None], *parents: Tensor) -> Tensor:
    tape = Tape._active
    if tape is not None and any(p.requires_grad for p in parents):
        out.requires_grad = True
        tape._nodes.append((out, rule))
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``g`` down to ``shape`` to undo numpy broadcasting."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


# --- elementwise and structural ops ----------------------------------------


def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = Tensor(a.data + b.data)

    def rule(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g, b.data.shape))

    return _record(out, rule, a, b)


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = Tensor(a.data - b.data)

    def rule(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b._accumulate(-_unbroadcast(g, b.data.shape))

    return _record(out, rule, a, b)


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = Tensor(a.data * b.data)

    def rule(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(_unbroadcast(g * b.data, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g * a.data, b.data.shape))

    return _record(out, rule, a, b)


def div(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = Tensor(a.data / b.data)

    def rule(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(_unbroadcast(g / b.data, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(-g * a.data / (b.data * b.data), b.data.shape))

    return _record(out, rule, a, b)


def scale(x, c: float) -> Tensor:
    x = _as_tensor(x)
    out = Tensor(x.data * c)

    def rule(g: np.ndarray) -> None:
        if x.requires_grad:
            x._accumulate(g * c)

    return _record(out, rule, x)


def matmul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.data.shape[1] != b.data.shape[0]:
        raise DimensionError("matmul", a.data.shape, b.data.shape)
    out = Tensor(a.data @ b.data)

    def rule(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(g @ b.data.T)
        if b.requires_grad:
            b._accumulate(a.data.T @ g)

    return _record(out, rule, a, b)


def transpose(x) -> Tensor:
    x = _as_tensor(x)
    if x.data.ndim != 2:
        raise DimensionError("transpose", x.data.shape)
    out = Tensor(x.data.T.copy())

    def rule(g: np.ndarray) -> None:
        if x.requires_grad:
            x._accumulate(g.T)

    return _record(out, rule, x)


def reshape(x, shape: tuple[int, ...]) -> Tensor:
    x = _as_tensor(x)
    out = Tensor(x.data.reshape(shape))

    def rule(g: np.ndarray) -> None:
        if x.requires_grad:
            x._accumulate(g.reshape(x.data.shape))

    return _record(out, rule, x)


def concat(parts: Sequence[Tensor], axis: int = 0) -> Tensor:
    parts = [_as_tensor(p) for p in parts]
    out = Tensor(np.concatenate([p.data for p in parts], axis=axis))
    sizes = [p.data.shape[axis] for p in parts]
    offsets = np.cumsum(sizes)[:-1]

    def rule(g: np.ndarray) -> None:
        for p, piece in zip(parts, np.split(g, offsets, axis=axis)):
            if p.requires_grad:
                p._accumulate(piece)

    return _record(out, rule, *parts)


def tanh(x) -> Tensor:
    x = _as_tensor(x)
    out = Tensor(np.tanh(x.data))

    def rule(g: np.ndarray) -> None:
        if x.requires_grad:
            x._accumulate(g * (1.0 - out.data * out.data))

    return _record(out, rule, x)


def sigmoid(x) -> Tensor:
    x = _as_tensor(x)
    # Stable in both tails.
    d = x.data
    out_data = np.where(d >= 0, 1.0 / (1.0 + np.exp(-np.abs(d))),
                        np.exp(-np.abs(d)) / (1.0 + np.exp(-np.abs(d))))
    out = Tensor(out_data)

    def rule(g: np.ndarray) -> None:
        if x.requires_grad:
            x._accumulate(g * out.data * (1.0 - out.data))

    return _record(out, rule, x)


def relu(x) -> Tensor:
    x = _as_tensor(x)
    out = Tensor(np.maximum(x.data, 0.0))

    def rule(g: np.ndarray) -> None:
        if x.requires_grad:
            x._accumulate(g * (x.data > 0))

    return _record(out, rule, x)


def sqrt(x) -> Tensor:
    x = _as_tensor(x)
    out = Tensor(np.sqrt(x.data))

    def rule(g: np.ndarray) -> None:
        if x.requires_grad:
            x._accumulate(g * 0.5 / out.data)

    return _record(out, rule, x)


def sum_(x, axis: int | None = None, keepdims: bool = False) -> Tensor:
    x = _as_tensor(x)
    out = Tensor(x.data.sum(axis=axis, keepdims=keepdims))

    def rule(g: np.ndarray) -> None:
        if x.requires_grad:
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            x._accumulate(np.broadcast_to(g, x.data.shape).copy())

    return _record(out, rule, x)


def mean(x, axis: int | None = None, keepdims: bool = False) -> Tensor:
    x = _as_tensor(x)
    out = Tensor(x.data.mean(axis=axis, keepdims=keepdims))
    count = x.data.size if axis is None else x.data.shape[axis]

    def rule(g: np.ndarray) -> None:
        if x.requires_grad:
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            x._accumulate(np.broadcast_to(g, x.data.shape) / count)

    return _record(out, rule, x)


def softmax(x, axis: int = -1) -> Tensor:
    """Normalized exponentials along ``axis``, computed with max-subtraction.

    Entries at ``MASKED`` come out exactly 0.
    """
    x = _as_tensor(x)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = Tensor(e / e.sum(axis=axis, keepdims=True))

    def rule(g: np.ndarray) -> None:
        if x.requires_grad:
            s = out.data
            x._accumulate(s * (g - (g * s).sum(axis=axis, keepdims=True)))

    return _record(out, rule, x)


def embedding_lookup(table: Tensor, indices) -> Tensor:
    """Rows of ``table`` at ``indices``; gradients scatter-add back."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= table.data.shape[0]):
        raise IndexError(
            f"embedding index out of range [0, {table.data.shape[0]}): {indices}"
        )
    out = Tensor(table.data[idx])

    def rule(g: np.ndarray) -> None:
        if table.requires_grad:
            if table.grad is None:
                table.grad = np.zeros_like(table.data)
            np.add.at(table.grad, idx, g)

    return _record(out, rule, table)


def nll_loss(logits: Tensor, targets, reduction: str = "mean") -> Tensor:
    """Negative log-likelihood of ``targets`` under row-wise softmax.

    ``logits`` has one row per target position. ``mean`` averages over
    rows; ``sum`` accumulates, which is what a per-sentence training
    objective wants.
    """
    if reduction not in ("mean", "sum"):
        raise ValueError(f"unknown reduction {reduction!r}")
    idx = np.asarray(targets, dtype=np.int64)
    if logits.data.ndim != 2 or idx.ndim != 1 or len(idx) != logits.data.shape[0]:
        raise DimensionError("nll_loss", logits.data.shape, idx.shape)
    if idx.size and (idx.min() < 0 or idx.max() >= logits.data.shape[1]):
        raise IndexError(
            f"target index out of range [0, {logits.data.shape[1]}): {targets}"
        )
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_p = shifted[np.arange(len(idx)), idx] - log_z[:, 0]
    total = -log_p.sum()
    out = Tensor(total / len(idx) if reduction == "mean" else total)

    def rule(g: np.ndarray) -> None:
        if logits.requires_grad:
            probs = np.exp(shifted - log_z)
            probs[np.arange(len(idx)), idx] -= 1.0
            if reduction == "mean":
                probs /= len(idx)
            logits._accumulate(float(g) * probs)

    return _record(out, rule, logits)


# --- parameters and verification -------------------------------------------


def parameter(data) -> Tensor:
    return Tensor(data, requires_grad=True)


def glorot(shape: tuple[int, ...], rng: SplitMix64) -> Tensor:
    """Uniform init in +-sqrt(6 / (fan_in + fan_out))."""
    fan_in = shape[0]
    fan_out = shape[1] if len(shape) > 1 else 1
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return parameter(rng.uniform_array(shape, -bound, bound))


def zeros(shape: tuple[int, ...]) -> Tensor:
    return parameter(np.zeros(shape))


def grad_check(
    f: Callable[[Tensor], Tensor], point: Tensor, eps: float = 1e-5
) -> float:
    """Max relative error between backward and central-difference gradients.

    Relative error per element is |analytic - numeric| divided by
    max(1e-8, |analytic| + |numeric|).
    """
    point.grad = None
    with Tape() as tape:
        out = f(point)
    tape.backward(out)
    analytic = (point.grad if point.grad is not None else np.zeros_like(point.data)).copy()
    point.grad = None

    numeric = np.zeros_like(point.data)
    flat = point.data.reshape(-1)
    num_flat = numeric.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        f_plus = f(point).item()
        flat[i] = orig - eps
        f_minus = f(point).item()
        flat[i] = orig
        num_flat[i] = (f_plus - f_minus) / (2.0 * eps)

    denom = np.maximum(1e-8, np.abs(analytic) + np.abs(numeric))
    return float(np.max(np.abs(analytic - numeric) / denom))
