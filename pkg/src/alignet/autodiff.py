"""Minimal reverse-mode automatic differentiation on numpy arrays.

A Tensor wraps a float64 ndarray and remembers the operation that produced
it.  Ops build the tape eagerly; ``backward(out)`` walks it once in reverse
topological order and accumulates gradients into every Tensor reachable from
``out`` that has ``requires_grad`` set.

Only the handful of vectorized operations needed by the two-layer attention
model are provided.  Shapes are strict: no implicit broadcasting beyond the
dedicated row-wise helpers, which keeps every backward rule a one-liner.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError


class Tensor:
    __slots__ = ("data", "grad", "parents", "backward_fn", "requires_grad")

    def __init__(self, data, parents=(), backward_fn=None, requires_grad=False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.parents = parents
        self.backward_fn = backward_fn
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, grad={'set' if self.grad is not None else 'none'})"


def constant(x) -> Tensor:
    return Tensor(x)


def parameter(x) -> Tensor:
    return Tensor(x, requires_grad=True)


def _accumulate(t: Tensor, g) -> None:
    if not t.requires_grad:
        return
    if t.grad is None:
        # copy: g may alias a temporary that other backward rules also receive
        t.grad = g.copy() if isinstance(g, np.ndarray) else np.asarray(g, dtype=np.float64)
    else:
        t.grad += g


def backward(out: Tensor, seed: float = 1.0) -> None:
    """Accumulate d(out)/d(leaf) into .grad of every reachable Tensor."""
    if out.data.shape != ():
        raise ShapeError(f"backward needs a scalar output, got shape {out.data.shape}")
    # iterative topological order; graphs can be a few thousand nodes deep
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(out, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in seen and p.requires_grad:
                stack.append((p, False))
    out.grad = np.asarray(seed, dtype=np.float64)
    for node in reversed(order):
        if node.backward_fn is not None and node.grad is not None:
            node.backward_fn(node.grad)


# ---------------------------------------------------------------------------
# elementwise arithmetic (strict same-shape, or python-float scale)

def add(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ShapeError(f"add: {a.data.shape} vs {b.data.shape}")
    out = Tensor(a.data + b.data, (a, b))
    out.backward_fn = lambda g: (_accumulate(a, g), _accumulate(b, g))
    return out


def sub(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ShapeError(f"sub: {a.data.shape} vs {b.data.shape}")
    out = Tensor(a.data - b.data, (a, b))
    out.backward_fn = lambda g: (_accumulate(a, g), _accumulate(b, -g))
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ShapeError(f"mul: {a.data.shape} vs {b.data.shape}")
    out = Tensor(a.data * b.data, (a, b))
    out.backward_fn = lambda g: (_accumulate(a, g * b.data), _accumulate(b, g * a.data))
    return out


def div(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ShapeError(f"div: {a.data.shape} vs {b.data.shape}")
    out = Tensor(a.data / b.data, (a, b))
    out.backward_fn = lambda g: (
        _accumulate(a, g / b.data),
        _accumulate(b, -g * a.data / (b.data * b.data)),
    )
    return out


def scale(a: Tensor, c: float) -> Tensor:
    out = Tensor(a.data * c, (a,))
    out.backward_fn = lambda g: _accumulate(a, g * c)
    return out


def add_const(a: Tensor, c) -> Tensor:
    """a + c for a plain ndarray/scalar c that carries no gradient."""
    out = Tensor(a.data + np.asarray(c, dtype=np.float64), (a,))
    out.backward_fn = lambda g: _accumulate(a, g)
    return out


# ---------------------------------------------------------------------------
# linear algebra

def linear(x: Tensor, w: Tensor) -> Tensor:
    """x @ w.T for x:(n,d), w:(k,d) -> (n,k)."""
    if x.data.ndim != 2 or w.data.ndim != 2 or x.data.shape[1] != w.data.shape[1]:
        raise ShapeError(f"linear: {x.data.shape} vs {w.data.shape}")
    out = Tensor(x.data @ w.data.T, (x, w))
    out.backward_fn = lambda g: (
        _accumulate(x, g @ w.data),
        _accumulate(w, g.T @ x.data),
    )
    return out


def matvec(x: Tensor, v: Tensor) -> Tensor:
    """x @ v for x:(n,d), v:(d,) -> (n,)."""
    if x.data.ndim != 2 or v.data.ndim != 1 or x.data.shape[1] != v.data.shape[0]:
        raise ShapeError(f"matvec: {x.data.shape} vs {v.data.shape}")
    out = Tensor(x.data @ v.data, (x, v))
    out.backward_fn = lambda g: (
        _accumulate(x, np.outer(g, v.data)),
        _accumulate(v, x.data.T @ g),
    )
    return out


def slice1d(v: Tensor, start: int, stop: int) -> Tensor:
    """Contiguous slice of a 1-D tensor (used to split score vectors in half)."""
    if v.data.ndim != 1:
        raise ShapeError(f"slice1d needs a vector, got shape {v.data.shape}")
    out = Tensor(v.data[start:stop], (v,))

    def _back(g):
        acc = np.zeros_like(v.data)
        acc[start:stop] = g
        _accumulate(v, acc)

    out.backward_fn = _back
    return out


def concat_cols(parts: list[Tensor]) -> Tensor:
    widths = [p.data.shape[1] for p in parts]
    out = Tensor(np.concatenate([p.data for p in parts], axis=1), tuple(parts))

    def _back(g):
        col = 0
        for p, w in zip(parts, widths):
            _accumulate(p, g[:, col:col + w])
            col += w

    out.backward_fn = _back
    return out


# ---------------------------------------------------------------------------
# gather / scatter over node and edge index arrays

def gather(x: Tensor, idx: np.ndarray) -> Tensor:
    """Rows (or entries, for 1-D x) of x selected by an int index array."""
    out = Tensor(x.data[idx], (x,))

    def _back(g):
        acc = np.zeros_like(x.data)
        np.add.at(acc, idx, g)
        _accumulate(x, acc)

    out.backward_fn = _back
    return out


def segment_sum(x: Tensor, seg: np.ndarray, n: int) -> Tensor:
    """Sum entries/rows of x into n buckets given per-entry bucket ids."""
    shape = (n,) if x.data.ndim == 1 else (n, x.data.shape[1])
    acc = np.zeros(shape, dtype=np.float64)
    np.add.at(acc, seg, x.data)
    out = Tensor(acc, (x,))
    out.backward_fn = lambda g: _accumulate(x, g[seg])
    return out


def scale_rows(x: Tensor, s: Tensor) -> Tensor:
    """Row-wise scale: x:(e,d) by s:(e,)."""
    if x.data.ndim != 2 or s.data.ndim != 1 or x.data.shape[0] != s.data.shape[0]:
        raise ShapeError(f"scale_rows: {x.data.shape} vs {s.data.shape}")
    out = Tensor(x.data * s.data[:, None], (x, s))
    out.backward_fn = lambda g: (
        _accumulate(x, g * s.data[:, None]),
        _accumulate(s, np.sum(g * x.data, axis=1)),
    )
    return out


def div_rows(x: Tensor, s: Tensor) -> Tensor:
    """Row-wise divide: x:(n,d) by s:(n,)."""
    if x.data.ndim != 2 or s.data.ndim != 1 or x.data.shape[0] != s.data.shape[0]:
        raise ShapeError(f"div_rows: {x.data.shape} vs {s.data.shape}")
    out = Tensor(x.data / s.data[:, None], (x, s))
    out.backward_fn = lambda g: (
        _accumulate(x, g / s.data[:, None]),
        _accumulate(s, -np.sum(g * x.data, axis=1) / (s.data * s.data)),
    )
    return out


# ---------------------------------------------------------------------------
# reductions

def sum_all(x: Tensor) -> Tensor:
    out = Tensor(np.sum(x.data), (x,))
    out.backward_fn = lambda g: _accumulate(x, np.full_like(x.data, float(g)))
    return out


def sum_rows(x: Tensor) -> Tensor:
    """Sum along axis 1: (n,d) -> (n,)."""
    out = Tensor(np.sum(x.data, axis=1), (x,))
    out.backward_fn = lambda g: _accumulate(x, np.repeat(g[:, None], x.data.shape[1], axis=1))
    return out


def sum_squares(parts: list[Tensor]) -> Tensor:
    """Scalar sum of squared entries over many tensors (one fused op)."""
    total = 0.0
    for p in parts:
        flat = p.data.reshape(-1)
        total += float(flat @ flat)
    out = Tensor(total, tuple(parts))

    def _back(g):
        for p in parts:
            _accumulate(p, (2.0 * float(g)) * p.data)

    out.backward_fn = _back
    return out


# ---------------------------------------------------------------------------
# nonlinearities

def exp(x: Tensor) -> Tensor:
    y = np.exp(x.data)
    out = Tensor(y, (x,))
    out.backward_fn = lambda g: _accumulate(x, g * y)
    return out


def log(x: Tensor) -> Tensor:
    out = Tensor(np.log(x.data), (x,))
    out.backward_fn = lambda g: _accumulate(x, g / x.data)
    return out


def sigmoid_np(x: np.ndarray) -> np.ndarray:
    """Overflow-free sigmoid on plain arrays."""
    z = np.exp(-np.abs(x))
    return np.where(np.asarray(x) >= 0.0, 1.0 / (1.0 + z), z / (1.0 + z))


def sigmoid(x: Tensor) -> Tensor:
    y = sigmoid_np(x.data)
    out = Tensor(y, (x,))
    out.backward_fn = lambda g: _accumulate(x, g * y * (1.0 - y))
    return out


def log_sigmoid(x: Tensor, eps: float) -> Tensor:
    """log(clip(sigmoid(x), eps, 1-eps)) with the exact bounded derivative.

    The clamp keeps the value finite when the sigmoid saturates; the gradient
    is the analytic d log(sigmoid)/dx = 1 - sigmoid(x), so saturated links
    keep pulling instead of going dead at the clamp boundary.
    """
    s = sigmoid_np(x.data)
    out = Tensor(np.log(np.clip(s, eps, 1.0 - eps)), (x,))
    out.backward_fn = lambda g: _accumulate(x, g * (1.0 - s))
    return out


def log_one_minus_sigmoid(x: Tensor, eps: float) -> Tensor:
    """log(clip(1 - sigmoid(x), eps, 1-eps)); derivative is -sigmoid(x)."""
    s = sigmoid_np(x.data)
    out = Tensor(np.log(np.clip(1.0 - s, eps, 1.0 - eps)), (x,))
    out.backward_fn = lambda g: _accumulate(x, g * (-s))
    return out


def leaky_relu(x: Tensor, slope: float = 0.2) -> Tensor:
    # right-derivative convention at the kink: d/dx at 0 is 1
    pos = x.data >= 0.0
    out = Tensor(np.where(pos, x.data, slope * x.data), (x,))
    out.backward_fn = lambda g: _accumulate(x, g * np.where(pos, 1.0, slope))
    return out


def elu(x: Tensor, alpha: float = 1.0) -> Tensor:
    pos = x.data >= 0.0
    y = np.where(pos, x.data, alpha * (np.exp(np.minimum(x.data, 0.0)) - 1.0))
    out = Tensor(y, (x,))
    out.backward_fn = lambda g: _accumulate(x, g * np.where(pos, 1.0, y + alpha))
    return out


