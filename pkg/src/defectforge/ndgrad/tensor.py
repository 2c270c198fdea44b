"""Differentiable n-d arrays recorded on a replayable tape.

The engine is deliberately small: 64-bit floats, a fixed set of ops
(affine, pointwise nonlinearities, reductions, norms), and reverse-mode
differentiation whose backward pass is itself built out of recordable ops,
so gradients can be differentiated again (double backprop).
"""

from __future__ import annotations

import threading
from typing import Callable, Iterable, Sequence

import numpy as np


class NdgradError(Exception):
    """Base class for engine errors."""


class ShapeMismatchError(NdgradError):
    """Operand shapes are incompatible for the requested op."""


class NonFiniteResultError(NdgradError):
    """A forward op produced NaN or infinity."""


class NotOnTapeError(NdgradError):
    """A requested gradient target is not reachable from the output."""


class NotScalarOutputError(NdgradError):
    """grad() requires a rank-0 output."""


_STATE = threading.local()


def _tapes() -> list["Tape"]:
    if not hasattr(_STATE, "tapes"):
        _STATE.tapes = []
        _STATE.paused = 0
    return _STATE.tapes


def active_tape() -> "Tape | None":
    """The innermost active tape of the current thread, or None."""
    tapes = _tapes()
    if _STATE.paused or not tapes:
        return None
    return tapes[-1]


class paused:
    """Context manager that suspends recording without leaving the tape."""

    def __enter__(self):
        _tapes()
        _STATE.paused += 1
        return self

    def __exit__(self, *exc):
        _STATE.paused -= 1
        return False


class Node:
    """One recorded operation: op kind, input tensors, saved aux values."""

    __slots__ = ("op", "parents", "aux", "out")

    def __init__(self, op: str, parents: tuple["Tensor", ...], aux: tuple, out: "Tensor"):
        self.op = op
        self.parents = parents
        self.aux = aux
        self.out = out


class Tape:
    """Append-only record of operations, in topological order.

    Tensors and the tape they live on are confined to a single thread.
    Entering a tape makes it the recording target for ops run inside.
    """

    __slots__ = ("nodes",)

    def __init__(self):
        self.nodes: list[Node] = []

    def __enter__(self) -> "Tape":
        _tapes().append(self)
        return self

    def __exit__(self, *exc):
        popped = _tapes().pop()
        assert popped is self, "tapes must unwind in LIFO order"
        return False

    def __len__(self) -> int:
        return len(self.nodes)

    def replay(self) -> bool:
        """Recompute every node from its recorded inputs.

        Returns True when each recomputed value is bit-identical to the
        stored one, which is the tape's core integrity invariant.
        """
        for node in self.nodes:
            fresh = _FORWARD[node.op](tuple(p.data for p in node.parents), node.aux)
            if fresh.tobytes() != node.out.data.tobytes():
                return False
        return True


class Tensor:
    """A float64 array plus an optional handle to the op that made it."""

    __slots__ = ("data", "node")

    def __init__(self, data, node: Node | None = None):
        arr = np.asarray(data, dtype=np.float64)
        self.data = arr
        self.node = node

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        kind = "leaf" if self.node is None else self.node.op
        return f"Tensor(shape={self.shape}, op={kind})"

    # operator sugar; all arithmetic goes through the recorded ops below
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

    def __matmul__(self, other):
        return matmul(self, other)


def tensor(data) -> Tensor:
    """Create a leaf tensor (no recorded provenance)."""
    return Tensor(data)


def _coerce(x) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=np.float64))


# ---------------------------------------------------------------------------
# forward definitions, keyed by op kind so the tape can replay them

_FORWARD: dict[str, Callable[[tuple, tuple], np.ndarray]] = {}


def _fwd(name: str):
    def deco(fn):
        _FORWARD[name] = fn
        return fn

    return deco


@_fwd("add")
def _f_add(datas, aux):
    return datas[0] + datas[1]


@_fwd("sub")
def _f_sub(datas, aux):
    return datas[0] - datas[1]


@_fwd("mul")
def _f_mul(datas, aux):
    return datas[0] * datas[1]


@_fwd("div")
def _f_div(datas, aux):
    return datas[0] / datas[1]


@_fwd("matmul")
def _f_matmul(datas, aux):
    return datas[0] @ datas[1]


@_fwd("transpose")
def _f_transpose(datas, aux):
    return datas[0].T.copy()


@_fwd("reshape")
def _f_reshape(datas, aux):
    return datas[0].reshape(aux[0]).copy()


@_fwd("leaky_relu")
def _f_leaky_relu(datas, aux):
    x = datas[0]
    return np.where(x > 0.0, x, aux[0] * x)


@_fwd("tanh")
def _f_tanh(datas, aux):
    return np.tanh(datas[0])


@_fwd("log")
def _f_log(datas, aux):
    return np.log(datas[0])


@_fwd("exp")
def _f_exp(datas, aux):
    return np.exp(datas[0])


@_fwd("square")
def _f_square(datas, aux):
    return np.square(datas[0])


@_fwd("sqrt")
def _f_sqrt(datas, aux):
    return np.sqrt(datas[0])


@_fwd("sum")
def _f_sum(datas, aux):
    return np.sum(datas[0], axis=aux[0])


@_fwd("spread")
def _f_spread(datas, aux):
    return np.full(aux[0], float(datas[0]))


@_fwd("expand_rows")
def _f_expand_rows(datas, aux):
    return np.repeat(datas[0][np.newaxis, :], aux[0], axis=0)


@_fwd("expand_cols")
def _f_expand_cols(datas, aux):
    return np.repeat(datas[0][:, np.newaxis], aux[0], axis=1)


def _apply(op: str, parents: tuple[Tensor, ...], aux: tuple = ()) -> Tensor:
    # overflow/invalid surface as NonFiniteResultError below, not as warnings
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        out_data = _FORWARD[op](tuple(p.data for p in parents), aux)
    if not np.all(np.isfinite(out_data)):
        raise NonFiniteResultError(f"op '{op}' produced a non-finite value")
    tape = active_tape()
    if tape is None:
        return Tensor(out_data)
    out = Tensor(out_data)
    node = Node(op, parents, aux, out)
    out.node = node
    tape.nodes.append(node)
    return out


def _scalar_pair(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape != b.shape and a.shape != () and b.shape != ():
        raise ShapeMismatchError(
            f"{op}: shapes {a.shape} and {b.shape} differ and neither is scalar"
        )


# ---------------------------------------------------------------------------
# public ops


def add(a, b) -> Tensor:
    a, b = _coerce(a), _coerce(b)
    _scalar_pair(a, b, "add")
    return _apply("add", (a, b))


def sub(a, b) -> Tensor:
    a, b = _coerce(a), _coerce(b)
    _scalar_pair(a, b, "sub")
    return _apply("sub", (a, b))


def mul(a, b) -> Tensor:
    a, b = _coerce(a), _coerce(b)
    _scalar_pair(a, b, "mul")
    return _apply("mul", (a, b))


def div(a, b) -> Tensor:
    a, b = _coerce(a), _coerce(b)
    _scalar_pair(a, b, "div")
    return _apply("div", (a, b))


def scale(a, c: float) -> Tensor:
    """Multiply by a python scalar constant."""
    return mul(a, float(c))


def matmul(a, b) -> Tensor:
    a, b = _coerce(a), _coerce(b)
    if a.data.ndim == 0 or b.data.ndim == 0:
        raise ShapeMismatchError("matmul requires rank >= 1 operands")
    if a.shape[-1] != b.shape[0]:
        raise ShapeMismatchError(f"matmul: inner extents {a.shape} x {b.shape} differ")
    if a.data.ndim > 2 or b.data.ndim > 2:
        raise ShapeMismatchError("matmul supports rank-1 and rank-2 operands only")
    return _apply("matmul", (a, b))


def transpose(a) -> Tensor:
    a = _coerce(a)
    if a.data.ndim != 2:
        raise ShapeMismatchError("transpose expects a rank-2 tensor")
    return _apply("transpose", (a,))


def reshape(a, shape: Sequence[int]) -> Tensor:
    a = _coerce(a)
    shape = tuple(int(s) for s in shape)
    if int(np.prod(shape, dtype=np.int64)) != a.size:
        raise ShapeMismatchError(f"cannot reshape {a.shape} to {shape}")
    return _apply("reshape", (a,), (shape,))


def leaky_relu(a, slope: float = 0.2) -> Tensor:
    return _apply("leaky_relu", (_coerce(a),), (float(slope),))


def tanh(a) -> Tensor:
    return _apply("tanh", (_coerce(a),))


def log(a) -> Tensor:
    a = _coerce(a)
    if np.any(a.data <= 0.0):
        raise NonFiniteResultError("log of a non-positive value")
    return _apply("log", (a,))


def exp(a) -> Tensor:
    return _apply("exp", (_coerce(a),))


def square(a) -> Tensor:
    return _apply("square", (_coerce(a),))


def sqrt(a) -> Tensor:
    a = _coerce(a)
    if np.any(a.data < 0.0):
        raise NonFiniteResultError("sqrt of a negative value")
    return _apply("sqrt", (a,))


def tsum(a, axis: int | None = None) -> Tensor:
    """Sum over all elements (axis=None) or along axis 0 or 1."""
    a = _coerce(a)
    if axis is not None:
        if a.data.ndim != 2 or axis not in (0, 1):
            raise ShapeMismatchError("axis sums are defined for rank-2 tensors, axis 0 or 1")
    return _apply("sum", (a,), (axis, a.shape))


def mean(a, axis: int | None = None) -> Tensor:
    """Arithmetic mean, built from sum and scale so it differentiates freely."""
    a = _coerce(a)
    if axis is None:
        n = a.size
    else:
        n = a.shape[axis]
    return scale(tsum(a, axis), 1.0 / float(n))


def spread(s, shape: Sequence[int]) -> Tensor:
    """Broadcast a rank-0 tensor to the given shape (the only non-scalar broadcast)."""
    s = _coerce(s)
    if s.shape != ():
        raise ShapeMismatchError("spread expects a rank-0 tensor")
    return _apply("spread", (s,), (tuple(int(x) for x in shape),))


def expand_rows(v, n: int) -> Tensor:
    """Tile a vector (d,) into (n, d); the explicit form of a bias broadcast."""
    v = _coerce(v)
    if v.data.ndim != 1:
        raise ShapeMismatchError("expand_rows expects a rank-1 tensor")
    return _apply("expand_rows", (v,), (int(n),))


def expand_cols(v, n: int) -> Tensor:
    """Tile a vector (m,) into (m, n)."""
    v = _coerce(v)
    if v.data.ndim != 1:
        raise ShapeMismatchError("expand_cols expects a rank-1 tensor")
    return _apply("expand_cols", (v,), (int(n),))


def l2norm(a, axis: int | None = None) -> Tensor:
    """Euclidean norm over all elements, or per-row (axis=1) / per-column (axis=0)."""
    return sqrt(tsum(square(a), axis))


def affine(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """x @ w + b with the bias tiled across the batch rows."""
    y = matmul(x, w)
    if y.data.ndim == 2:
        return add(y, expand_rows(b, y.shape[0]))
    return add(y, b)


# ---------------------------------------------------------------------------
# backward rules
#
# Each rule receives the node and the gradient flowing into its output and
# returns one gradient tensor per parent.  Rules are written in terms of the
# public ops above, so running them while a tape is active records them,
# which is exactly what makes second derivatives possible.

_BACKWARD: dict[str, Callable[[Node, Tensor], tuple]] = {}


def _bwd(name: str):
    def deco(fn):
        _BACKWARD[name] = fn
        return fn

    return deco


def _reduce_to(g: Tensor, shape: tuple[int, ...]) -> Tensor:
    # collapse a full-shape gradient back onto a scalar operand
    if g.shape == shape:
        return g
    return tsum(g) if shape == () else g


@_bwd("add")
def _b_add(node, g):
    a, b = node.parents
    return _reduce_to(g, a.shape), _reduce_to(g, b.shape)


@_bwd("sub")
def _b_sub(node, g):
    a, b = node.parents
    return _reduce_to(g, a.shape), _reduce_to(mul(g, -1.0), b.shape)


@_bwd("mul")
def _b_mul(node, g):
    a, b = node.parents
    return _reduce_to(mul(g, b), a.shape), _reduce_to(mul(g, a), b.shape)


@_bwd("div")
def _b_div(node, g):
    a, b = node.parents
    y = node.out
    da = _reduce_to(div(g, b), a.shape)
    db = _reduce_to(mul(div(mul(g, y), b), -1.0), b.shape)
    return da, db


@_bwd("matmul")
def _b_matmul(node, g):
    a, b = node.parents
    if a.data.ndim == 2 and b.data.ndim == 2:
        return matmul(g, transpose(b)), matmul(transpose(a), g)
    if a.data.ndim == 2 and b.data.ndim == 1:
        m, k = a.shape
        da = matmul(reshape(g, (m, 1)), reshape(b, (1, k)))
        db = matmul(transpose(a), g)
        return da, db
    if a.data.ndim == 1 and b.data.ndim == 2:
        k, n = b.shape
        da = matmul(b, g)
        db = matmul(reshape(a, (k, 1)), reshape(g, (1, n)))
        return da, db
    # vector . vector -> rank-0
    return mul(b, g), mul(a, g)


@_bwd("transpose")
def _b_transpose(node, g):
    return (transpose(g),)


@_bwd("reshape")
def _b_reshape(node, g):
    return (reshape(g, node.parents[0].shape),)


@_bwd("leaky_relu")
def _b_leaky_relu(node, g):
    x = node.parents[0]
    slope = node.aux[0]
    # the sub-gradient mask is constant almost everywhere, so it enters as a leaf
    mask = Tensor(np.where(x.data > 0.0, 1.0, slope))
    return (mul(g, mask),)


@_bwd("tanh")
def _b_tanh(node, g):
    y = node.out
    return (mul(g, sub(1.0, square(y))),)


@_bwd("log")
def _b_log(node, g):
    return (div(g, node.parents[0]),)


@_bwd("exp")
def _b_exp(node, g):
    return (mul(g, node.out),)


@_bwd("square")
def _b_square(node, g):
    return (mul(mul(g, node.parents[0]), 2.0),)


@_bwd("sqrt")
def _b_sqrt(node, g):
    return (div(g, mul(node.out, 2.0)),)


@_bwd("sum")
def _b_sum(node, g):
    axis, in_shape = node.aux
    if axis is None:
        return (spread(g, in_shape),)
    if axis == 0:
        return (expand_rows(g, in_shape[0]),)
    return (expand_cols(g, in_shape[1]),)


@_bwd("spread")
def _b_spread(node, g):
    return (tsum(g),)


@_bwd("expand_rows")
def _b_expand_rows(node, g):
    return (tsum(g, axis=0),)


@_bwd("expand_cols")
def _b_expand_cols(node, g):
    return (tsum(g, axis=1),)


# ---------------------------------------------------------------------------
# reverse-mode differentiation


def _ancestors(output: Tensor) -> list[Tensor]:
    """All tensors reachable from `output`, in reverse-topological order."""
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(output, False)]
    while stack:
        t, expanded = stack.pop()
        if expanded:
            order.append(t)
            continue
        if id(t) in seen:
            continue
        seen.add(id(t))
        stack.append((t, True))
        if t.node is not None:
            for p in t.node.parents:
                if id(p) not in seen:
                    stack.append((p, False))
    order.reverse()  # output first, leaves last
    return order


def grad(output: Tensor, wrt: Iterable[Tensor], record: bool = False) -> list[Tensor]:
    """Differentiate a scalar output with respect to each tensor in `wrt`.

    With record=True the backward computation is appended to the active
    tape, so the returned gradients may be differentiated again; this is
    the double-backprop path used by the gradient-penalty loss.  With
    record=False the walk runs unrecorded, which is cheaper and right for
    plain parameter updates.
    """
    if output.shape != ():
        raise NotScalarOutputError(f"grad expects a rank-0 output, got shape {output.shape}")
    wrt = list(wrt)
    if record and active_tape() is None:
        raise NotOnTapeError("record=True requires an active tape to record onto")

    order = _ancestors(output)
    reachable = {id(t) for t in order}
    for t in wrt:
        if id(t) not in reachable:
            raise NotOnTapeError("a wrt tensor is not an ancestor of the output")

    ctx = paused() if not record else _null_ctx()
    with ctx:
        grads: dict[int, Tensor] = {id(output): Tensor(1.0)}
        for t in order:
            g = grads.get(id(t))
            if g is None or t.node is None:
                continue
            parent_grads = _BACKWARD[t.node.op](t.node, g)
            for p, pg in zip(t.node.parents, parent_grads):
                if pg is None:
                    continue
                have = grads.get(id(p))
                grads[id(p)] = pg if have is None else add(have, pg)
    out = []
    for t in wrt:
        g = grads.get(id(t))
        out.append(g if g is not None else Tensor(np.zeros(t.shape)))
    return out


class _null_ctx:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False
