"""Dense float64 tensors with tape-based reverse-mode differentiation.

The tape is implicit: every tensor produced by a recorded operation keeps
references to the tensors it was computed from plus a closure that routes
an incoming gradient back to them. Node ids are assigned in creation order,
which is automatically a topological order of the graph, so ``backward``
is a single reverse sweep over ids. Graphs are single-use: after
``backward`` the visited interior nodes are detached.

Everything is float64. Tensors are 2-D internally; scalars and flat lists
are promoted to 1x1 / 1xN row matrices on construction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import erf, expit

from .errors import ContractError, GraphError, ShapeError

_ids = itertools.count(1)

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Clamp bounds applied to probabilities before taking logs in the losses.
PROB_CLAMP_LO = 1e-7
PROB_CLAMP_HI = 1.0 - 1e-7


class Tensor:
    """A 2-D float64 array, optionally recorded on the differentiation tape.

    ``node_id`` is the creation-order handle into the active graph;
    ``trainable`` tensors are leaves whose gradients ``backward`` reports
    under their ``name``.
    """

    __slots__ = ("data", "node_id", "name", "trainable", "_parents", "_grad_fn", "_needs", "_consumed")

    def __init__(self, data, name: str | None = None, trainable: bool = False):
        arr = np.array(data, dtype=np.float64, order="C")
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            arr = arr.reshape(1, -1)
        elif arr.ndim != 2:
            raise ShapeError(f"tensors are at most 2-D; got ndim={arr.ndim}")
        if arr.size == 0:
            raise ShapeError("tensors must have positive extents")
        if trainable and not name:
            raise ContractError("trainable tensors need a name for gradient reporting")
        self.data = arr
        self.node_id = next(_ids)
        self.name = name
        self.trainable = trainable
        self._parents: tuple[Tensor, ...] = ()
        self._grad_fn: Callable[[np.ndarray], list[tuple[Tensor, np.ndarray]]] | None = None
        self._needs = trainable
        self._consumed = False

    @classmethod
    def _record(cls, data: np.ndarray, parents: tuple["Tensor", ...], grad_fn) -> "Tensor":
        out = cls.__new__(cls)
        out.data = np.ascontiguousarray(data, dtype=np.float64)
        out.node_id = next(_ids)
        out.name = None
        out.trainable = False
        out._consumed = False
        needing = tuple(p for p in parents if p._needs)
        if needing:
            out._parents = needing
            out._grad_fn = grad_fn
            out._needs = True
        else:
            out._parents = ()
            out._grad_fn = None
            out._needs = False
        return out

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a scalar tensor, got shape {self.shape}")
        return float(self.data[0, 0])

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{tag}, id={self.node_id})"

    # Operator sugar; the module-level functions do the real work.
    def __add__(self, other):
        return add(self, _as_tensor(other))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(_as_tensor(other)))

    def __rsub__(self, other):
        return add(_as_tensor(other), neg(self))

    def __neg__(self):
        return neg(self)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, float(other))
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, 1.0 / float(other))
        return div(self, other)

    def __matmul__(self, other):
        return matmul(self, other)


def tensor(data) -> Tensor:
    """Wrap raw values as a constant (non-trainable) tensor."""
    return Tensor(data)


def parameter(data, name: str) -> Tensor:
    """Wrap raw values as a named trainable leaf."""
    return Tensor(data, name=name, trainable=True)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _check_broadcast(sa: tuple[int, int], sb: tuple[int, int]) -> None:
    for x, y in zip(sa, sb):
        if x != y and x != 1 and y != 1:
            raise ShapeError(f"shapes {sa} and {sb} do not broadcast")


def _unbroadcast(g: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    if g.shape == shape:
        return g
    if shape[0] == 1 and g.shape[0] > 1:
        g = g.sum(axis=0, keepdims=True)
    if shape[1] == 1 and g.shape[1] > 1:
        g = g.sum(axis=1, keepdims=True)
    return g


def add(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_broadcast(a.shape, b.shape)
    out = a.data + b.data

    def grad_fn(g):
        return [(a, _unbroadcast(g, a.shape)), (b, _unbroadcast(g, b.shape))]

    return Tensor._record(out, (a, b), grad_fn)


def neg(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    return Tensor._record(-a.data, (a,), lambda g: [(a, -g)])


def mul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_broadcast(a.shape, b.shape)
    out = a.data * b.data

    def grad_fn(g):
        return [
            (a, _unbroadcast(g * b.data, a.shape)),
            (b, _unbroadcast(g * a.data, b.shape)),
        ]

    return Tensor._record(out, (a, b), grad_fn)


def div(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_broadcast(a.shape, b.shape)
    out = a.data / b.data

    def grad_fn(g):
        return [
            (a, _unbroadcast(g / b.data, a.shape)),
            (b, _unbroadcast(-g * a.data / (b.data * b.data), b.shape)),
        ]

    return Tensor._record(out, (a, b), grad_fn)


def scale(a: Tensor, c: float) -> Tensor:
    a = _as_tensor(a)
    return Tensor._record(a.data * c, (a,), lambda g: [(a, g * c)])


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul inner dimensions differ: {a.shape} x {b.shape}")
    out = a.data @ b.data

    def grad_fn(g):
        return [(a, g @ b.data.T), (b, a.data.T @ g)]

    return Tensor._record(out, (a, b), grad_fn)


def transpose(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    return Tensor._record(a.data.T, (a,), lambda g: [(a, g.T)])


def reshape(a: Tensor, rows: int, cols: int) -> Tensor:
    a = _as_tensor(a)
    if rows * cols != a.size:
        raise ShapeError(f"cannot reshape {a.shape} to ({rows}, {cols})")
    shape = a.shape
    return Tensor._record(a.data.reshape(rows, cols), (a,), lambda g: [(a, g.reshape(shape))])


def hstack(parts: Sequence[Tensor]) -> Tensor:
    parts = [_as_tensor(p) for p in parts]
    if not parts:
        raise ShapeError("hstack needs at least one tensor")
    rows = parts[0].shape[0]
    for p in parts:
        if p.shape[0] != rows:
            raise ShapeError(f"hstack row counts differ: {[p.shape for p in parts]}")
    out = np.concatenate([p.data for p in parts], axis=1)
    offsets = np.cumsum([0] + [p.shape[1] for p in parts])

    def grad_fn(g):
        return [(p, g[:, offsets[i]:offsets[i + 1]]) for i, p in enumerate(parts)]

    return Tensor._record(out, tuple(parts), grad_fn)


def vstack(parts: Sequence[Tensor]) -> Tensor:
    parts = [_as_tensor(p) for p in parts]
    if not parts:
        raise ShapeError("vstack needs at least one tensor")
    cols = parts[0].shape[1]
    for p in parts:
        if p.shape[1] != cols:
            raise ShapeError(f"vstack column counts differ: {[p.shape for p in parts]}")
    out = np.concatenate([p.data for p in parts], axis=0)
    offsets = np.cumsum([0] + [p.shape[0] for p in parts])

    def grad_fn(g):
        return [(p, g[offsets[i]:offsets[i + 1], :]) for i, p in enumerate(parts)]

    return Tensor._record(out, tuple(parts), grad_fn)


def concat_features(a: Tensor, b: Tensor) -> Tensor:
    """Column-wise concatenation [a ; b] of two tensors with equal row counts."""
    a, b = _as_tensor(a), _as_tensor(b)
    if a.shape[0] != b.shape[0]:
        raise ShapeError(f"concat_features row counts differ: {a.shape} vs {b.shape}")
    return hstack([a, b])


def slice_rows(a: Tensor, start: int, stop: int) -> Tensor:
    a = _as_tensor(a)
    if not (0 <= start < stop <= a.shape[0]):
        raise ShapeError(f"row slice [{start}:{stop}] outside shape {a.shape}")
    out = a.data[start:stop, :]

    def grad_fn(g):
        full = np.zeros_like(a.data)
        full[start:stop, :] = g
        return [(a, full)]

    return Tensor._record(out, (a,), grad_fn)


def slice_cols(a: Tensor, start: int, stop: int) -> Tensor:
    a = _as_tensor(a)
    if not (0 <= start < stop <= a.shape[1]):
        raise ShapeError(f"column slice [{start}:{stop}] outside shape {a.shape}")
    out = a.data[:, start:stop]

    def grad_fn(g):
        full = np.zeros_like(a.data)
        full[:, start:stop] = g
        return [(a, full)]

    return Tensor._record(out, (a,), grad_fn)


def sum_all(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    out = np.array([[a.data.sum()]])
    return Tensor._record(out, (a,), lambda g: [(a, np.full_like(a.data, g[0, 0]))])


def mean_all(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    n = a.size
    out = np.array([[a.data.mean()]])
    return Tensor._record(out, (a,), lambda g: [(a, np.full_like(a.data, g[0, 0] / n))])


def softmax_rows(x: Tensor) -> Tensor:
    """Row-wise softmax with per-row max subtraction for stability."""
    x = _as_tensor(x)
    shifted = x.data - x.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=1, keepdims=True)

    def grad_fn(g):
        dot = (g * s).sum(axis=1, keepdims=True)
        return [(x, s * (g - dot))]

    return Tensor._record(s, (x,), grad_fn)


def sigmoid(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    s = expit(x.data)
    return Tensor._record(s, (x,), lambda g: [(x, g * s * (1.0 - s))])


def gelu(x: Tensor) -> Tensor:
    """Gaussian error linear unit, exact erf form."""
    x = _as_tensor(x)
    cdf = 0.5 * (1.0 + erf(x.data * _INV_SQRT2))
    out = x.data * cdf

    def grad_fn(g):
        pdf = np.exp(-0.5 * x.data * x.data) * _INV_SQRT_2PI
        return [(x, g * (cdf + x.data * pdf))]

    return Tensor._record(out, (x,), grad_fn)


def log_clamped(x: Tensor, lo: float = PROB_CLAMP_LO, hi: float = PROB_CLAMP_HI) -> Tensor:
    """log(clip(x, lo, hi)); zero gradient where the clamp is active."""
    x = _as_tensor(x)
    clipped = np.clip(x.data, lo, hi)
    out = np.log(clipped)
    inside = (x.data > lo) & (x.data < hi)

    def grad_fn(g):
        return [(x, np.where(inside, g / clipped, 0.0))]

    return Tensor._record(out, (x,), grad_fn)


def layer_norm_rows(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-12) -> Tensor:
    """Per-row standardization followed by elementwise gain and bias."""
    x, gain, bias = _as_tensor(x), _as_tensor(gain), _as_tensor(bias)
    d = x.shape[1]
    if gain.shape != (1, d) or bias.shape != (1, d):
        raise ShapeError(f"layer norm gain/bias must be (1, {d}); got {gain.shape}, {bias.shape}")
    mu = x.data.mean(axis=1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    out = xhat * gain.data + bias.data

    def grad_fn(g):
        dxhat = g * gain.data
        term = d * dxhat - dxhat.sum(axis=1, keepdims=True) - xhat * (dxhat * xhat).sum(axis=1, keepdims=True)
        dx = inv / d * term
        dgain = (g * xhat).sum(axis=0, keepdims=True)
        dbias = g.sum(axis=0, keepdims=True)
        return [(x, dx), (gain, dgain), (bias, dbias)]

    return Tensor._record(out, (x, gain, bias), grad_fn)


def gather_rows(table: Tensor, ids: Sequence[int]) -> Tensor:
    """Select table rows by index; gradients scatter-add back into the table."""
    table = _as_tensor(table)
    idx = np.asarray(ids, dtype=np.intp)
    if idx.ndim != 1 or idx.size == 0:
        raise ContractError("gather_rows needs a non-empty flat index list")
    if idx.min() < 0 or idx.max() >= table.shape[0]:
        raise ContractError(
            f"row id out of range: ids span [{idx.min()}, {idx.max()}], table has {table.shape[0]} rows"
        )
    out = table.data[idx, :]

    def grad_fn(g):
        full = np.zeros_like(table.data)
        np.add.at(full, idx, g)
        return [(table, full)]

    return Tensor._record(out, (table,), grad_fn)


def backward(output: Tensor) -> dict[str, Tensor]:
    """Reverse sweep from a scalar output; returns gradients for every named
    trainable leaf that participated in the graph. The graph is consumed.
    """
    if output.size != 1:
        raise GraphError(f"backward needs a scalar output, got shape {output.shape}")
    if output._consumed:
        raise GraphError("this graph was already consumed by a previous backward()")

    order: list[Tensor] = []
    seen: set[int] = set()
    stack = [output]
    while stack:
        t = stack.pop()
        if id(t) in seen:
            continue
        seen.add(id(t))
        order.append(t)
        stack.extend(p for p in t._parents if id(p) not in seen)
    order.sort(key=lambda t: t.node_id, reverse=True)

    grads: dict[int, np.ndarray] = {id(output): np.ones((1, 1))}
    result: dict[str, Tensor] = {}
    for t in order:
        g = grads.get(id(t))
        if g is None:
            continue
        if t.trainable and t.name:
            result[t.name] = Tensor(g)
        if t._grad_fn is None:
            continue
        for parent, pg in t._grad_fn(g):
            if not parent._needs:
                continue
            acc = grads.get(id(parent))
            grads[id(parent)] = pg if acc is None else acc + pg

    for t in order:
        if t._grad_fn is not None:
            t._parents = ()
            t._grad_fn = None
    output._consumed = True
    return result


def relative_error(analytic: float, numeric: float) -> float:
    """|a - n| / max(|a|, |n|, 1e-8); the floor avoids 0/0 at true zeros."""
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)


@dataclass
class ParameterCheck:
    name: str
    analytic: float
    numeric: float
    rel_err: float


@dataclass
class GradReport:
    """Worst-coordinate comparison of analytic vs numeric gradients."""

    max_abs_err: float
    max_rel_err: float
    per_parameter: list[ParameterCheck]


def _eval_scalar(loss_fn, params) -> float:
    out = loss_fn(params)
    if not isinstance(out, Tensor) or out.size != 1:
        raise ContractError("loss_fn must return a scalar Tensor")
    val = float(out.data[0, 0])
    if not math.isfinite(val):
        raise ContractError(f"loss_fn returned a non-finite value: {val}")
    return val


def grad_check(
    loss_fn: Callable[[dict[str, Tensor]], Tensor],
    params: dict[str, Tensor],
    eps: float = 1e-5,
) -> GradReport:
    """Compare backward() gradients against central finite differences,
    coordinate by coordinate: (f(p+eps) - f(p-eps)) / (2 eps).
    """
    if eps <= 0:
        raise ContractError("grad_check needs eps > 0")
    if not params:
        return GradReport(0.0, 0.0, [])

    out = loss_fn(params)
    if not isinstance(out, Tensor) or out.size != 1:
        raise ContractError("loss_fn must return a scalar Tensor")
    if not math.isfinite(float(out.data[0, 0])):
        raise ContractError("loss_fn returned a non-finite value")
    analytic = {name: g.data for name, g in backward(out).items()}

    max_abs = 0.0
    max_rel = 0.0
    rows: list[ParameterCheck] = []
    for name, p in params.items():
        a_grad = analytic.get(name)
        if a_grad is None:
            a_grad = np.zeros_like(p.data)
        worst = ParameterCheck(name, 0.0, 0.0, -1.0)
        flat = p.data.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            f_plus = _eval_scalar(loss_fn, params)
            flat[i] = orig - eps
            f_minus = _eval_scalar(loss_fn, params)
            flat[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * eps)
            a = float(a_grad.reshape(-1)[i])
            rel = relative_error(a, numeric)
            max_abs = max(max_abs, abs(a - numeric))
            if rel > worst.rel_err:
                worst = ParameterCheck(name, a, numeric, rel)
        max_rel = max(max_rel, worst.rel_err)
        rows.append(worst)
    return GradReport(max_abs, max_rel, rows)
