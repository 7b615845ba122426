"""Dense float64 tensors with a reverse-mode gradient tape and Adam.

Every differentiable operation computes its forward value with numpy, then
records a :class:`TapeNode` on the active (thread-local) tape if any input
requires a gradient. Backward rules live in :data:`BACKWARD_RULES`, keyed by
operation name, so they can be inspected or swapped out in tests.

Shapes must agree exactly. The only implicit broadcast is scalar scaling
(:func:`scale`); bias addition names its axis explicitly (:func:`add_bias`).
"""
from __future__ import annotations

import contextlib
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ContractError, DimensionError, MetricError, NonFiniteError

__all__ = [
    "Tensor",
    "Parameter",
    "Tape",
    "TapeNode",
    "BACKWARD_RULES",
    "get_tape",
    "no_grad",
    "backward",
    "contract_axis",
    "add",
    "sub",
    "mul",
    "scale",
    "relu",
    "add_bias",
    "mode_mix",
    "reshape",
    "tsum",
    "relative_l2_loss",
    "mse_loss",
    "zero_grad",
    "adam_step",
    "step_lr",
]


class Tensor:
    """Dense n-dimensional float64 array that may take part in differentiation."""

    __array_priority__ = 1000

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(())
        self.data = arr
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"{type(self).__name__}(shape={self.shape}{label})"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        if np.isscalar(other):
            return scale(self, float(other))
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return scale(self, -1.0)


class Parameter(Tensor):
    """Learnable tensor carrying its gradient and Adam moment estimates."""

    def __init__(self, data, name: str | None = None):
        super().__init__(np.array(data, dtype=np.float64, copy=True), requires_grad=True, name=name)
        self.grad = np.zeros_like(self.data)
        self.m = np.zeros_like(self.data)
        self.v = np.zeros_like(self.data)
        self.t = 0

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def reset_state(self) -> None:
        self.m = np.zeros_like(self.data)
        self.v = np.zeros_like(self.data)
        self.t = 0


@dataclass
class TapeNode:
    op: str
    inputs: tuple
    saved: dict
    output: Tensor


@dataclass
class Tape:
    """Ordered record of taped operations; nodes only ever reference earlier outputs."""

    nodes: list[TapeNode] = field(default_factory=list)
    enabled: bool = True

    def record(self, op: str, inputs: Sequence, output: Tensor, **saved) -> None:
        self.nodes.append(TapeNode(op, tuple(inputs), saved, output))

    def clear(self) -> None:
        self.nodes.clear()

    def __len__(self) -> int:
        return len(self.nodes)


_local = threading.local()


def get_tape() -> Tape:
    tape = getattr(_local, "tape", None)
    if tape is None:
        tape = _local.tape = Tape()
    return tape


@contextlib.contextmanager
def no_grad():
    """Run operations without recording them (inference)."""
    tape = get_tape()
    prev = tape.enabled
    tape.enabled = False
    try:
        yield
    finally:
        tape.enabled = prev


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _finish(op: str, inputs: Sequence[Tensor], out: np.ndarray, **saved) -> Tensor:
    if not np.isfinite(out).all():
        raise NonFiniteError(f"{op}: non-finite values in output of shape {out.shape}")
    needs = any(t.requires_grad for t in inputs)
    tape = get_tape()
    result = Tensor(out, requires_grad=needs and tape.enabled)
    if result.requires_grad:
        tape.record(op, inputs, result, **saved)
    return result


def _same_shape(op: str, x: Tensor, y: Tensor) -> None:
    if x.shape != y.shape:
        raise DimensionError(f"{op}: shape mismatch {x.shape} vs {y.shape}")


# ---------------------------------------------------------------- operations


def contract_axis(x, w, axis: int) -> Tensor:
    """Contract ``x`` with matrix ``w`` (d, k) along ``axis``; the axis keeps its position."""
    x, w = _as_tensor(x), _as_tensor(w)
    if w.ndim != 2:
        raise DimensionError(f"contract_axis: weight must be a matrix, got shape {w.shape}")
    if not -x.ndim <= axis < x.ndim:
        raise DimensionError(f"contract_axis: axis {axis} out of range for shape {x.shape}")
    axis = axis % x.ndim
    if x.shape[axis] != w.shape[0]:
        raise DimensionError(
            f"contract_axis: x.shape={x.shape} has extent {x.shape[axis]} on axis {axis}, "
            f"w.shape={w.shape} expects {w.shape[0]}"
        )
    out = np.moveaxis(np.tensordot(x.data, w.data, axes=([axis], [0])), -1, axis)
    return _finish("contract_axis", (x, w), out, axis=axis)


def _contract_axis_backward(g, node):
    x, w = node.inputs
    axis = node.saved["axis"]
    gx = gw = None
    if x.requires_grad:
        gx = np.moveaxis(np.tensordot(g, w.data, axes=([axis], [1])), -1, axis)
    if w.requires_grad:
        d, k = w.shape
        xm = np.moveaxis(x.data, axis, -1).reshape(-1, d)
        gm = np.moveaxis(g, axis, -1).reshape(-1, k)
        gw = xm.T @ gm
    return gx, gw


def add(x, y) -> Tensor:
    x, y = _as_tensor(x), _as_tensor(y)
    _same_shape("add", x, y)
    return _finish("add", (x, y), x.data + y.data)


def sub(x, y) -> Tensor:
    x, y = _as_tensor(x), _as_tensor(y)
    _same_shape("sub", x, y)
    return _finish("sub", (x, y), x.data - y.data)


def mul(x, y) -> Tensor:
    x, y = _as_tensor(x), _as_tensor(y)
    _same_shape("mul", x, y)
    return _finish("mul", (x, y), x.data * y.data)


def scale(x, c: float) -> Tensor:
    x = _as_tensor(x)
    return _finish("scale", (x,), x.data * c, c=float(c))


def relu(x) -> Tensor:
    x = _as_tensor(x)
    return _finish("relu", (x,), np.maximum(x.data, 0.0))


def add_bias(x, b, axis: int) -> Tensor:
    """Add vector ``b`` along ``axis`` of ``x`` (the one explicit broadcast)."""
    x, b = _as_tensor(x), _as_tensor(b)
    axis = axis % x.ndim
    if b.ndim != 1 or b.shape[0] != x.shape[axis]:
        raise DimensionError(f"add_bias: bias shape {b.shape} does not match axis {axis} of {x.shape}")
    shape = [1] * x.ndim
    shape[axis] = b.shape[0]
    return _finish("add_bias", (x, b), x.data + b.data.reshape(shape), axis=axis)


def mode_mix(z, r) -> Tensor:
    """Per-mode channel mixing: ``out[..., j, m] = sum_i r[i, j, m] * z[..., i, m]``.

    ``r`` has shape (c, c_out, k_1..k_n); the channel axis of ``z`` sits just
    before its last n axes. Leading axes of ``z`` are batch axes.
    """
    z, r = _as_tensor(z), _as_tensor(r)
    n = r.ndim - 2
    if n < 1 or z.ndim < n + 1:
        raise DimensionError(f"mode_mix: incompatible shapes z={z.shape}, R={r.shape}")
    if z.shape[-n - 1] != r.shape[0] or z.shape[z.ndim - n:] != r.shape[2:]:
        raise DimensionError(f"mode_mix: z.shape={z.shape} does not match R.shape={r.shape}")
    lead = z.shape[: z.ndim - n - 1]
    ci, co = r.shape[:2]
    modes = r.shape[2:]
    nm = int(np.prod(modes))
    zm = z.data.reshape(-1, ci, nm).transpose(2, 0, 1)      # (m, b, i)
    rm = r.data.reshape(ci, co, nm).transpose(2, 0, 1)      # (m, i, j)
    out = np.matmul(zm, rm).transpose(1, 2, 0).reshape(*lead, co, *modes)
    return _finish("mode_mix", (z, r), out)


def _mode_mix_backward(g, node):
    z, r = node.inputs
    ci, co = r.shape[:2]
    nm = int(np.prod(r.shape[2:]))
    gm = g.reshape(-1, co, nm).transpose(2, 0, 1)           # (m, b, j)
    gz = gr = None
    if z.requires_grad:
        rm = r.data.reshape(ci, co, nm).transpose(2, 1, 0)  # (m, j, i)
        gz = np.matmul(gm, rm).transpose(1, 2, 0).reshape(z.shape)
    if r.requires_grad:
        zm = z.data.reshape(-1, ci, nm).transpose(2, 0, 1)  # (m, b, i)
        gr = np.matmul(zm.transpose(0, 2, 1), gm).transpose(1, 2, 0).reshape(r.shape)
    return gz, gr


def reshape(x, shape: Sequence[int]) -> Tensor:
    x = _as_tensor(x)
    if int(np.prod(shape)) != x.size:
        raise DimensionError(f"reshape: cannot view shape {x.shape} as {tuple(shape)}")
    return _finish("reshape", (x,), x.data.reshape(shape))


def tsum(x) -> Tensor:
    """Sum of all entries, as a scalar tensor."""
    x = _as_tensor(x)
    return _finish("sum", (x,), np.asarray(x.data.sum()))


def relative_l2_loss(pred, target) -> Tensor:
    """Mean over the leading (sample) axis of ||pred - target|| / ||target||."""
    pred = _as_tensor(pred)
    target = np.asarray(target.data if isinstance(target, Tensor) else target, dtype=np.float64)
    if pred.shape != target.shape:
        raise DimensionError(f"relative_l2_loss: shape mismatch {pred.shape} vs {target.shape}")
    b = pred.shape[0]
    diff = (pred.data - target).reshape(b, -1)
    tnorm = np.linalg.norm(target.reshape(b, -1), axis=1)
    if np.any(tnorm == 0):
        raise MetricError("relative_l2_loss: target with zero norm")
    dnorm = np.linalg.norm(diff, axis=1)
    out = np.asarray(np.mean(dnorm / tnorm))
    return _finish("relative_l2_loss", (pred,), out, diff=diff, dnorm=dnorm, tnorm=tnorm)


def _relative_l2_backward(g, node):
    (pred,) = node.inputs
    diff, dnorm, tnorm = node.saved["diff"], node.saved["dnorm"], node.saved["tnorm"]
    b = diff.shape[0]
    safe = np.where(dnorm > 0, dnorm, 1.0)
    coef = np.where(dnorm > 0, 1.0 / (safe * tnorm * b), 0.0)
    return ((g * coef[:, None] * diff).reshape(pred.shape),)


def mse_loss(pred, target) -> Tensor:
    pred = _as_tensor(pred)
    target = np.asarray(target.data if isinstance(target, Tensor) else target, dtype=np.float64)
    if pred.shape != target.shape:
        raise DimensionError(f"mse_loss: shape mismatch {pred.shape} vs {target.shape}")
    diff = pred.data - target
    return _finish("mse_loss", (pred,), np.asarray(np.mean(diff**2)), diff=diff)


BackwardRule = Callable[[np.ndarray, TapeNode], tuple]

BACKWARD_RULES: dict[str, BackwardRule] = {
    "contract_axis": _contract_axis_backward,
    "add": lambda g, node: (g, g),
    "sub": lambda g, node: (g, -g),
    "mul": lambda g, node: (g * node.inputs[1].data, g * node.inputs[0].data),
    "scale": lambda g, node: (g * node.saved["c"],),
    "relu": lambda g, node: (g * (node.inputs[0].data > 0),),
    "add_bias": lambda g, node: (
        g,
        g.sum(axis=tuple(i for i in range(g.ndim) if i != node.saved["axis"])),
    ),
    "mode_mix": _mode_mix_backward,
    "reshape": lambda g, node: (g.reshape(node.inputs[0].shape),),
    "sum": lambda g, node: (np.broadcast_to(g, node.inputs[0].shape).copy(),),
    "relative_l2_loss": _relative_l2_backward,
    "mse_loss": lambda g, node: (g * 2.0 * node.saved["diff"] / node.saved["diff"].size,),
}


# ------------------------------------------------------------------ backward


def backward(loss: Tensor, tape: Tape | None = None) -> None:
    """Accumulate d(loss)/d(param) into ``param.grad`` for every reachable Parameter.

    The tape is cleared afterwards, whether or not the pass succeeds.
    """
    tape = tape or get_tape()
    try:
        if loss.size != 1:
            raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
        grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        leaves: dict[int, Parameter] = {}
        for node in reversed(tape.nodes):
            g = grads.pop(id(node.output), None)
            if g is None:
                continue
            in_grads = BACKWARD_RULES[node.op](g, node)
            for inp, gi in zip(node.inputs, in_grads):
                if gi is None or not inp.requires_grad:
                    continue
                key = id(inp)
                if isinstance(inp, Parameter):
                    leaves[key] = inp
                prev = grads.get(key)
                grads[key] = gi if prev is None else prev + gi
        for key, p in leaves.items():
            p.grad = p.grad + grads[key]
    finally:
        tape.clear()


def zero_grad(params: Iterable[Parameter]) -> None:
    for p in params:
        p.zero_grad()


# ----------------------------------------------------------------- optimizer


def adam_step(
    params: Iterable[Parameter],
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    weight_decay: float = 0.0,
) -> None:
    """One Adam update per parameter, with bias correction.

    ``weight_decay`` adds ``weight_decay * theta`` to the gradient (L2 form).
    """
    params = list(params)
    for p in params:
        if not np.isfinite(p.grad).all():
            raise NonFiniteError(f"adam_step: non-finite gradient in parameter {p.name!r}")
    for p in params:
        g = p.grad + weight_decay * p.data if weight_decay else p.grad
        p.t += 1
        p.m = beta1 * p.m + (1.0 - beta1) * g
        p.v = beta2 * p.v + (1.0 - beta2) * g * g
        m_hat = p.m / (1.0 - beta1**p.t)
        v_hat = p.v / (1.0 - beta2**p.t)
        p.data = p.data - lr * m_hat / (np.sqrt(v_hat) + eps)


def step_lr(epoch: int, lr0: float, period: int = 100, factor: float = 0.5) -> float:
    """Step schedule: ``lr0 * factor ** (epoch // period)``."""
    if epoch < 0 or period <= 0:
        raise ContractError(f"step_lr: need epoch >= 0 and period > 0, got {epoch}, {period}")
    return lr0 * factor ** (epoch // period)
