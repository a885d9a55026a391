"""
Diferenciação automática reversa sobre arrays numpy (float64).

Operações executadas dentro de um ``Tape`` ativo registram um fechamento de
backward; fora de qualquer tape nada é registrado (modo rollout).
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit

from app.utils.errors import NonFiniteError, ShapeError

# Valor aditivo das posições mascaradas antes do softmax.
MASK_VALUE = -1e30

ArrayLike = Union["Tensor", np.ndarray, float, int, Sequence[float]]
BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]


class Tensor:
    """Array float64 com gradiente opcional."""

    __slots__ = ("data", "requires_grad", "grad", "name", "_tape")

    def __init__(self, data, requires_grad: bool = False, name: str = ""):
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._tape: Optional["Tape"] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float("nan")

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"


@dataclass
class _Node:
    output: Tensor
    inputs: Tuple[Tensor, ...]
    backward_fn: BackwardFn
    op: str


_local = threading.local()


def _tape_stack() -> List["Tape"]:
    if not hasattr(_local, "stack"):
        _local.stack = []
    return _local.stack


class Tape:
    """Registro ordenado das operações; uma instância por thread de treino."""

    def __init__(self):
        self.nodes: List[_Node] = []

    def __enter__(self) -> "Tape":
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        _tape_stack().pop()

    def __len__(self) -> int:
        return len(self.nodes)

    def record(self, node: _Node) -> None:
        self.nodes.append(node)


def active_tape() -> Optional[Tape]:
    stack = _tape_stack()
    return stack[-1] if stack else None


def as_tensor(value: ArrayLike) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def parameter(data, name: str = "") -> Tensor:
    return Tensor(data, requires_grad=True, name=name)


def _emit(op: str, data: np.ndarray, inputs: Sequence[Tensor], backward_fn: BackwardFn) -> Tensor:
    data = np.asarray(data, dtype=np.float64)
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(f"{op}: saída contém valores não finitos")
    tape = active_tape()
    track = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor(data, requires_grad=track)
    if track:
        out._tape = tape
        tape.record(_Node(out, tuple(inputs), backward_fn, op))
    return out


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Soma o gradiente sobre os eixos expandidos por broadcast."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op: str, *shapes: Tuple[int, ...]) -> Tuple[int, ...]:
    try:
        return np.broadcast_shapes(*shapes)
    except ValueError:
        raise ShapeError(f"{op}: formas incompatíveis {' x '.join(str(s) for s in shapes)}")


# ----------------------------------------------------------------------------
# Álgebra
# ----------------------------------------------------------------------------

def matmul(a: ArrayLike, b: ArrayLike, transpose_b: bool = False) -> Tensor:
    """Produto matricial com broadcast de lote; ``transpose_b`` usa bᵀ nos dois últimos eixos."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(f"matmul: operandos precisam de ao menos 2 eixos, recebido {a.shape} e {b.shape}")
    right = np.swapaxes(b.data, -1, -2) if transpose_b else b.data
    if a.shape[-1] != right.shape[-2]:
        raise ShapeError(f"matmul: formas incompatíveis {a.shape} x {right.shape}")
    _broadcast_shape("matmul", a.shape[:-2], right.shape[:-2])
    data = np.matmul(a.data, right)

    def backward(g):
        grad_a = _unbroadcast(np.matmul(g, np.swapaxes(right, -1, -2)), a.shape)
        grad_right = np.matmul(np.swapaxes(a.data, -1, -2), g)
        grad_right = _unbroadcast(grad_right, right.shape)
        grad_b = np.swapaxes(grad_right, -1, -2) if transpose_b else grad_right
        return grad_a, grad_b

    return _emit("matmul", data, (a, b), backward)


def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a.shape, b.shape)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _emit("add", a.data + b.data, (a, b), backward)


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("sub", a.shape, b.shape)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _emit("sub", a.data - b.data, (a, b), backward)


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("mul", a.shape, b.shape)

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _emit("mul", a.data * b.data, (a, b), backward)


def scale(x: ArrayLike, factor: float) -> Tensor:
    x = as_tensor(x)
    factor = float(factor)
    return _emit("scale", x.data * factor, (x,), lambda g: (g * factor,))


def square(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    return _emit("square", x.data ** 2, (x,), lambda g: (2.0 * x.data * g,))


# ----------------------------------------------------------------------------
# Ativações
# ----------------------------------------------------------------------------

def relu(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    active = x.data > 0.0
    return _emit("relu", np.where(active, x.data, 0.0), (x,), lambda g: (g * active,))


def tanh(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    y = np.tanh(x.data)
    return _emit("tanh", y, (x,), lambda g: (g * (1.0 - y * y),))


def sigmoid(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    y = expit(x.data)
    return _emit("sigmoid", y, (x,), lambda g: (g * y * (1.0 - y),))


def _masked_logits(op: str, x: Tensor, allowed) -> Tuple[np.ndarray, np.ndarray]:
    allowed = np.broadcast_to(np.asarray(allowed, dtype=bool), _broadcast_shape(op, x.shape, np.shape(allowed)))
    if allowed.shape != x.shape:
        raise ShapeError(f"{op}: máscara {allowed.shape} não se ajusta aos logits {x.shape}")
    if not np.all(allowed.any(axis=-1)):
        raise ShapeError(f"{op}: linha sem nenhuma posição permitida")
    masked = np.where(allowed, x.data, MASK_VALUE)
    return masked - masked.max(axis=-1, keepdims=True), allowed


def masked_softmax(x: ArrayLike, allowed) -> Tensor:
    """Softmax no último eixo; posições com ``allowed`` falso recebem probabilidade 0."""
    x = as_tensor(x)
    shifted, allowed = _masked_logits("masked_softmax", x, allowed)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=-1, keepdims=True)

    def backward(g):
        return (probs * (g - (g * probs).sum(axis=-1, keepdims=True)),)

    return _emit("masked_softmax", probs, (x,), backward)


def masked_log_softmax(x: ArrayLike, allowed) -> Tensor:
    x = as_tensor(x)
    shifted, allowed = _masked_logits("masked_log_softmax", x, allowed)
    log_norm = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    out = shifted - log_norm
    probs = np.exp(out)

    def backward(g):
        grad = g - probs * g.sum(axis=-1, keepdims=True)
        return (np.where(allowed, grad, 0.0),)

    return _emit("masked_log_softmax", out, (x,), backward)


# ----------------------------------------------------------------------------
# Estrutura
# ----------------------------------------------------------------------------

def concat(tensors: Sequence[ArrayLike], axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise ShapeError("concat: lista vazia")
    try:
        data = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        raise ShapeError(f"concat: formas incompatíveis {[t.shape for t in tensors]} no eixo {axis}")
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return _emit("concat", data, tensors, backward)


def stack(tensors: Sequence[ArrayLike], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise ShapeError("stack: lista vazia")
    try:
        data = np.stack([t.data for t in tensors], axis=axis)
    except ValueError:
        raise ShapeError(f"stack: formas diferentes {[t.shape for t in tensors]}")

    def backward(g):
        moved = np.moveaxis(g, axis, 0)
        return tuple(moved[k] for k in range(len(tensors)))

    return _emit("stack", data, tensors, backward)


def narrow(x: ArrayLike, start: int, stop: int) -> Tensor:
    """Fatia [start, stop) do último eixo."""
    x = as_tensor(x)
    if not 0 <= start < stop <= x.shape[-1]:
        raise ShapeError(f"narrow: fatia [{start}, {stop}) fora do eixo de tamanho {x.shape[-1]}")

    def backward(g):
        grad = np.zeros_like(x.data)
        grad[..., start:stop] = g
        return (grad,)

    return _emit("narrow", x.data[..., start:stop], (x,), backward)


def take(x: ArrayLike, index, axis: int = 1) -> Tensor:
    """
    Seleciona posições ao longo de ``axis``.

    ``index`` inteiro seleciona a mesma posição em todo o lote; um array de
    forma (B,) seleciona uma posição por elemento do lote (eixo 0 = lote).
    """
    x = as_tensor(x)
    if axis < 0:
        axis += x.ndim
    if not 0 <= axis < x.ndim:
        raise ShapeError(f"take: eixo {axis} inválido para forma {x.shape}")

    if np.isscalar(index) or np.ndim(index) == 0:
        position = int(index)
        if not -x.shape[axis] <= position < x.shape[axis]:
            raise ShapeError(f"take: índice {position} fora do eixo de tamanho {x.shape[axis]}")
        data = np.take(x.data, position, axis=axis)

        def backward(g):
            grad = np.zeros_like(x.data)
            slicer = [slice(None)] * x.ndim
            slicer[axis] = position
            grad[tuple(slicer)] = g
            return (grad,)

        return _emit("take", data, (x,), backward)

    positions = np.asarray(index, dtype=np.int64)
    if axis != 1 or positions.shape != (x.shape[0],):
        raise ShapeError(f"take: índice por lote {positions.shape} exige eixo 1 e lote {x.shape[0]}")
    if np.any(positions < 0) or np.any(positions >= x.shape[1]):
        raise ShapeError(f"take: índices fora do eixo de tamanho {x.shape[1]}")
    rows = np.arange(x.shape[0])
    data = x.data[rows, positions]

    def backward(g):
        grad = np.zeros_like(x.data)
        np.add.at(grad, (rows, positions), g)
        return (grad,)

    return _emit("take", data, (x,), backward)


def reshape(x: ArrayLike, shape: Tuple[int, ...]) -> Tensor:
    x = as_tensor(x)
    try:
        data = x.data.reshape(shape)
    except ValueError:
        raise ShapeError(f"reshape: {x.shape} não pode virar {shape}")
    return _emit("reshape", data, (x,), lambda g: (g.reshape(x.shape),))


# ----------------------------------------------------------------------------
# Reduções
# ----------------------------------------------------------------------------

def _expand(g: np.ndarray, shape: Tuple[int, ...], axis: Optional[int], keepdims: bool) -> np.ndarray:
    if axis is not None and not keepdims:
        g = np.expand_dims(g, axis)
    return np.broadcast_to(g, shape)


def sum(x: ArrayLike, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    x = as_tensor(x)
    data = x.data.sum(axis=axis, keepdims=keepdims)
    return _emit("sum", data, (x,), lambda g: (_expand(g, x.shape, axis, keepdims).copy(),))


def mean(x: ArrayLike, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    count = x.size if axis is None else x.shape[axis]
    data = x.data.mean(axis=axis, keepdims=keepdims)
    return _emit("mean", data, (x,), lambda g: (_expand(g, x.shape, axis, keepdims) / count,))


def max(x: ArrayLike, axis: int = -1, keepdims: bool = False) -> Tensor:  # noqa: A001
    """Máximo ao longo de ``axis``; o gradiente vai ao primeiro índice máximo."""
    x = as_tensor(x)
    if axis < 0:
        axis += x.ndim
    winners = np.expand_dims(np.argmax(x.data, axis=axis), axis)
    data = np.take_along_axis(x.data, winners, axis=axis)
    if not keepdims:
        data = np.squeeze(data, axis=axis)

    def backward(g):
        grad = np.zeros_like(x.data)
        g = g if keepdims else np.expand_dims(g, axis)
        np.put_along_axis(grad, winners, g, axis=axis)
        return (grad,)

    return _emit("max", data, (x,), backward)


# ----------------------------------------------------------------------------
# Backward
# ----------------------------------------------------------------------------

def backward(loss: Tensor, leaves: Optional[Sequence[Tensor]] = None) -> List[np.ndarray]:
    """
    Propaga dLoss/dFolha em ordem topológica reversa do tape.

    Define ``.grad`` de cada folha (zeros exatos quando fora do caminho) e
    devolve os gradientes na ordem de ``leaves``.
    """
    if loss.data.ndim != 0 and loss.data.size != 1:
        raise ShapeError(f"backward: raiz precisa ser escalar, recebido {loss.shape}")

    nodes = loss._tape.nodes if loss._tape is not None else []
    grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    produced = set()

    for node in reversed(nodes):
        produced.add(id(node.output))
        g = grads.pop(id(node.output), None)
        if g is None:
            continue
        for tensor, grad in zip(node.inputs, node.backward_fn(g)):
            if grad is None or not tensor.requires_grad:
                continue
            key = id(tensor)
            grads[key] = grads[key] + grad if key in grads else np.array(grad, dtype=np.float64)

    if leaves is None:
        seen, leaves = set(), []
        for node in nodes:
            for tensor in node.inputs:
                if tensor.requires_grad and id(tensor) not in produced and id(tensor) not in seen:
                    seen.add(id(tensor))
                    leaves.append(tensor)

    result = []
    for leaf in leaves:
        grad = grads.get(id(leaf))
        grad = np.zeros_like(leaf.data) if grad is None else grad.reshape(leaf.shape)
        leaf.grad = grad
        result.append(grad)
    return result
