"""
Decodificador de apontamento (política 2-opt em duas etapas) e cabeça de valor.
"""
from __future__ import annotations

from typing import Optional, Sequence, Tuple

import numpy as np

from app.models.network import DecodeResult, ModelParams, StateEncoding
from app.nn import tensor as T
from app.nn.encoder import linear
from app.nn.tensor import Tensor
from app.utils.errors import InvalidInputError, ShapeError

MODES = ("sample", "greedy")


def _query(previous: Tensor, selected: Tensor, params: ModelParams) -> Tensor:
    """q = tanh(W_q q_prev + b_q + W_o o_sel + b_o)."""
    return T.tanh(
        T.add(
            linear(previous, params["dec.W_q"], params["dec.b_q"]),
            linear(selected, params["dec.W_o"], params["dec.b_o"]),
        )
    )


def _clipped_scores(keys: Tensor, query: Tensor, params: ModelParams) -> Tensor:
    """C·tanh(vᵀ tanh(K oⱼ + Q q)) para todas as posições j; (B, n)."""
    batch, n, d = keys.shape
    projected = T.reshape(linear(query, params["dec.Q"]), (batch, 1, d))
    hidden = T.tanh(T.add(keys, projected))
    scores = T.matmul(hidden, T.reshape(params["dec.v"], (d, 1)))
    return T.scale(T.tanh(T.reshape(scores, (batch, n))), params.config.clip)


def _entropy(probs: Tensor, log_probs: Tensor, allowed: np.ndarray) -> Tensor:
    safe_log = T.mul(log_probs, allowed.astype(np.float64))
    return T.scale(T.sum(T.mul(probs, safe_log), axis=-1), -1.0)


def _select(probs: np.ndarray, allowed: np.ndarray, mode: str, rng: Optional[np.random.Generator]) -> np.ndarray:
    if mode == "greedy":
        return np.argmax(np.where(allowed, probs, -1.0), axis=1)
    if rng is None:
        raise InvalidInputError("modo sample exige um gerador aleatório")
    last_allowed = allowed.shape[1] - 1 - np.argmax(allowed[:, ::-1], axis=1)
    u = rng.random(probs.shape[0])
    picks = np.count_nonzero(np.cumsum(probs, axis=1) <= u[:, None], axis=1)
    return np.minimum(picks, last_allowed)


def _validate_actions(actions, batch: int, n: int) -> np.ndarray:
    actions = np.asarray(actions, dtype=np.int64)
    if actions.shape != (batch, 2):
        raise ShapeError(f"policy_decode: ações forçadas {actions.shape}, esperado {(batch, 2)}")
    first, second = actions[:, 0], actions[:, 1]
    if np.any(first < 0) or np.any(first > n - 2) or np.any(second <= first) or np.any(second > n - 1):
        raise InvalidInputError("policy_decode: ação forçada fora de 0 <= i < j <= n-1")
    return actions


def policy_decode(
    enc: StateEncoding,
    params: ModelParams,
    rng: Optional[np.random.Generator] = None,
    mode: str = "sample",
    actions: Optional[Sequence[Tuple[int, int]]] = None,
) -> DecodeResult:
    """
    Seleciona (a₁, a₂) com a₁ < a₂ para cada estado do lote.

    Etapa 1 mascara a posição n−1; etapa 2 mascara j ≤ a₁. Com ``actions``
    as posições são impostas e apenas log-probabilidades e entropias são
    recalculadas.
    """
    if mode not in MODES:
        raise InvalidInputError(f"modo de decodificação desconhecido: {mode}")
    batch, n = enc.batch_size, enc.n
    if n < 4:
        raise InvalidInputError(f"decodificação 2-opt exige n >= 4, recebido {n}")
    forced = _validate_actions(actions, batch, n) if actions is not None else None
    positions = np.arange(n)

    keys = linear(enc.o, params["dec.K"])
    d = params.config.d
    q1 = _query(enc.q0, T.reshape(params["dec.o0"], (1, d)), params)

    logits1 = _clipped_scores(keys, q1, params)
    allowed1 = np.broadcast_to(positions < n - 1, (batch, n))
    log_p1 = T.masked_log_softmax(logits1, allowed1)
    p1 = T.masked_softmax(logits1, allowed1)
    first = forced[:, 0] if forced is not None else _select(p1.data, allowed1, mode, rng)

    q2 = _query(q1, T.take(enc.o, first, axis=1), params)
    logits2 = _clipped_scores(keys, q2, params)
    allowed2 = positions[None, :] > first[:, None]
    log_p2 = T.masked_log_softmax(logits2, allowed2)
    p2 = T.masked_softmax(logits2, allowed2)
    second = forced[:, 1] if forced is not None else _select(p2.data, allowed2, mode, rng)

    log_prob = T.add(T.take(log_p1, first, axis=1), T.take(log_p2, second, axis=1))
    entropy = T.add(_entropy(p1, log_p1, allowed1), _entropy(p2, log_p2, allowed2))
    return DecodeResult(
        moves=np.stack([first, second], axis=1).astype(np.int64),
        log_prob=log_prob,
        entropy=entropy,
        step_probs=(p1.data, p2.data),
        step_logits=(logits1.data, logits2.data),
    )


def value_estimate(enc: StateEncoding, params: ModelParams) -> Tensor:
    """V = W_r·ReLU(W_z(média de z + h_v) + b_z) + b_r, com h_v = (W_v h_n + b_v ∥ W_v′ h′_n + b_v′)."""
    pooled = T.mean(enc.z, axis=1)
    h_v = T.concat(
        [
            linear(enc.h_n, params["val.W_v"], params["val.b_v"]),
            linear(enc.h_best, params["val.W_v2"], params["val.b_v2"]),
        ],
        axis=-1,
    )
    hidden = T.relu(linear(T.add(pooled, h_v), params["val.W_z"], params["val.b_z"]))
    value = linear(hidden, params["val.W_r"], params["val.b_r"])
    return T.reshape(value, (enc.batch_size,))
