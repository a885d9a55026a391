"""
Codificadores de tour: embedding linear, GCN residual e LSTM bidirecional.

Todas as funções operam em lote: B tours de n nós, entradas já ordenadas
pela posição no tour.
"""
from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.models.network import ENCODER_S, ModelParams, StateEncoding
from app.models.search import SearchState
from app.models.tsp import Instance
from app.nn import tensor as T
from app.nn.tensor import Tensor
from app.utils.errors import ShapeError


def linear(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """x·Wᵀ + b sobre o último eixo."""
    out = T.matmul(x, weight, transpose_b=True)
    return T.add(out, bias) if bias is not None else out


def tour_inputs(instances: Sequence[Instance], orders: Sequence[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """Coordenadas (B, n, 2) e arestas normalizadas (B, n, n) na ordem de cada tour."""
    if len(instances) != len(orders) or not instances:
        raise ShapeError(f"lote inconsistente: {len(instances)} instâncias e {len(orders)} tours")
    sizes = {inst.n for inst in instances}
    if len(sizes) != 1:
        raise ShapeError(f"instâncias de um lote precisam ter o mesmo n, recebido {sorted(sizes)}")
    coords = np.stack([inst.coords[order] for inst, order in zip(instances, orders)])
    edges = np.stack([inst.norm_edges[np.ix_(order, order)] for inst, order in zip(instances, orders)])
    return coords, edges


def embed(coords: np.ndarray, params: ModelParams, prefix: str = ENCODER_S) -> Tensor:
    """x⁰ = W_x·x + b_x para cada nó; ``coords`` em ordem de tour, (B, n, 2) ou (n, 2)."""
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim == 2:
        coords = coords[None]
    return linear(Tensor(coords), params[f"{prefix}.W_x"], params[f"{prefix}.b_x"])


def gcn_forward(x: Tensor, edges: np.ndarray, params: ModelParams, prefix: str = ENCODER_S) -> Tensor:
    """
    xᵢ ← xᵢ + ReLU(Σ_{j≠i} ẽᵢⱼ (W_g xⱼ + b_g)) por camada.

    A diagonal de ẽ é zero, então o produto com a matriz inteira já exclui j = i.
    """
    edges = np.asarray(edges, dtype=np.float64)
    if edges.ndim == 2:
        edges = edges[None]
    adjacency = Tensor(edges)
    config = params.config
    if not config.use_gcn:
        return x
    for layer in range(config.n_layers):
        messages = linear(x, params[f"{prefix}.gcn{layer}.W_g"], params[f"{prefix}.gcn{layer}.b_g"])
        x = T.add(x, T.relu(T.matmul(adjacency, messages)))
    return x


def _lstm_cell(
    gates_x: Tensor,
    state: Optional[Tuple[Tensor, Tensor]],
    params: ModelParams,
    cell: str,
    d: int,
) -> Tuple[Tensor, Tensor]:
    """Célula LSTM com portas na ordem (i, f, g, o); ``state`` None = estado zero."""
    if state is None:
        pre = T.add(gates_x, params[f"{cell}.b_hh"])
    else:
        pre = T.add(gates_x, linear(state[0], params[f"{cell}.W_hh"], params[f"{cell}.b_hh"]))
    input_gate = T.sigmoid(T.narrow(pre, 0, d))
    forget_gate = T.sigmoid(T.narrow(pre, d, 2 * d))
    candidate = T.tanh(T.narrow(pre, 2 * d, 3 * d))
    output_gate = T.sigmoid(T.narrow(pre, 3 * d, 4 * d))

    if state is None:
        c = T.mul(input_gate, candidate)
    else:
        c = T.add(T.mul(forget_gate, state[1]), T.mul(input_gate, candidate))
    h = T.mul(output_gate, T.tanh(c))
    return h, c


def _lstm_scan(z: Tensor, params: ModelParams, cell: str, reverse: bool) -> Tuple[List[Tensor], Tensor]:
    """
    Percorre as posições; o estado inicial vem da célula aplicada ao nó da
    extremidade oposta a partir de zero. Devolve os estados por posição
    (em ordem de tour) e o último estado calculado.
    """
    d = params.config.d
    n = z.shape[1]
    gates_x = linear(z, params[f"{cell}.W_ih"], params[f"{cell}.b_ih"])

    seed_position = 0 if reverse else n - 1
    state = _lstm_cell(T.take(gates_x, seed_position, axis=1), None, params, cell, d)

    positions = range(n - 1, -1, -1) if reverse else range(n)
    hidden: List[Optional[Tensor]] = [None] * n
    for position in positions:
        state = _lstm_cell(T.take(gates_x, position, axis=1), state, params, cell, d)
        hidden[position] = state[0]
    return hidden, state[0]


def sequence_encode(z: Tensor, params: ModelParams, prefix: str = ENCODER_S) -> Tuple[Tensor, Tensor]:
    """
    (o, h_n) a partir de z: oᵢ = tanh(W_f h→ᵢ + b_f + W_b h←ᵢ + b_b),
    h_n = h→ₙ + h←ₙ, ambos lidos na última posição do tour.
    """
    config = params.config
    if not config.use_lstm:
        return z, T.mean(z, axis=1)

    forward_states, forward_last = _lstm_scan(z, params, f"{prefix}.lstm_f", reverse=False)
    combined = linear(T.stack(forward_states, axis=1), params[f"{prefix}.W_f"], params[f"{prefix}.b_f"])
    h_n = forward_last

    if config.use_bidirectional:
        backward_states, _ = _lstm_scan(z, params, f"{prefix}.lstm_b", reverse=True)
        combined = T.add(
            combined,
            linear(T.stack(backward_states, axis=1), params[f"{prefix}.W_b"], params[f"{prefix}.b_b"]),
        )
        h_n = T.add(h_n, backward_states[-1])
    return T.tanh(combined), h_n


def encode_tour(coords: np.ndarray, edges: np.ndarray, params: ModelParams, prefix: str) -> Tuple[Tensor, Tensor, Tensor]:
    x0 = embed(coords, params, prefix)
    z = gcn_forward(x0, edges, params, prefix)
    o, h_n = sequence_encode(z, params, prefix)
    return z, o, h_n


def encode_state(
    instances: Sequence[Instance],
    states: Sequence[SearchState],
    params: ModelParams,
) -> StateEncoding:
    """
    Codifica S e S′ com pilhas independentes (ou compartilhadas) e monta
    q₀ = (W_s h_n + b_s ∥ W_s′ h′_n + b_s′) + z_g.
    """
    if isinstance(instances, Instance):
        instances = [instances]
    if isinstance(states, SearchState):
        states = [states]
    config = params.config

    coords, edges = tour_inputs(instances, [s.current.order for s in states])
    z, o, h_n = encode_tour(coords, edges, params, ENCODER_S)

    if config.use_best_solution:
        best_coords, best_edges = tour_inputs(instances, [s.best.order for s in states])
        _, _, h_best = encode_tour(best_coords, best_edges, params, params.best_encoder)
    else:
        h_best = h_n

    z_g = T.max(z, axis=1)
    h_tour = T.concat(
        [
            linear(h_n, params["dec.W_s"], params["dec.b_s"]),
            linear(h_best, params["dec.W_s2"], params["dec.b_s2"]),
        ],
        axis=-1,
    )
    q0 = T.add(h_tour, z_g)
    return StateEncoding(z=z, o=o, h_n=h_n, h_best=h_best, z_g=z_g, q0=q0)
