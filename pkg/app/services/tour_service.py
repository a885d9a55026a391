"""
Aritmética de tours: custo, movimento 2-opt, delta O(1) e normalização de arestas.

Todas as funções são puras sobre entradas imutáveis.
"""
import logging
from typing import Sequence, Union

import numpy as np

from app.models.tsp import Instance, Move, Tour
from app.utils.errors import DegenerateInstanceError, InvalidInputError

logger = logging.getLogger(__name__)

OrderLike = Union[np.ndarray, Sequence[int]]


def validate_order(instance: Instance, order: OrderLike) -> np.ndarray:
    array = np.asarray(order, dtype=np.int64)
    if array.ndim != 1 or array.shape[0] != instance.n:
        raise InvalidInputError(
            f"tour com {array.shape[0] if array.ndim == 1 else array.shape} posições para instância de {instance.n} nós"
        )
    if not np.array_equal(np.sort(array), np.arange(instance.n)):
        raise InvalidInputError("tour não é uma permutação dos nós da instância")
    return array


def tour_cost(instance: Instance, order: OrderLike) -> float:
    """Soma das arestas consecutivas, incluindo a aresta de fechamento."""
    array = validate_order(instance, order)
    return float(instance.dist[array, np.roll(array, -1)].sum())


def make_tour(instance: Instance, order: OrderLike) -> Tour:
    array = validate_order(instance, order)
    return Tour(order=array, length=tour_cost(instance, array))


def random_tour(instance: Instance, rng: np.random.Generator) -> Tour:
    return make_tour(instance, rng.permutation(instance.n))


def two_opt_delta(instance: Instance, tour: Tour, move: Move) -> float:
    """
    Variação de custo de inverter as posições i..j.

    Quebra as arestas (i-1, i) e (j, j+1), insere (i-1, j) e (i, j+1).
    (0, n-1) é a inversão completa: delta exatamente zero.
    """
    n = tour.n
    move.check(n)
    i, j = move.i, move.j
    if i == 0 and j == n - 1:
        return 0.0
    order = tour.order
    dist = instance.dist
    prev_node = order[i - 1]
    next_node = order[(j + 1) % n]
    a, b = order[i], order[j]
    return float(dist[prev_node, b] + dist[a, next_node] - dist[prev_node, a] - dist[b, next_node])


def apply_move(tour: Tour, move: Move, instance: Instance) -> Tour:
    """Novo tour com o segmento i..j invertido; o tour de entrada não muda."""
    delta = two_opt_delta(instance, tour, move)
    order = tour.order.copy()
    order[move.i:move.j + 1] = order[move.i:move.j + 1][::-1]
    return Tour(order=order, length=tour.length + delta)


def all_move_deltas(instance: Instance, order: OrderLike) -> np.ndarray:
    """
    Matriz n×n com o delta de cada movimento (i, j), i < j.

    Entradas fora do triângulo superior estrito valem +inf.
    """
    array = np.asarray(order, dtype=np.int64)
    n = array.shape[0]
    dist = instance.dist
    prev_nodes = np.roll(array, 1)
    next_nodes = np.roll(array, -1)

    removed_in = dist[prev_nodes, array]
    removed_out = dist[array, next_nodes]
    deltas = (
        dist[prev_nodes[:, None], array[None, :]]
        + dist[array[:, None], next_nodes[None, :]]
        - removed_in[:, None]
        - removed_out[None, :]
    )
    deltas[0, n - 1] = 0.0
    deltas[np.tril_indices(n)] = np.inf
    return deltas


def normalize_edges(dist: np.ndarray) -> np.ndarray:
    """Normalização simétrica ẽ_ij = e_ij / sqrt(Σ_j e_ij · Σ_i e_ij)."""
    matrix = np.asarray(dist, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidInputError(f"matriz de distâncias deve ser quadrada, recebido {matrix.shape}")
    if not np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-12):
        raise InvalidInputError("matriz de distâncias não é simétrica")
    if np.any(np.diag(matrix) != 0.0):
        raise InvalidInputError("diagonal da matriz de distâncias deve ser zero")

    row_sums = matrix.sum(axis=1)
    col_sums = matrix.sum(axis=0)
    if np.any(row_sums <= 0.0) or np.any(col_sums <= 0.0):
        raise DegenerateInstanceError("soma de linha nula: todos os nós coincidem com algum nó i")
    normalized = matrix / np.sqrt(np.outer(row_sums, col_sums))
    np.fill_diagonal(normalized, 0.0)
    return normalized
