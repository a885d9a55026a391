"""
Heurísticas clássicas: inserções construtivas e busca local 2-opt.
"""
import logging
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from app.models.tsp import Instance, Move, Tour
from app.schemas.config import LocalSearchConfig, SearchRule
from app.services.tour_service import all_move_deltas, apply_move, make_tour, random_tour
from app.utils.errors import InvalidInputError

logger = logging.getLogger(__name__)

# Deltas acima deste valor não contam como melhoria.
IMPROVEMENT_TOLERANCE = 1e-10


def _insert_cheapest(dist: np.ndarray, tour: List[int], node: int) -> None:
    """Insere ``node`` na aresta de menor acréscimo (menor posição em empate)."""
    if len(tour) == 1:
        tour.append(node)
        return
    here = np.asarray(tour)
    after = np.roll(here, -1)
    cost = dist[here, node] + dist[node, after] - dist[here, after]
    tour.insert(int(np.argmin(cost)) + 1, node)


def _grow(instance: Instance, tour: List[int], pick_farthest: bool) -> Tour:
    dist = instance.dist
    visited = np.zeros(instance.n, dtype=bool)
    visited[tour] = True
    # distância de cada nó ao tour parcial
    gap = dist[:, tour].min(axis=1)
    while not visited.all():
        candidates = np.flatnonzero(~visited)
        scores = gap[candidates]
        node = int(candidates[np.argmax(scores) if pick_farthest else np.argmin(scores)])
        _insert_cheapest(dist, tour, node)
        visited[node] = True
        gap = np.minimum(gap, dist[:, node])
    return make_tour(instance, tour)


def nearest_insertion(instance: Instance) -> Tour:
    """Começa pelo par mutuamente mais próximo; insere o nó mais próximo do tour."""
    masked = instance.dist + np.diag(np.full(instance.n, np.inf))
    i, j = np.unravel_index(int(np.argmin(masked)), masked.shape)
    return _grow(instance, [int(i), int(j)], pick_farthest=False)


def farthest_insertion(instance: Instance) -> Tour:
    """Começa pelo par mais distante; insere o nó mais distante do tour."""
    i, j = np.unravel_index(int(np.argmax(instance.dist)), instance.dist.shape)
    return _grow(instance, [int(i), int(j)], pick_farthest=True)


def random_insertion(instance: Instance, seed: int) -> Tour:
    """Ordem de inserção aleatória, determinística por seed."""
    order = np.random.default_rng(seed).permutation(instance.n)
    tour = [int(order[0])]
    for node in order[1:]:
        _insert_cheapest(instance.dist, tour, int(node))
    return make_tour(instance, tour)


CONSTRUCTORS: Dict[str, Callable[[Instance, int], Tour]] = {
    "nearest": lambda instance, seed: nearest_insertion(instance),
    "random": random_insertion,
    "farthest": lambda instance, seed: farthest_insertion(instance),
}


def construct(instance: Instance, method: str, seed: int = 0) -> Tour:
    if method not in CONSTRUCTORS:
        raise InvalidInputError(f"heurística construtiva desconhecida: {method}")
    return CONSTRUCTORS[method](instance, seed)


def _best_improvement(deltas: np.ndarray) -> Optional[Move]:
    flat = int(np.argmin(deltas))
    i, j = np.unravel_index(flat, deltas.shape)
    if deltas[i, j] >= -IMPROVEMENT_TOLERANCE:
        return None
    return Move(int(i), int(j))


def _first_improvement(deltas: np.ndarray, pairs: Tuple[np.ndarray, np.ndarray], start: int) -> Tuple[Optional[Move], int]:
    """Varredura por linhas a partir de ``start``, circular."""
    improving = deltas[pairs] < -IMPROVEMENT_TOLERANCE
    if not improving.any():
        return None, 0
    rolled = np.roll(improving, -start)
    index = (start + int(np.argmax(rolled))) % improving.size
    return Move(int(pairs[0][index]), int(pairs[1][index])), index + 1


def is_local_optimum(instance: Instance, tour: Tour, tolerance: float = 1e-9) -> bool:
    return bool(all_move_deltas(instance, tour.order).min() >= -tolerance)


def local_search_2opt(instance: Instance, start: Tour, config: LocalSearchConfig) -> Tuple[Tour, int, List[float]]:
    """
    2-opt por First ou Best Improvement.

    Cada movimento aceito ou reinício conta um passo; ``trace`` guarda o
    comprimento do melhor tour após cada passo.
    """
    instance.require_two_opt()
    rng = np.random.default_rng(config.rng_seed)
    pairs = np.triu_indices(instance.n, k=1)
    current, best = start, start
    trace: List[float] = []
    steps, cursor, restarts = 0, 0, 0

    while steps < config.max_steps:
        deltas = all_move_deltas(instance, current.order)
        if config.rule == SearchRule.BEST_IMPROVEMENT:
            move = _best_improvement(deltas)
        else:
            move, next_cursor = _first_improvement(deltas, pairs, cursor)
            cursor = next_cursor % pairs[0].size

        if move is None:
            if not config.restarts:
                break
            current = random_tour(instance, rng)
            cursor = 0
            restarts += 1
        else:
            current = apply_move(current, move, instance)

        steps += 1
        if current.length < best.length:
            best = current
        trace.append(best.length)

    logger.debug(
        f"2-opt {config.rule.value}: {steps} passos, {restarts} reinícios, "
        f"{start.length:.4f} -> {best.length:.4f}"
    )
    return best, steps, trace
