"""
Oráculo exato: força bruta, Held-Karp e gaps de otimalidade.
"""
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.config.settings import settings
from app.models.tsp import Instance, Tour
from app.services.tour_service import make_tour
from app.utils.errors import InstanceTooLargeError, InvalidInputError, OracleInconsistencyError

logger = logging.getLogger(__name__)

GAP_TOLERANCE = 1e-9


def brute_force(instance: Instance, max_nodes: Optional[int] = None) -> Tuple[Tour, float]:
    """Enumera (n−1)!/2 tours com o nó 0 fixo; desempate pela primeira permutação."""
    cap = max_nodes if max_nodes is not None else settings.BRUTE_FORCE_MAX_NODES
    n = instance.n
    if n > cap:
        raise InstanceTooLargeError(n, cap, "brute_force")

    perms = np.array(
        [p for p in itertools.permutations(range(1, n)) if p[0] < p[-1]],
        dtype=np.int64,
    )
    dist = instance.dist
    costs = dist[0, perms[:, 0]] + dist[perms[:, -1], 0]
    if perms.shape[1] > 1:
        costs = costs + dist[perms[:, :-1], perms[:, 1:]].sum(axis=1)
    best = int(np.argmin(costs))
    tour = make_tour(instance, np.concatenate([[0], perms[best]]))
    return tour, tour.length


def _popcount(values: np.ndarray, bits: int) -> np.ndarray:
    counts = np.zeros_like(values)
    for bit in range(bits):
        counts += (values >> bit) & 1
    return counts


def held_karp(instance: Instance, max_nodes: Optional[int] = None) -> Tuple[Tour, float]:
    """
    Programação dinâmica sobre subconjuntos com tabela de predecessores.

    dp[S, j]: menor caminho que parte do nó 0, visita S ⊆ {1..n−1} e termina
    em j ∈ S. Subconjuntos são processados por cardinalidade.
    """
    cap = max_nodes if max_nodes is not None else settings.ORACLE_MAX_NODES
    n = instance.n
    if n > cap:
        raise InstanceTooLargeError(n, cap, "held_karp")

    m = n - 1
    inner = instance.dist[1:, 1:]
    full = (1 << m) - 1
    dp = np.full((1 << m, m), np.inf)
    parent = np.full((1 << m, m), -1, dtype=np.int8)
    for j in range(m):
        dp[1 << j, j] = instance.dist[0, j + 1]

    masks = np.arange(1 << m, dtype=np.int64)
    sizes = _popcount(masks, m)
    for size in range(2, m + 1):
        layer = masks[sizes == size]
        for j in range(m):
            subset = layer[((layer >> j) & 1) == 1]
            previous = subset ^ (1 << j)
            candidates = dp[previous] + inner[:, j]
            choice = np.argmin(candidates, axis=1)
            dp[subset, j] = candidates[np.arange(subset.size), choice]
            parent[subset, j] = choice

    closing = dp[full] + instance.dist[1:, 0]
    last = int(np.argmin(closing))
    optimum = float(closing[last])

    path = []
    mask, node = full, last
    while node >= 0:
        path.append(node + 1)
        previous = int(parent[mask, node])
        mask ^= 1 << node
        node = previous
    tour = make_tour(instance, [0] + path[::-1])

    if abs(tour.length - optimum) > GAP_TOLERANCE * max(1.0, optimum):
        raise OracleInconsistencyError(
            f"held_karp: tour reconstruído custa {tour.length:.12f}, DP indica {optimum:.12f}"
        )
    return tour, tour.length


def solve(instance: Instance) -> Tuple[Tour, float]:
    """Força bruta até o limite dela, Held-Karp acima."""
    if instance.n <= settings.BRUTE_FORCE_MAX_NODES:
        return brute_force(instance)
    return held_karp(instance)


def optimality_gap(cost: float, optimal: float) -> float:
    """100·(custo − ótimo)/ótimo."""
    if not optimal > 0:
        raise InvalidInputError(f"ótimo precisa ser positivo, recebido {optimal}")
    if cost < optimal - GAP_TOLERANCE * max(1.0, optimal):
        raise OracleInconsistencyError(f"custo {cost:.12f} abaixo do ótimo {optimal:.12f}")
    return max(0.0, 100.0 * (cost - optimal) / optimal)


def mean_gap(costs: Sequence[float], optima: Sequence[float]) -> float:
    """Média dos gaps por instância (não o gap das médias)."""
    if len(costs) != len(optima) or len(costs) == 0:
        raise InvalidInputError(f"{len(costs)} custos para {len(optima)} ótimos")
    return float(np.mean([optimality_gap(c, o) for c, o in zip(costs, optima)]))


def solve_many(instances: Sequence[Instance], threads: int = 1) -> List[float]:
    """Ótimos de Held-Karp na ordem de entrada."""
    if threads <= 1:
        return [held_karp(inst)[1] for inst in instances]
    logger.info(f"🔄 Held-Karp em {len(instances)} instâncias com {threads} threads")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return [length for _, length in pool.map(held_karp, instances)]
