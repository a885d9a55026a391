"""
Custos de referência publicados para instâncias uniformes TSP20/50/100.

Usados como denominador de gap acima do limite do oráculo exato.
"""
from typing import Dict, Optional

# Custo ótimo médio (Concorde).
OPTIMAL_MEAN_COST: Dict[int, float] = {
    20: 3.84,
    50: 5.70,
    100: 7.76,
}

# Heurística -> n -> (custo médio, gap médio %).
HEURISTIC_REFERENCE: Dict[str, Dict[int, tuple]] = {
    "nearest": {20: (4.33, 12.91), 50: (6.78, 19.03), 100: (9.46, 21.82)},
    "random": {20: (4.00, 4.36), 50: (6.13, 7.65), 100: (8.52, 9.69)},
    "farthest": {20: (3.93, 2.36), 50: (6.01, 5.53), 100: (8.35, 7.59)},
}


def reference_optimum(n: int) -> Optional[float]:
    return OPTIMAL_MEAN_COST.get(n)


def reference_heuristic(method: str, n: int) -> Optional[tuple]:
    return HEURISTIC_REFERENCE.get(method, {}).get(n)
