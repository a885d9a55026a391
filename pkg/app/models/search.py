"""
Estado do MDP 2-opt e registros de trajetória.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from app.models.tsp import Instance, Move, Tour


@dataclass(frozen=True)
class SearchState:
    """Par (tour atual S, melhor tour visto S′)."""

    current: Tour
    best: Tour


@dataclass
class StepRecord:
    state: SearchState
    move: Move
    reward: float
    log_prob: float
    entropy: float
    value: float
    return_: Optional[float] = None
    advantage: Optional[float] = None


@dataclass
class Trajectory:
    """Fatia de episódio de um ambiente."""

    instance: Instance
    records: List[StepRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def rewards(self) -> np.ndarray:
        return np.array([r.reward for r in self.records], dtype=np.float64)

    @property
    def returns(self) -> np.ndarray:
        return np.array([r.return_ for r in self.records], dtype=np.float64)

    @property
    def advantages(self) -> np.ndarray:
        return np.array([r.advantage for r in self.records], dtype=np.float64)
