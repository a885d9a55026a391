"""
MDP 2-opt: transições, melhor-até-agora, recompensas e retornos descontados.
"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.models.search import SearchState
from app.models.tsp import Instance, Move
from app.schemas.config import EnvConfig
from app.services.tour_service import apply_move, random_tour
from app.utils.errors import InvalidInputError

logger = logging.getLogger(__name__)


def reset(instance: Instance, rng: np.random.Generator) -> SearchState:
    """Tour inicial uniformemente aleatório; best = current."""
    instance.require_two_opt()
    tour = random_tour(instance, rng)
    return SearchState(current=tour, best=tour)


def transition(state: SearchState, move: Move, instance: Instance) -> Tuple[SearchState, float]:
    """Aplica o movimento e devolve o novo estado com a recompensa bruta."""
    current = apply_move(state.current, move, instance)
    best = current if current.length < state.best.length else state.best
    return SearchState(current=current, best=best), state.best.length - best.length


def step(state: SearchState, move: Move, instance: Instance, config: EnvConfig) -> Tuple[SearchState, float]:
    """
    Recompensa = L(S′) − L(S′ seguinte), ≥ 0, truncada em ``reward_clip``.
    O estado de entrada não é alterado.
    """
    next_state, raw = transition(state, move, instance)
    return next_state, clip_reward(raw, config.reward_clip)


def clip_reward(raw: float, clip: Optional[float]) -> float:
    return float(min(raw, clip)) if clip is not None else float(raw)


def compute_returns(rewards, gamma: float) -> np.ndarray:
    """G_t = Σ_{t′≥t} γ^{t′−t} R_{t′} dentro da fatia, sem bootstrap; opera no último eixo."""
    rewards = np.asarray(rewards, dtype=np.float64)
    returns = np.zeros_like(rewards)
    running = np.zeros(rewards.shape[:-1])
    for t in range(rewards.shape[-1] - 1, -1, -1):
        running = rewards[..., t] + gamma * running
        returns[..., t] = running
    return returns


class TwoOptEnv:
    """
    Lote de B ambientes independentes sobre uma execução de 𝕋 passos.

    Episódios são encadeados: cada fatia começa do último estado da anterior
    e o melhor tour é mantido ao longo da execução.
    """

    def __init__(self, instances: Sequence[Instance], config: EnvConfig, rng: np.random.Generator):
        if not instances:
            raise InvalidInputError("TwoOptEnv exige ao menos uma instância")
        if len({inst.n for inst in instances}) != 1:
            raise InvalidInputError("todas as instâncias do lote precisam ter o mesmo n")
        self.instances: List[Instance] = list(instances)
        self.config = config
        self.rng = rng
        self.states: List[SearchState] = []
        self.steps_taken = 0

    @property
    def batch_size(self) -> int:
        return len(self.instances)

    @property
    def n(self) -> int:
        return self.instances[0].n

    @property
    def done(self) -> bool:
        return self.steps_taken >= self.config.total_steps

    @property
    def remaining(self) -> int:
        return self.config.total_steps - self.steps_taken

    def reset(self, states: Optional[Sequence[SearchState]] = None) -> List[SearchState]:
        if states is None:
            self.states = [reset(inst, self.rng) for inst in self.instances]
        else:
            if len(states) != self.batch_size:
                raise InvalidInputError(f"{len(states)} estados para {self.batch_size} ambientes")
            self.states = list(states)
        self.steps_taken = 0
        return self.states

    def step(self, moves: Sequence[Tuple[int, int]]) -> np.ndarray:
        """Aplica um movimento por ambiente; devolve as recompensas (B,)."""
        if self.done:
            raise InvalidInputError(f"execução encerrada após {self.config.total_steps} passos")
        if len(moves) != self.batch_size:
            raise InvalidInputError(f"{len(moves)} movimentos para {self.batch_size} ambientes")
        rewards = np.empty(self.batch_size)
        for k, (instance, (i, j)) in enumerate(zip(self.instances, moves)):
            self.states[k], rewards[k] = step(self.states[k], Move(int(i), int(j)), instance, self.config)
        self.steps_taken += 1
        return rewards

    def best_lengths(self) -> np.ndarray:
        return np.array([s.best.length for s in self.states])

    def current_lengths(self) -> np.ndarray:
        return np.array([s.current.length for s in self.states])
