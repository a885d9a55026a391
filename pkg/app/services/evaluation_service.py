"""
Avaliação de políticas: rollouts de melhoria com acompanhamento do melhor tour.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from app.models.network import ModelParams
from app.models.search import SearchState
from app.models.tsp import Instance, Tour
from app.nn.decoder import policy_decode
from app.nn.encoder import encode_state
from app.schemas.config import EnvConfig
from app.services.env_service import TwoOptEnv
from app.services.instance_service import initial_tours as shared_initial_tours
from app.services.tour_service import make_tour
from app.utils.errors import InvalidInputError

logger = logging.getLogger(__name__)

MoveChooser = Callable[[TwoOptEnv, np.random.Generator], np.ndarray]


@dataclass
class PolicyEvaluation:
    """Resultado por instância de um rollout de ``steps`` passos."""

    best_costs: np.ndarray
    found_at: np.ndarray
    traces: np.ndarray
    best_tours: List[Tour]
    initial_costs: np.ndarray

    @property
    def steps(self) -> int:
        return int(self.traces.shape[1])

    @property
    def mean_cost(self) -> float:
        return float(np.mean(self.best_costs))

    @property
    def median_cost(self) -> float:
        return float(np.median(self.best_costs))

    def costs_at(self, budget: int) -> np.ndarray:
        """Melhor custo de cada instância após ``budget`` passos do mesmo rollout."""
        if not 1 <= budget <= self.steps:
            raise InvalidInputError(f"orçamento {budget} fora de 1..{self.steps}")
        return self.traces[:, budget - 1]


def _policy_chooser(params: ModelParams, mode: str) -> MoveChooser:
    def choose(env: TwoOptEnv, rng: np.random.Generator) -> np.ndarray:
        enc = encode_state(env.instances, env.states, params)
        return policy_decode(enc, params, rng, mode).moves

    return choose


def _uniform_chooser(env: TwoOptEnv, rng: np.random.Generator) -> np.ndarray:
    first, second = np.triu_indices(env.n, k=1)
    picks = rng.integers(0, first.size, size=env.batch_size)
    return np.stack([first[picks], second[picks]], axis=1)


def _rollout(
    instances: Sequence[Instance],
    steps: int,
    choose: MoveChooser,
    seed: int,
    starts: Optional[Sequence[Tour]],
    batch_size: int,
) -> PolicyEvaluation:
    if steps < 1:
        raise InvalidInputError(f"steps precisa ser >= 1, recebido {steps}")
    if not instances:
        raise InvalidInputError("avaliação sem instâncias")
    if starts is None:
        starts = shared_initial_tours(instances, seed)
    if len(starts) != len(instances):
        raise InvalidInputError(f"{len(starts)} tours iniciais para {len(instances)} instâncias")

    rng = np.random.default_rng(seed)
    config = EnvConfig(total_steps=steps, episode_length=steps, gamma=1.0, reward_clip=None)
    count = len(instances)
    traces = np.zeros((count, steps))
    found_at = np.zeros(count, dtype=np.int64)
    best_tours: List[Optional[Tour]] = [None] * count

    # lotes agrupados por n, na ordem original
    by_size: Dict[int, List[int]] = {}
    for index, inst in enumerate(instances):
        by_size.setdefault(inst.n, []).append(index)

    for indices in by_size.values():
        for offset in range(0, len(indices), batch_size):
            chunk = indices[offset:offset + batch_size]
            env = TwoOptEnv([instances[k] for k in chunk], config, rng)
            env.reset([SearchState(current=starts[k], best=starts[k]) for k in chunk])
            previous = env.best_lengths()
            for t in range(steps):
                env.step(choose(env, rng))
                lengths = env.best_lengths()
                improved = lengths < previous
                found_at[np.asarray(chunk)[improved]] = t + 1
                traces[chunk, t] = lengths
                previous = lengths
            for k, state in zip(chunk, env.states):
                best_tours[k] = make_tour(instances[k], state.best.order)

    return PolicyEvaluation(
        best_costs=np.array([tour.length for tour in best_tours]),
        found_at=found_at,
        traces=traces,
        best_tours=best_tours,
        initial_costs=np.array([tour.length for tour in starts]),
    )


def evaluate_policy(
    params: ModelParams,
    instances: Sequence[Instance],
    steps: int,
    mode: str = "sample",
    seed: int = 0,
    starts: Optional[Sequence[Tour]] = None,
    batch_size: int = 256,
) -> PolicyEvaluation:
    """
    Parte de tours aleatórios (ou ``starts``) e executa a política por ``steps``
    passos, guardando o melhor custo e o passo em que foi encontrado.
    """
    result = _rollout(instances, steps, _policy_chooser(params, mode), seed, starts, batch_size)
    logger.debug(f"Política ({mode}): {len(instances)} instâncias, {steps} passos, custo médio {result.mean_cost:.4f}")
    return result


def evaluate_random_policy(
    instances: Sequence[Instance],
    steps: int,
    seed: int = 0,
    starts: Optional[Sequence[Tour]] = None,
    batch_size: int = 256,
) -> PolicyEvaluation:
    """Política uniforme sobre os n(n−1)/2 movimentos."""
    return _rollout(instances, steps, _uniform_chooser, seed, starts, batch_size)


def evaluate_trials(
    params: ModelParams,
    instances: Sequence[Instance],
    steps: int,
    trials: int,
    seed: int = 0,
    mode: str = "sample",
) -> Dict[str, float]:
    """Média ± desvio do custo médio em ``trials`` repetições com seeds seed, seed+1, ..."""
    if trials < 1:
        raise InvalidInputError(f"trials precisa ser >= 1, recebido {trials}")
    means = [evaluate_policy(params, instances, steps, mode, seed + trial).mean_cost for trial in range(trials)]
    return {"mean": float(np.mean(means)), "std": float(np.std(means)), "trials": float(trials)}
