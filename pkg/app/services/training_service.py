"""
Treino por gradiente de política com baseline de valor, bônus de entropia
e cronograma de tamanho de episódio.
"""
import csv
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.config.settings import settings
from app.models.network import ModelParams
from app.models.search import StepRecord, Trajectory
from app.models.tsp import Move
from app.nn import tensor as T
from app.nn.decoder import policy_decode, value_estimate
from app.nn.encoder import encode_state
from app.nn.optim import AdamState, adam_step, grads_of
from app.nn.params import init_params
from app.schemas.config import TrainConfig
from app.schemas.report import LossReport, format_number
from app.services.checkpoint_service import save_checkpoint
from app.services.env_service import TwoOptEnv, compute_returns
from app.services.evaluation_service import evaluate_policy
from app.services.instance_service import generate_instances, random_instances
from app.services.oracle_service import mean_gap, solve_many
from app.utils.errors import InvalidInputError, NonFiniteError, NonFiniteLossError, TrainingDivergedError

logger = logging.getLogger(__name__)

METRICS_COLUMNS = ["epoch", "batch", "mean_return", "mean_entropy", "policy_loss", "value_loss", "val_gap_pct", "wallclock_s"]

# Número de seleções por movimento 2-opt (a₁, a₂).
SELECTIONS_PER_MOVE = 2


def rollout_episode(env: TwoOptEnv, params: ModelParams, episode_length: int, rng: np.random.Generator) -> List[Trajectory]:
    """
    Executa min(T, passos restantes) passos amostrando da política, sem tape.
    Retornos e vantagens são calculados dentro da fatia.
    """
    steps = min(episode_length, env.remaining)
    if steps < 1:
        raise InvalidInputError("rollout sem passos restantes na execução")
    trajectories = [Trajectory(instance=inst) for inst in env.instances]
    rewards = np.zeros((env.batch_size, steps))
    values = np.zeros((env.batch_size, steps))

    for t in range(steps):
        states = list(env.states)
        enc = encode_state(env.instances, states, params)
        decoded = policy_decode(enc, params, rng, "sample")
        values[:, t] = value_estimate(enc, params).data
        rewards[:, t] = env.step(decoded.moves)
        for k, trajectory in enumerate(trajectories):
            trajectory.records.append(StepRecord(
                state=states[k],
                move=Move(*decoded.moves[k]),
                reward=float(rewards[k, t]),
                log_prob=float(decoded.log_prob.data[k]),
                entropy=float(decoded.entropy.data[k]),
                value=float(values[k, t]),
            ))

    returns = compute_returns(rewards, env.config.gamma)
    advantages = returns - values
    for k, trajectory in enumerate(trajectories):
        for t, record in enumerate(trajectory.records):
            record.return_ = float(returns[k, t])
            record.advantage = float(advantages[k, t])
    return trajectories


def policy_value_loss(
    trajectories: Sequence[Trajectory],
    params: ModelParams,
    beta_h: float,
    beta_v: float,
    k: int = SELECTIONS_PER_MOVE,
) -> Tuple[T.Tensor, LossReport]:
    """
    loss = −(1/(B·k·T)) Σ log π·𝒜 − (β_H/(B·k)) Σ H + (β_V/(B·T)) Σ (G − V)².

    Os estados gravados são recodificados com as ações impostas; 𝒜 vem do
    rollout e entra como constante.
    """
    batch = len(trajectories)
    if batch == 0:
        raise InvalidInputError("policy_value_loss sem trajetórias")
    horizon = len(trajectories[0])
    if horizon == 0 or any(len(tr) != horizon for tr in trajectories):
        raise InvalidInputError("trajetórias precisam ter o mesmo tamanho, não nulo")

    records = [record for tr in trajectories for record in tr.records]
    instances = [tr.instance for tr in trajectories for _ in tr.records]
    actions = np.array([record.move.as_tuple() for record in records], dtype=np.int64)
    advantages = np.array([record.advantage for record in records], dtype=np.float64)
    returns = np.array([record.return_ for record in records], dtype=np.float64)

    try:
        enc = encode_state(instances, [record.state for record in records], params)
        decoded = policy_decode(enc, params, actions=actions)
        values = value_estimate(enc, params)

        policy_term = T.scale(T.sum(T.mul(decoded.log_prob, advantages)), -1.0 / (batch * k * horizon))
        entropy_term = T.scale(T.sum(decoded.entropy), -beta_h / (batch * k))
        value_term = T.scale(T.sum(T.square(T.sub(returns, values))), beta_v / (batch * horizon))
        loss = T.add(T.add(policy_term, entropy_term), value_term)
    except NonFiniteError as exc:
        raise NonFiniteLossError(f"perda não finita (B={batch}, T={horizon}): {exc}") from exc

    report = LossReport(
        policy_term=float(policy_term.data),
        entropy_term=float(entropy_term.data),
        value_term=float(value_term.data),
        mean_advantage=float(advantages.mean()),
        mean_return=float(returns.mean()),
        mean_entropy=float(decoded.entropy.data.mean() / k),
    )
    return loss, report


@dataclass
class TrainResult:
    params: ModelParams
    metrics_path: Path
    checkpoints: List[Path] = field(default_factory=list)
    rows: List[Dict[str, str]] = field(default_factory=list)
    updates: int = 0


class Trainer:
    """Laço de épocas; um passo de Adam por fatia de episódio."""

    def __init__(self, config: TrainConfig, out_dir: Union[str, Path], threads: int = 1):
        self.config = config
        self.out_dir = Path(out_dir)
        self.threads = threads
        self.rng = np.random.default_rng(config.seed)
        self.params = init_params(config.net, config.seed)
        self.optimizer = AdamState()
        self.learning_rate = config.learning_rate
        self.beta_h = config.beta_h
        self.last_good: Optional[Path] = None
        self.result = TrainResult(params=self.params, metrics_path=self.out_dir / "metrics.csv")
        self.validation = generate_instances(config.n_nodes, config.val_size, config.val_seed)
        self.validation_optima: Optional[List[float]] = None

    def _prepare_validation(self) -> None:
        if self.config.n_nodes > settings.ORACLE_MAX_NODES:
            logger.warning(f"⚠️ n={self.config.n_nodes} acima do limite do oráculo: validação sem gap")
            return
        logger.info(f"🔄 Calculando ótimos de {len(self.validation)} instâncias de validação")
        self.validation_optima = solve_many(self.validation, threads=self.threads)

    def _validate(self) -> Optional[float]:
        evaluation = evaluate_policy(
            self.params, self.validation, self.config.val_steps, "sample", seed=self.config.val_seed
        )
        if self.validation_optima is None:
            logger.info(f"📊 Validação: custo médio {evaluation.mean_cost:.4f}")
            return None
        gap = mean_gap(evaluation.best_costs, self.validation_optima)
        logger.info(f"📊 Validação: custo médio {evaluation.mean_cost:.4f}, gap {gap:.2f}%")
        return gap

    def _update(self, trajectories: List[Trajectory]) -> LossReport:
        with T.Tape():
            loss, report = policy_value_loss(trajectories, self.params, self.beta_h, self.config.beta_v)
            T.backward(loss, self.params.parameters())
        adam_step(
            self.params.tensors,
            grads_of(self.params.tensors),
            self.optimizer,
            lr=self.learning_rate,
            weight_decay=self.config.weight_decay,
        )
        self.params.zero_grad()
        if not self.params.all_finite():
            raise TrainingDivergedError(
                f"parâmetros não finitos após a atualização {self.result.updates + 1}",
                last_good_checkpoint=str(self.last_good) if self.last_good else None,
            )
        self.result.updates += 1
        return report

    def _run_batch(self, epoch: int) -> Dict[str, float]:
        config = self.config
        env_config = config.env_config(epoch)
        instances = random_instances(config.n_nodes, config.batch_size, self.rng)
        env = TwoOptEnv(instances, env_config, self.rng)
        env.reset()

        reports: List[LossReport] = []
        returns: List[float] = []
        while not env.done:
            trajectories = rollout_episode(env, self.params, env_config.episode_length, self.rng)
            reports.append(self._update(trajectories))
            returns.extend(float(tr.returns[0]) for tr in trajectories)

        return {
            "mean_return": float(np.mean(returns)),
            "mean_entropy": float(np.mean([r.mean_entropy for r in reports])),
            "policy_loss": float(np.mean([r.policy_term for r in reports])),
            "value_loss": float(np.mean([r.value_term for r in reports])),
        }

    def run(self) -> TrainResult:
        config = self.config
        self.out_dir.mkdir(parents=True, exist_ok=True)
        if config.is_long_running:
            logger.warning("⚠️ Configuração em escala de publicação: execução longa em CPU")
        logger.info("=" * 60)
        logger.info(
            f"🚀 Treino n={config.n_nodes} d={config.net.d} L={config.net.n_layers} "
            f"B={config.batch_size} N_B={config.batches_per_epoch} E={config.epochs} 𝕋={config.total_steps}"
        )
        logger.info("=" * 60)
        self._prepare_validation()
        started = time.perf_counter()

        with open(self.result.metrics_path, "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=METRICS_COLUMNS, lineterminator="\n")
            writer.writeheader()

            for epoch in range(1, config.epochs + 1):
                episode_length = config.episode_length(epoch)
                expected = config.batches_per_epoch * math.ceil(config.total_steps / episode_length)
                updates_before = self.result.updates
                batch_rows = []
                for batch in range(1, config.batches_per_epoch + 1):
                    stats = self._run_batch(epoch)
                    batch_rows.append({"epoch": str(epoch), "batch": str(batch),
                                       **{key: format_number(value) for key, value in stats.items()}})

                logger.debug(f"Época {epoch}: {self.result.updates - updates_before} atualizações (esperado {expected})")
                self.learning_rate *= config.lr_decay
                self.beta_h *= config.beta_h_decay
                gap = self._validate()

                elapsed = time.perf_counter() - started if config.record_wallclock else 0.0
                for row in batch_rows:
                    row["val_gap_pct"] = ""
                    row["wallclock_s"] = format_number(elapsed)
                batch_rows[-1]["val_gap_pct"] = format_number(gap)
                writer.writerows(batch_rows)
                handle.flush()
                self.result.rows.extend(batch_rows)

                if epoch % config.checkpoint_every == 0 or epoch == config.epochs:
                    path = save_checkpoint(self.params, self.out_dir / "checkpoints" / f"epoch_{epoch:04d}.o2rl")
                    self.result.checkpoints.append(path)
                    self.last_good = path
                self.last_good = save_checkpoint(self.params, self.out_dir / "checkpoints" / "last.o2rl")

                logger.info(
                    f"✅ Época {epoch}/{config.epochs}: T={episode_length}, lr={self.learning_rate:.2e}, "
                    f"β_H={self.beta_h:.2e}, retorno médio {batch_rows[-1]['mean_return']}"
                )
        return self.result


def train(config: TrainConfig, out_dir: Union[str, Path], threads: int = 1) -> TrainResult:
    return Trainer(config, out_dir, threads).run()
