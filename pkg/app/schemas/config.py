"""
Schemas de configuração (rede, ambiente, busca local, treino).
"""
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class NetConfig(BaseModel):
    """Configuração do codificador/decodificador."""
    model_config = ConfigDict(frozen=True)

    d: int = Field(128, ge=2, description="Largura dos embeddings")
    n_layers: int = Field(3, ge=0, description="Camadas GCN (L)")
    clip: float = Field(10.0, gt=0, description="Clipping dos logits (C)")
    use_gcn: bool = Field(True, description="Desliga a GCN (z = x⁰)")
    use_lstm: bool = Field(True, description="Desliga a LSTM (o = z, h_n = média de z)")
    use_bidirectional: bool = Field(True, description="LSTM bidirecional; falso = apenas sentido direto")
    use_best_solution: bool = Field(True, description="Codifica o melhor tour S′; falso = h′_n = h_n")
    share_encoders: bool = Field(False, description="Mesma pilha de codificação para S e S′")

    @field_validator("d")
    @classmethod
    def validate_even(cls, v):
        """W_s projeta para d/2."""
        if v % 2:
            raise ValueError("d precisa ser par")
        return v


class EnvConfig(BaseModel):
    """Ambiente de 𝕋 passos dividido em episódios de T passos."""
    model_config = ConfigDict(frozen=True)

    total_steps: int = Field(200, ge=1, description="Limite de passos (𝕋)")
    episode_length: int = Field(8, ge=1, description="Tamanho do episódio (T)")
    gamma: float = Field(0.99, gt=0, le=1)
    reward_clip: Optional[float] = Field(1.0, gt=0)

    @model_validator(mode="after")
    def validate_episode(self):
        if self.episode_length > self.total_steps:
            raise ValueError("episode_length não pode exceder total_steps")
        return self


class SearchRule(str, Enum):
    FIRST_IMPROVEMENT = "first"
    BEST_IMPROVEMENT = "best"


class LocalSearchConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    rule: SearchRule = SearchRule.BEST_IMPROVEMENT
    restarts: bool = False
    max_steps: int = Field(1000, ge=1)
    rng_seed: int = 0


def parse_schedule(value) -> Dict[int, int]:
    """Aceita dict ou texto "1:8,100:10,150:20"."""
    if isinstance(value, dict):
        return {int(k): int(v) for k, v in value.items()}
    schedule = {}
    for chunk in str(value).split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        epoch, _, length = chunk.partition(":")
        schedule[int(epoch)] = int(length)
    return schedule


class TrainConfig(BaseModel):
    """Hiperparâmetros do treino por gradiente de política."""

    n_nodes: int = Field(10, ge=4)
    epochs: int = Field(30, ge=1)
    batches_per_epoch: int = Field(10, ge=1)
    batch_size: int = Field(64, ge=1)
    total_steps: int = Field(40, ge=1)
    episode_schedule: Dict[int, int] = Field(default_factory=lambda: {1: 4, 10: 8})
    gamma: float = Field(0.99, gt=0, le=1)
    learning_rate: float = Field(1e-3, gt=0)
    lr_decay: float = Field(0.98, gt=0, le=1)
    beta_v: float = Field(0.5, ge=0)
    beta_h: float = Field(0.0045, ge=0)
    beta_h_decay: float = Field(0.9, gt=0, le=1)
    reward_clip: Optional[float] = Field(1.0, gt=0)
    weight_decay: float = Field(1e-5, ge=0)
    net: NetConfig = Field(default_factory=lambda: NetConfig(d=32, n_layers=2))
    seed: int = 1234
    val_size: int = Field(256, ge=1)
    val_steps: int = Field(200, ge=1)
    val_seed: int = 4321
    checkpoint_every: int = Field(1, ge=1)
    record_wallclock: bool = False

    @field_validator("episode_schedule", mode="before")
    @classmethod
    def validate_schedule(cls, v):
        schedule = parse_schedule(v)
        if not schedule:
            raise ValueError("episode_schedule vazio")
        if any(epoch < 1 or length < 1 for epoch, length in schedule.items()):
            raise ValueError("épocas e tamanhos do schedule devem ser positivos")
        if 1 not in schedule:
            raise ValueError("episode_schedule precisa definir a época 1")
        return dict(sorted(schedule.items()))

    @model_validator(mode="after")
    def validate_schedule_range(self):
        if max(self.episode_schedule) > self.epochs:
            raise ValueError("chaves do episode_schedule devem ser <= epochs")
        return self

    def episode_length(self, epoch: int) -> int:
        """T_e: valor da maior chave <= época."""
        length = self.episode_schedule[1]
        for start, value in self.episode_schedule.items():
            if start <= epoch:
                length = value
        return min(length, self.total_steps)

    def env_config(self, epoch: int) -> EnvConfig:
        return EnvConfig(
            total_steps=self.total_steps,
            episode_length=self.episode_length(epoch),
            gamma=self.gamma,
            reward_clip=self.reward_clip,
        )

    @property
    def is_long_running(self) -> bool:
        return self.batch_size * self.batches_per_epoch * self.epochs > 200_000 or self.net.d > 64

    @classmethod
    def published_preset(cls, n_nodes: int, **overrides) -> "TrainConfig":
        """Hiperparâmetros publicados para TSP20/50/100."""
        presets = {
            20: dict(batch_size=512, batches_per_epoch=10, epochs=200,
                     episode_schedule={1: 8, 100: 10, 150: 20}, beta_h=0.0045),
            50: dict(batch_size=512, batches_per_epoch=10, epochs=300,
                     episode_schedule={1: 8, 100: 10, 200: 20}, beta_h=0.0045),
            100: dict(batch_size=256, batches_per_epoch=20, epochs=300,
                      episode_schedule={1: 4, 100: 8, 200: 10}, beta_h=0.0018),
        }
        if n_nodes not in presets:
            raise ValueError(f"sem preset publicado para n={n_nodes}")
        values = dict(
            n_nodes=n_nodes,
            total_steps=200,
            gamma=0.99,
            learning_rate=1e-3,
            lr_decay=0.98,
            beta_v=0.5,
            beta_h_decay=0.9,
            reward_clip=1.0,
            weight_decay=1e-5,
            net=NetConfig(d=128, n_layers=3, clip=10.0),
        )
        values.update(presets[n_nodes])
        values.update(overrides)
        return cls(**values)


CONSTRUCTION_METHODS = ("nearest", "random", "farthest")
IMPROVEMENT_METHODS = ("fi", "bi", "fi+restarts", "bi+restarts")
ORACLE_METHOD = "held-karp"
POLICY_PREFIX = "policy:"


class BenchmarkConfig(BaseModel):
    """Execução de benchmark sobre um conjunto compartilhado de instâncias."""

    n: int = Field(20, ge=4)
    count: int = Field(100, ge=1)
    seed: int = 1234
    methods: List[str] = Field(default_factory=lambda: ["farthest", ORACLE_METHOD])
    steps: int = Field(200, ge=1, description="Orçamento de passos dos métodos de melhoria")
    tour_seed: Optional[int] = Field(None, description="Seed dos tours iniciais (padrão: seed + 1)")
    threads: int = Field(1, ge=1)
    record_wallclock: bool = False
    policy_batch_size: int = Field(256, ge=1)

    @field_validator("methods")
    @classmethod
    def validate_methods(cls, v):
        if not v:
            raise ValueError("lista de métodos vazia")
        known = set(CONSTRUCTION_METHODS) | set(IMPROVEMENT_METHODS) | {ORACLE_METHOD}
        for method in v:
            if method not in known and not (method.startswith(POLICY_PREFIX) and len(method) > len(POLICY_PREFIX)):
                raise ValueError(f"método desconhecido: {method}")
        return v

    @property
    def start_seed(self) -> int:
        return self.seed + 1 if self.tour_seed is None else self.tour_seed
