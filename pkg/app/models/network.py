"""
Tipos da rede de política/valor: parâmetros nomeados, codificação de estado
e resultado da decodificação.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from app.nn.tensor import Tensor
from app.schemas.config import NetConfig

ENCODER_S = "enc_s"
ENCODER_BEST = "enc_b"


@dataclass
class ModelParams:
    """Tensores treináveis indexados por nome (ex.: ``enc_s.gcn0.W_g``)."""

    config: NetConfig
    tensors: Dict[str, Tensor]

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def __len__(self) -> int:
        return len(self.tensors)

    def parameters(self) -> List[Tensor]:
        return list(self.tensors.values())

    @property
    def size(self) -> int:
        return int(sum(t.size for t in self.tensors.values()))

    @property
    def best_encoder(self) -> str:
        """Prefixo do codificador de S′ (o mesmo de S quando compartilhado)."""
        return ENCODER_BEST if ENCODER_BEST + ".W_x" in self.tensors else ENCODER_S

    def zero_grad(self) -> None:
        for tensor in self.tensors.values():
            tensor.grad = None

    def all_finite(self) -> bool:
        return all(bool(np.all(np.isfinite(t.data))) for t in self.tensors.values())

    def snapshot(self) -> "ModelParams":
        """Cópia profunda congelada para rollouts."""
        return ModelParams(
            config=self.config,
            tensors={
                name: Tensor(t.data.copy(), requires_grad=True, name=name)
                for name, t in self.tensors.items()
            },
        )


@dataclass
class StateEncoding:
    """
    Saída dos codificadores para um lote de B estados com n nós.

    z, o: (B, n, d); h_n, h_best, z_g, q0: (B, d).
    """

    z: Tensor
    o: Tensor
    h_n: Tensor
    h_best: Tensor
    z_g: Tensor
    q0: Tensor

    @property
    def batch_size(self) -> int:
        return int(self.z.shape[0])

    @property
    def n(self) -> int:
        return int(self.z.shape[1])


@dataclass
class DecodeResult:
    moves: np.ndarray
    log_prob: Tensor
    entropy: Tensor
    step_probs: Tuple[np.ndarray, np.ndarray]
    step_logits: Tuple[np.ndarray, np.ndarray]
    value: Optional[Tensor] = None

    def move_tuples(self) -> List[Tuple[int, int]]:
        return [(int(i), int(j)) for i, j in self.moves]
