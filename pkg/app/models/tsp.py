"""
Tipos de domínio do TSP euclidiano: instância, tour e movimento 2-opt.

Índices são 0-based; posições de tour são cíclicas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from app.utils.errors import InvalidInputError

# Abaixo de 4 nós todo movimento 2-opt é rotação/reflexão.
MIN_NODES_2OPT = 4
COORD_TOLERANCE = 1e-12
# Tolerância na comparação de comprimentos de Tour.
LENGTH_TOLERANCE = 1e-9


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Instance:
    """Instância com coordenadas em [0,1]², distâncias e arestas normalizadas."""

    coords: np.ndarray
    dist: np.ndarray
    norm_edges: np.ndarray
    name: str = field(default="", compare=False)

    @property
    def n(self) -> int:
        return int(self.coords.shape[0])

    @classmethod
    def from_coords(cls, coords, name: str = "") -> "Instance":
        from app.services.tour_service import normalize_edges

        points = np.array(coords, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 2:
            raise InvalidInputError(f"coordenadas devem ter forma (n, 2), recebido {points.shape}")
        if points.shape[0] < 3:
            raise InvalidInputError(f"instância precisa de ao menos 3 nós, recebido {points.shape[0]}")
        if not np.all(np.isfinite(points)):
            raise InvalidInputError("coordenadas não finitas")
        if points.min() < -COORD_TOLERANCE or points.max() > 1.0 + COORD_TOLERANCE:
            raise InvalidInputError("coordenadas fora do quadrado unitário [0,1]²")

        dist = cdist(points, points)
        np.fill_diagonal(dist, 0.0)
        return cls(
            coords=_readonly(points),
            dist=_readonly(dist),
            norm_edges=_readonly(normalize_edges(dist)),
            name=name,
        )

    def require_two_opt(self) -> None:
        if self.n < MIN_NODES_2OPT:
            raise InvalidInputError(f"2-opt exige n >= {MIN_NODES_2OPT}, instância tem n={self.n}")


@dataclass(frozen=True)
class Tour:
    """Permutação dos nós com comprimento em cache."""

    order: np.ndarray
    length: float

    def __post_init__(self):
        order = np.asarray(self.order, dtype=np.int64)
        if order.flags.writeable:
            order = order.copy()
            order.setflags(write=False)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "length", float(self.length))

    @property
    def n(self) -> int:
        return int(self.order.shape[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tour):
            return NotImplemented
        return bool(np.array_equal(self.order, other.order)) and math.isclose(
            self.length, other.length, rel_tol=LENGTH_TOLERANCE, abs_tol=LENGTH_TOLERANCE
        )

    def __hash__(self) -> int:
        return hash(self.order.tobytes())


@dataclass(frozen=True)
class Move:
    """Movimento 2-opt: inverte as posições i..j do tour."""

    i: int
    j: int

    def __post_init__(self):
        i, j = int(self.i), int(self.j)
        if not 0 <= i < j:
            raise InvalidInputError(f"movimento inválido ({i}, {j}): exige 0 <= i < j")
        object.__setattr__(self, "i", i)
        object.__setattr__(self, "j", j)

    def check(self, n: int) -> None:
        if self.j > n - 1:
            raise InvalidInputError(f"movimento ({self.i}, {self.j}) fora do tour de {n} nós")

    def as_tuple(self) -> tuple:
        return (self.i, self.j)
