"""
Geração, persistência (.npz) e tours iniciais de conjuntos de instâncias.
"""
import hashlib
import logging
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np

from app.models.tsp import MIN_NODES_2OPT, Instance, Tour
from app.schemas.report import InstanceSetDescriptor
from app.services.tour_service import random_tour
from app.utils.errors import InvalidInputError

logger = logging.getLogger(__name__)


def _check_size(n: int, count: int) -> None:
    if n < MIN_NODES_2OPT:
        raise InvalidInputError(f"n precisa ser >= {MIN_NODES_2OPT}, recebido {n}")
    if count < 1:
        raise InvalidInputError(f"count precisa ser >= 1, recebido {count}")


def generate_instances(n: int, count: int, seed: int) -> List[Instance]:
    """Coordenadas i.i.d. uniformes em [0,1]²; um fluxo aleatório por instância."""
    _check_size(n, count)
    streams = np.random.SeedSequence(seed).spawn(count)
    return [
        Instance.from_coords(np.random.default_rng(stream).uniform(size=(n, 2)), name=f"u{n}-{seed}-{k}")
        for k, stream in enumerate(streams)
    ]


def random_instances(n: int, count: int, rng: np.random.Generator) -> List[Instance]:
    """Lote fresco a partir de um gerador compartilhado (treino)."""
    _check_size(n, count)
    coords = rng.uniform(size=(count, n, 2))
    return [Instance.from_coords(points) for points in coords]


def initial_tours(instances: Sequence[Instance], seed: int) -> List[Tour]:
    """Tours aleatórios compartilhados entre métodos de melhoria."""
    streams = np.random.SeedSequence(seed).spawn(len(instances))
    return [random_tour(inst, np.random.default_rng(stream)) for inst, stream in zip(instances, streams)]


def tours_digest(tours: Sequence[Tour]) -> str:
    """Resumo curto das ordens, usado para conferir tours iniciais compartilhados."""
    digest = hashlib.sha256()
    for tour in tours:
        digest.update(tour.order.tobytes())
    return digest.hexdigest()[:16]


def save_instances(path: Union[str, Path], instances: Sequence[Instance], seed: int = 0) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if len({inst.n for inst in instances}) != 1:
        raise InvalidInputError("conjunto .npz exige instâncias do mesmo tamanho")
    coords = np.stack([inst.coords for inst in instances])
    with open(path, "wb") as handle:
        np.savez(handle, coords=coords, seed=np.int64(seed))
    logger.info(f"💾 {len(instances)} instâncias salvas em {path}")
    return path


def load_instances(path: Union[str, Path]) -> Tuple[List[Instance], InstanceSetDescriptor]:
    path = Path(path)
    if not path.exists():
        raise InvalidInputError(f"arquivo de instâncias não encontrado: {path}")
    with np.load(path) as data:
        if "coords" not in data:
            raise InvalidInputError(f"{path}: arquivo sem o array 'coords'")
        coords = np.asarray(data["coords"], dtype=np.float64)
        seed = int(data["seed"]) if "seed" in data else 0
    if coords.ndim != 3 or coords.shape[2] != 2:
        raise InvalidInputError(f"{path}: 'coords' com forma {coords.shape}, esperado (count, n, 2)")
    instances = [Instance.from_coords(points, name=f"{path.stem}-{k}") for k, points in enumerate(coords)]
    descriptor = InstanceSetDescriptor(n=coords.shape[1], count=coords.shape[0], seed=seed, name=path.stem)
    return instances, descriptor
