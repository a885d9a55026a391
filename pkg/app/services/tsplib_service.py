"""
Leitura de arquivos TSPLIB (subconjunto EUC_2D).
"""
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from scipy.spatial.distance import cdist

from app.models.tsp import Instance
from app.services.tour_service import validate_order
from app.utils.errors import DegenerateInstanceError, TsplibParseError, UnsupportedFormatError
from app.utils.tsplib_optima import get_known_optimum

logger = logging.getLogger(__name__)

SUPPORTED_EDGE_WEIGHT_TYPES = {"EUC_2D"}
HEADER_KEYWORDS = {"NAME", "TYPE", "COMMENT", "DIMENSION", "EDGE_WEIGHT_TYPE"}


@dataclass(frozen=True)
class TsplibInstance:
    """Coordenadas originais, cópia escalada para a política e custo TSPLIB."""

    name: str
    dimension: int
    coords: np.ndarray
    instance: Instance
    comment: str = ""
    rounded_dist: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def optimum(self) -> Optional[int]:
        return get_known_optimum(self.name)

    def cost(self, order: Sequence[int]) -> int:
        """Custo com arestas EUC_2D arredondadas (nint) nas coordenadas originais."""
        order = validate_order(self.instance, order)
        return int(self.rounded_dist[order, np.roll(order, -1)].sum())

    def gap(self, order: Sequence[int]) -> Optional[float]:
        if self.optimum is None:
            return None
        return 100.0 * (self.cost(order) - self.optimum) / self.optimum


def scale_to_unit_square(coords: np.ndarray) -> np.ndarray:
    """Min–max preservando a proporção: o eixo mais longo ocupa [0, 1]."""
    shifted = coords - coords.min(axis=0)
    span = float(shifted.max())
    if span <= 0.0:
        raise DegenerateInstanceError("todas as coordenadas coincidem")
    return shifted / span


def parse_tsplib(text: str) -> TsplibInstance:
    header: Dict[str, str] = {}
    coords: List[List[float]] = []
    in_coords = False

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line == "EOF":
            break
        if in_coords:
            parts = line.split()
            if parts[0][0].isalpha():
                in_coords = False
            else:
                if len(parts) != 3:
                    raise TsplibParseError(f"esperado 'id x y', recebido {line!r}", line_number)
                try:
                    coords.append([float(parts[1]), float(parts[2])])
                except ValueError:
                    raise TsplibParseError(f"coordenada não numérica em {line!r}", line_number)
                continue
        if line.startswith("NODE_COORD_SECTION"):
            in_coords = True
            continue

        key, sep, value = line.partition(":")
        key = key.strip().upper()
        if not sep:
            if key.endswith("_SECTION"):
                raise UnsupportedFormatError(f"seção {key} não suportada")
            raise TsplibParseError(f"linha sem 'CHAVE : valor': {line!r}", line_number)
        if key in HEADER_KEYWORDS:
            header[key] = value.strip()
        else:
            logger.debug(f"TSPLIB: palavra-chave ignorada {key}")

        if key == "EDGE_WEIGHT_TYPE" and header[key].upper() not in SUPPORTED_EDGE_WEIGHT_TYPES:
            raise UnsupportedFormatError(f"EDGE_WEIGHT_TYPE {header[key]} não suportado (apenas EUC_2D)")
        if key == "TYPE" and header[key].upper() != "TSP":
            raise UnsupportedFormatError(f"TYPE {header[key]} não suportado (apenas TSP)")

    if "EDGE_WEIGHT_TYPE" not in header:
        raise UnsupportedFormatError("EDGE_WEIGHT_TYPE ausente (apenas EUC_2D é suportado)")
    if not coords:
        raise TsplibParseError("NODE_COORD_SECTION ausente ou vazia")

    points = np.array(coords, dtype=np.float64)
    dimension = len(coords)
    if "DIMENSION" in header:
        try:
            dimension = int(header["DIMENSION"])
        except ValueError:
            raise TsplibParseError(f"DIMENSION inválida: {header['DIMENSION']!r}")
        if dimension != len(coords):
            raise TsplibParseError(f"DIMENSION {dimension} mas {len(coords)} coordenadas lidas")

    name = header.get("NAME", "")
    exact = cdist(points, points)
    rounded = np.floor(exact + 0.5)
    rounded.setflags(write=False)
    points.setflags(write=False)
    return TsplibInstance(
        name=name,
        dimension=dimension,
        coords=points,
        instance=Instance.from_coords(scale_to_unit_square(points), name=name),
        comment=header.get("COMMENT", ""),
        rounded_dist=rounded,
    )


def load_tsplib(path: Union[str, Path]) -> TsplibInstance:
    path = Path(path)
    parsed = parse_tsplib(path.read_text(encoding="utf-8", errors="replace"))
    if not parsed.name:
        parsed = replace(parsed, name=path.stem)
    logger.info(f"📄 TSPLIB {parsed.name}: {parsed.dimension} nós, ótimo conhecido {parsed.optimum}")
    return parsed
