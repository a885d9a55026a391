"""
Persistência binária de parâmetros ("O2RL").

Layout (little-endian):
    magic b"O2RL" | versão u32 | d u32 | L u32 | C f64 | flags u32 |
    nº de tensores u32 | por tensor: tamanho do nome u32, nome utf-8,
    rank u32, dims u32 × rank, valores f64.
"""
import logging
import os
import struct
import tempfile
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

from app.models.network import ModelParams
from app.nn.params import params_from_arrays
from app.schemas.config import NetConfig
from app.utils.errors import CheckpointCorruptError, CheckpointVersionError

logger = logging.getLogger(__name__)

MAGIC = b"O2RL"
FORMAT_VERSION = 1

FLAG_BITS = {
    "use_gcn": 1,
    "use_lstm": 2,
    "use_bidirectional": 4,
    "use_best_solution": 8,
    "share_encoders": 16,
}


def _encode_flags(config: NetConfig) -> int:
    return sum(bit for name, bit in FLAG_BITS.items() if getattr(config, name))


def encode_checkpoint(params: ModelParams) -> bytes:
    config = params.config
    chunks = [
        MAGIC,
        struct.pack("<I", FORMAT_VERSION),
        struct.pack("<IIdI", config.d, config.n_layers, config.clip, _encode_flags(config)),
        struct.pack("<I", len(params)),
    ]
    for name, tensor in params.tensors.items():
        raw_name = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(raw_name)))
        chunks.append(raw_name)
        chunks.append(struct.pack("<I", tensor.ndim))
        chunks.append(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
        chunks.append(np.ascontiguousarray(tensor.data, dtype="<f8").tobytes())
    return b"".join(chunks)


class _Reader:
    def __init__(self, payload: bytes):
        self.payload = payload
        self.offset = 0

    def take(self, size: int, what: str) -> bytes:
        end = self.offset + size
        if end > len(self.payload):
            raise CheckpointCorruptError(f"checkpoint truncado ao ler {what} (byte {self.offset})")
        chunk = self.payload[self.offset:end]
        self.offset = end
        return chunk

    def unpack(self, fmt: str, what: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def decode_checkpoint(payload: bytes) -> Tuple[ModelParams, NetConfig]:
    reader = _Reader(payload)
    if reader.take(4, "magic") != MAGIC:
        raise CheckpointCorruptError("assinatura inválida: não é um checkpoint O2RL")
    (version,) = reader.unpack("<I", "versão")
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(f"versão {version} não suportada (esperado {FORMAT_VERSION})")

    d, n_layers, clip, flags = reader.unpack("<IIdI", "configuração")
    try:
        config = NetConfig(
            d=d,
            n_layers=n_layers,
            clip=clip,
            **{name: bool(flags & bit) for name, bit in FLAG_BITS.items()},
        )
    except ValueError as exc:
        raise CheckpointCorruptError(f"bloco de configuração inválido: {exc}")

    (count,) = reader.unpack("<I", "contagem de tensores")
    arrays: Dict[str, np.ndarray] = {}
    for index in range(count):
        (name_length,) = reader.unpack("<I", f"tensor {index}")
        name = reader.take(name_length, f"nome do tensor {index}").decode("utf-8", errors="replace")
        (rank,) = reader.unpack("<I", f"rank de {name}")
        dims = reader.unpack(f"<{rank}I", f"dimensões de {name}")
        size = int(np.prod(dims)) if rank else 1
        raw = reader.take(8 * size, f"valores de {name}")
        arrays[name] = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(dims)

    if reader.offset != len(payload):
        raise CheckpointCorruptError(f"{len(payload) - reader.offset} bytes extras após os tensores")
    return params_from_arrays(config, arrays), config


def save_checkpoint(params: ModelParams, path: Union[str, Path]) -> Path:
    """Escrita atômica: arquivo temporário no mesmo diretório + rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = encode_checkpoint(params)
    handle, temp_name = tempfile.mkstemp(prefix=".ckpt-", dir=path.parent)
    try:
        with os.fdopen(handle, "wb") as temp:
            temp.write(payload)
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise
    logger.debug(f"Checkpoint salvo em {path} ({len(payload)} bytes)")
    return path


def load_checkpoint(path: Union[str, Path]) -> Tuple[ModelParams, NetConfig]:
    path = Path(path)
    if not path.exists():
        raise CheckpointCorruptError(f"checkpoint não encontrado: {path}")
    return decode_checkpoint(path.read_bytes())


def describe_checkpoint(path: Union[str, Path]) -> Dict[str, object]:
    """Resumo para ``inspect-ckpt`` e para a rota de informação da política."""
    params, config = load_checkpoint(path)
    return {
        "path": str(path),
        "format_version": FORMAT_VERSION,
        "config": config.model_dump(),
        "tensors": len(params),
        "parameters": params.size,
        "shapes": {name: list(t.shape) for name, t in params.tensors.items()},
    }
