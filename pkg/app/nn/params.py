"""
Criação dos parâmetros da rede com inicialização uniforme por fan-in.
"""
from __future__ import annotations

import logging
import math
from typing import Dict, Tuple

import numpy as np

from app.models.network import ENCODER_BEST, ENCODER_S, ModelParams
from app.nn.tensor import Tensor
from app.schemas.config import NetConfig
from app.utils.errors import CheckpointCorruptError

logger = logging.getLogger(__name__)


def parameter_shapes(config: NetConfig) -> Dict[str, Tuple[Tuple[int, ...], int]]:
    """Nome -> (forma, fan-in) na ordem fixa de criação."""
    d, half = config.d, config.d // 2
    shapes: Dict[str, Tuple[Tuple[int, ...], int]] = {}

    encoders = [ENCODER_S]
    if config.use_best_solution and not config.share_encoders:
        encoders.append(ENCODER_BEST)

    for prefix in encoders:
        shapes[f"{prefix}.W_x"] = ((d, 2), 2)
        shapes[f"{prefix}.b_x"] = ((d,), 2)
        if config.use_gcn:
            for layer in range(config.n_layers):
                shapes[f"{prefix}.gcn{layer}.W_g"] = ((d, d), d)
                shapes[f"{prefix}.gcn{layer}.b_g"] = ((d,), d)
        if config.use_lstm:
            directions = ["f", "b"] if config.use_bidirectional else ["f"]
            for direction in directions:
                cell = f"{prefix}.lstm_{direction}"
                shapes[f"{cell}.W_ih"] = ((4 * d, d), d)
                shapes[f"{cell}.W_hh"] = ((4 * d, d), d)
                shapes[f"{cell}.b_ih"] = ((4 * d,), d)
                shapes[f"{cell}.b_hh"] = ((4 * d,), d)
            for direction in directions:
                shapes[f"{prefix}.W_{direction}"] = ((d, d), d)
                shapes[f"{prefix}.b_{direction}"] = ((d,), d)

    shapes["dec.W_q"] = ((d, d), d)
    shapes["dec.b_q"] = ((d,), d)
    shapes["dec.W_o"] = ((d, d), d)
    shapes["dec.b_o"] = ((d,), d)
    shapes["dec.o0"] = ((d,), d)
    shapes["dec.W_s"] = ((half, d), d)
    shapes["dec.b_s"] = ((half,), d)
    shapes["dec.W_s2"] = ((half, d), d)
    shapes["dec.b_s2"] = ((half,), d)
    shapes["dec.K"] = ((d, d), d)
    shapes["dec.Q"] = ((d, d), d)
    shapes["dec.v"] = ((d,), d)

    shapes["val.W_z"] = ((d, d), d)
    shapes["val.b_z"] = ((d,), d)
    shapes["val.W_r"] = ((1, d), d)
    shapes["val.b_r"] = ((1,), d)
    shapes["val.W_v"] = ((half, d), d)
    shapes["val.b_v"] = ((half,), d)
    shapes["val.W_v2"] = ((half, d), d)
    shapes["val.b_v2"] = ((half,), d)
    return shapes


def init_params(config: NetConfig, seed: int) -> ModelParams:
    """U(−1/√fan_in, 1/√fan_in) para todo tensor; v e o₀ usam fan-in d."""
    rng = np.random.default_rng(seed)
    tensors = {}
    for name, (shape, fan_in) in parameter_shapes(config).items():
        bound = 1.0 / math.sqrt(fan_in)
        tensors[name] = Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True, name=name)

    params = ModelParams(config=config, tensors=tensors)
    logger.debug(f"Parâmetros iniciados: {len(params)} tensores, {params.size} valores (seed={seed})")
    return params


def params_from_arrays(config: NetConfig, arrays: Dict[str, np.ndarray]) -> ModelParams:
    """Monta ModelParams a partir de arrays nomeados, conferindo nomes e formas."""
    expected = parameter_shapes(config)
    missing = sorted(set(expected) - set(arrays))
    unknown = sorted(set(arrays) - set(expected))
    if missing or unknown:
        raise CheckpointCorruptError(f"tensores ausentes {missing[:3]} ou desconhecidos {unknown[:3]}")
    tensors = {}
    for name, (shape, _) in expected.items():
        data = np.asarray(arrays[name], dtype=np.float64)
        if data.shape != shape:
            raise CheckpointCorruptError(f"{name}: forma {data.shape}, esperado {shape}")
        tensors[name] = Tensor(data, requires_grad=True, name=name)
    return ModelParams(config=config, tensors=tensors)
