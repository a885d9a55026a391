"""
Verificação de gradientes por diferenças centrais.
"""
from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np

from app.nn.tensor import Tape, Tensor, backward


def gradient_check(
    fn: Callable[[], Tensor],
    leaves: Sequence[Tensor],
    eps: float = 1e-5,
    max_entries: Optional[int] = None,
    seed: int = 0,
) -> float:
    """
    Maior erro relativo |a - n| / max(|a|, |n|, 1e-8) entre o gradiente
    analítico e o numérico.

    ``fn`` recomputa a perda escalar a partir dos valores atuais das folhas.
    Com ``max_entries`` cada folha é amostrada em até esse número de posições.
    """
    rng = np.random.default_rng(seed)
    with Tape():
        loss = fn()
        analytic = backward(loss, list(leaves))

    worst = 0.0
    for leaf, grad in zip(leaves, analytic):
        flat = leaf.data.reshape(-1)
        positions = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            positions = rng.choice(flat.size, size=max_entries, replace=False)
        for k in positions:
            original = flat[k]
            flat[k] = original + eps
            plus = float(fn().data)
            flat[k] = original - eps
            minus = float(fn().data)
            flat[k] = original
            numeric = (plus - minus) / (2.0 * eps)
            exact = float(grad.reshape(-1)[k])
            error = abs(exact - numeric) / max(abs(exact), abs(numeric), 1e-8)
            worst = max(worst, error)
    return worst
