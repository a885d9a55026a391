"""
Registro da política servida pela API.

Carrega o checkpoint apontado por POLICY_CHECKPOINT no startup e mantém os
parâmetros em memória; os parâmetros não são alterados depois de carregados.
"""
import logging
import threading
from pathlib import Path
from typing import Dict, Optional, Union

from app.config.settings import settings
from app.models.network import ModelParams
from app.schemas.config import NetConfig
from app.services.checkpoint_service import load_checkpoint
from app.utils.errors import CheckpointError

logger = logging.getLogger(__name__)


class PolicyRegistry:
    """Política carregada (ou ausente) e o caminho de origem."""

    def __init__(self):
        self._lock = threading.Lock()
        self.params: Optional[ModelParams] = None
        self.config: Optional[NetConfig] = None
        self.path: Optional[Path] = None
        self.error: Optional[str] = None

    @property
    def is_loaded(self) -> bool:
        return self.params is not None

    def load(self, path: Union[str, Path]) -> ModelParams:
        path = Path(path)
        params, config = load_checkpoint(path)
        with self._lock:
            self.params, self.config, self.path, self.error = params, config, path, None
        logger.info(f"✅ Política carregada de {path} ({params.size} parâmetros)")
        return params

    def load_from_settings(self) -> None:
        """Sem checkpoint configurado a API sobe sem política; erros de leitura ficam em ``error``."""
        if not settings.POLICY_CHECKPOINT:
            logger.warning("⚠️ POLICY_CHECKPOINT não definido; /api/policy indisponível")
            return
        try:
            self.load(settings.POLICY_CHECKPOINT)
        except (CheckpointError, OSError) as exc:
            self.error = str(exc)
            logger.error(f"❌ Erro ao carregar política: {exc}")

    def unload(self) -> None:
        with self._lock:
            self.params = self.config = self.path = None

    def info(self) -> Dict[str, object]:
        if not self.is_loaded:
            return {"loaded": False, "error": self.error}
        return {
            "loaded": True,
            "path": str(self.path),
            "parameters": self.params.size,
            "config": self.config.model_dump(),
        }


policy_registry = PolicyRegistry()
