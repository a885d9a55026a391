"""
Hierarquia de exceções do motor 2-opt.

Os services levantam estas exceções; a camada HTTP (app/main.py) e a CLI
(app/cli.py) convertem para resposta/código de saída.
"""
from typing import Optional


class TourEngineError(Exception):
    """Erro base do domínio."""


class InvalidInputError(TourEngineError, ValueError):
    """Entrada fora do contrato (tamanho, permutação, movimento inválido)."""


class DegenerateInstanceError(TourEngineError):
    """Instância geometricamente degenerada (todos os nós coincidentes)."""


class InstanceTooLargeError(TourEngineError):
    """Instância maior que o limite configurado do oráculo."""

    def __init__(self, n: int, cap: int, solver: str):
        super().__init__(f"{solver}: n={n} excede o limite de {cap} nós")
        self.n = n
        self.cap = cap
        self.solver = solver


class OracleInconsistencyError(TourEngineError):
    """Custo abaixo do ótimo informado ou reconstrução divergente do DP."""


class ShapeError(TourEngineError, ValueError):
    """Formas incompatíveis numa operação de tensor."""


class NonFiniteError(TourEngineError, ArithmeticError):
    """Valor NaN/Inf produzido por uma operação."""


class NonFiniteLossError(NonFiniteError):
    """Perda não finita durante o treino."""


class TrainingDivergedError(TourEngineError):
    """Parâmetros divergiram (NaN/Inf) durante o treino."""

    def __init__(self, message: str, last_good_checkpoint: Optional[str] = None):
        super().__init__(message)
        self.last_good_checkpoint = last_good_checkpoint


class CheckpointError(TourEngineError):
    """Erro base de checkpoint."""


class CheckpointCorruptError(CheckpointError):
    """Arquivo truncado ou inválido."""


class CheckpointVersionError(CheckpointError):
    """Versão de formato não suportada."""


class TsplibError(TourEngineError):
    """Erro base de leitura TSPLIB."""


class TsplibParseError(TsplibError, ValueError):
    """Linha malformada no arquivo TSPLIB."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        prefix = f"linha {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")
        self.line_number = line_number


class UnsupportedFormatError(TsplibError):
    """EDGE_WEIGHT_TYPE ou TYPE não suportado."""
