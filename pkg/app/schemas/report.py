"""
Schemas de relatório: perdas do treino, linhas de benchmark e descritor de
conjunto de instâncias.
"""
import csv
import io
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, field_validator

CSV_COLUMNS = ["method", "mean_cost", "median_cost", "mean_gap_pct", "steps", "wallclock_s", "note"]


def format_number(value: Optional[float]) -> str:
    """Seis algarismos significativos; vazio para ausente."""
    return "" if value is None else "%.6g" % value


def _parse_number(text: str) -> Optional[float]:
    return float(text) if text.strip() else None


class LossReport(BaseModel):
    policy_term: float
    entropy_term: float
    value_term: float
    mean_advantage: float
    mean_return: float
    mean_entropy: float = Field(description="Entropia média por passo, já dividida por k")

    @property
    def total(self) -> float:
        return self.policy_term + self.entropy_term + self.value_term


class InstanceSetDescriptor(BaseModel):
    n: int = Field(ge=3)
    count: int = Field(ge=1)
    seed: int = 0
    name: str = ""

    def header(self) -> str:
        return f"# n={self.n},count={self.count},seed={self.seed},name={self.name}"

    @classmethod
    def from_header(cls, line: str) -> "InstanceSetDescriptor":
        fields: Dict[str, str] = {}
        for chunk in line.lstrip("#").strip().split(","):
            key, _, value = chunk.partition("=")
            fields[key.strip()] = value.strip()
        return cls(n=int(fields["n"]), count=int(fields["count"]), seed=int(fields.get("seed", 0)),
                   name=fields.get("name", ""))


class BenchmarkRow(BaseModel):
    method: str
    mean_cost: Optional[float] = None
    median_cost: Optional[float] = None
    mean_gap_pct: Optional[float] = Field(default=None, description="Média dos gaps por instância (%)")
    steps: Optional[int] = Field(default=None, description="Orçamento/uso médio de passos de melhoria")
    wallclock_s: float = 0.0
    note: str = ""

    @field_validator("mean_gap_pct")
    @classmethod
    def validate_gap(cls, v):
        if v is not None and v < 0:
            raise ValueError("gap negativo")
        return v

    @property
    def refused(self) -> bool:
        return self.mean_cost is None


class BenchmarkReport(BaseModel):
    instances: InstanceSetDescriptor
    rows: List[BenchmarkRow] = Field(default_factory=list)

    def row(self, method: str) -> BenchmarkRow:
        for row in self.rows:
            if row.method == method:
                return row
        raise KeyError(method)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        buffer.write(self.instances.header() + "\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow([
                row.method,
                format_number(row.mean_cost),
                format_number(row.median_cost),
                format_number(row.mean_gap_pct),
                "" if row.steps is None else str(row.steps),
                format_number(row.wallclock_s),
                row.note,
            ])
        return buffer.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "BenchmarkReport":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#"):
            raise ValueError("CSV de benchmark sem linha de cabeçalho '# n=...'")
        descriptor = InstanceSetDescriptor.from_header(lines[0])
        rows = []
        for record in csv.DictReader(io.StringIO("\n".join(lines[1:]))):
            rows.append(BenchmarkRow(
                method=record["method"],
                mean_cost=_parse_number(record["mean_cost"]),
                median_cost=_parse_number(record["median_cost"]),
                mean_gap_pct=_parse_number(record["mean_gap_pct"]),
                steps=int(record["steps"]) if record["steps"].strip() else None,
                wallclock_s=_parse_number(record["wallclock_s"]) or 0.0,
                note=record["note"],
            ))
        return cls(instances=descriptor, rows=rows)

    def to_table(self) -> str:
        """Tabela legível para o terminal."""
        header = f"{'Método':<22}{'Custo médio':>12}{'Mediana':>12}{'Gap %':>10}{'Passos':>8}{'Tempo (s)':>11}  Obs."
        lines = [
            "=" * 60,
            f"📊 n={self.instances.n}  instâncias={self.instances.count}  seed={self.instances.seed}",
            "=" * 60,
            header,
        ]
        for row in self.rows:
            lines.append(
                f"{row.method:<22}{format_number(row.mean_cost):>12}{format_number(row.median_cost):>12}"
                f"{format_number(row.mean_gap_pct):>10}{'' if row.steps is None else row.steps:>8}"
                f"{format_number(row.wallclock_s):>11}  {row.note}"
            )
        lines.append("=" * 60)
        return "\n".join(lines)
