"""
Schemas de request/response da API HTTP.
"""
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator

from app.models.tsp import Instance
from app.schemas.config import CONSTRUCTION_METHODS, SearchRule


class InstanceIn(BaseModel):
    coords: List[List[float]] = Field(..., min_length=3, description="Coordenadas (x, y) em [0,1]²")
    name: str = Field("", max_length=120)

    @field_validator("coords")
    @classmethod
    def validate_pairs(cls, v):
        if any(len(point) != 2 for point in v):
            raise ValueError("cada coordenada precisa ter exatamente 2 valores")
        return v

    def to_instance(self) -> Instance:
        return Instance.from_coords(self.coords, name=self.name)


class TourOut(BaseModel):
    order: List[int]
    length: float

    @classmethod
    def from_tour(cls, tour) -> "TourOut":
        return cls(order=[int(v) for v in tour.order], length=tour.length)


class OracleRequest(BaseModel):
    instances: List[InstanceIn] = Field(..., min_length=1)
    solver: Literal["auto", "held-karp", "brute-force"] = Field(
        "auto", description="auto: força bruta até o limite dela, Held-Karp acima"
    )


class OracleResponse(BaseModel):
    tours: List[TourOut]
    mean_length: float


class ConstructRequest(BaseModel):
    instance: InstanceIn
    method: str = Field("farthest", description=f"Um de {', '.join(CONSTRUCTION_METHODS)}")
    seed: int = 0

    @field_validator("method")
    @classmethod
    def validate_method(cls, v):
        if v not in CONSTRUCTION_METHODS:
            raise ValueError(f"método desconhecido: {v}")
        return v


class LocalSearchRequest(BaseModel):
    instance: InstanceIn
    order: Optional[List[int]] = Field(None, description="Tour inicial; ausente = aleatório por seed")
    rule: SearchRule = SearchRule.BEST_IMPROVEMENT
    restarts: bool = False
    max_steps: int = Field(1000, ge=1)
    seed: int = 0


class LocalSearchResponse(BaseModel):
    initial: TourOut
    best: TourOut
    steps: int
    trace: List[float] = Field(description="Melhor comprimento após cada passo")


class PolicyImproveRequest(BaseModel):
    instances: List[InstanceIn] = Field(..., min_length=1)
    orders: Optional[List[List[int]]] = Field(None, description="Tours iniciais, um por instância")
    steps: int = Field(200, ge=1)
    mode: Literal["sample", "greedy"] = "sample"
    seed: int = 0

    @field_validator("orders")
    @classmethod
    def validate_orders(cls, v, info):
        instances = info.data.get("instances")
        if v is not None and instances is not None and len(v) != len(instances):
            raise ValueError(f"{len(v)} tours iniciais para {len(instances)} instâncias")
        return v


class PolicyImproveResult(BaseModel):
    initial_length: float
    best: TourOut
    found_at: int = Field(description="Passo (1-based) em que o melhor tour apareceu; 0 = inicial")


class PolicyImproveResponse(BaseModel):
    results: List[PolicyImproveResult]
    mean_length: float


class BenchmarkRequest(BaseModel):
    n: int = Field(20, ge=4)
    count: int = Field(16, ge=1)
    seed: int = 1234
    methods: List[str] = Field(default_factory=lambda: ["nearest", "random", "farthest"])
    steps: int = Field(200, ge=1)
