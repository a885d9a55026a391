"""
Endpoint de benchmark em instâncias uniformes geradas por seed.
"""
from fastapi import APIRouter, HTTPException, status

from app.routes.limits import check_batch, check_steps
from app.schemas.config import POLICY_PREFIX, BenchmarkConfig
from app.schemas.report import BenchmarkReport
from app.schemas.tsp import BenchmarkRequest
from app.services.benchmark_service import run_benchmark

router = APIRouter(prefix="/benchmark", tags=["benchmark"])


@router.post("/run", response_model=BenchmarkReport, summary="Compara métodos")
def run(request: BenchmarkRequest) -> BenchmarkReport:
    """Políticas por caminho de checkpoint não são aceitas pela API."""
    check_batch(request.count)
    check_steps(request.steps)
    if any(method.startswith(POLICY_PREFIX) for method in request.methods):
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail="métodos 'policy:' não são aceitos pela API")
    config = BenchmarkConfig(
        n=request.n, count=request.count, seed=request.seed, methods=request.methods, steps=request.steps
    )
    return run_benchmark(config)
