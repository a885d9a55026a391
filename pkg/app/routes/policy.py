"""
Endpoints da política treinada carregada no startup.
"""
import logging
from typing import Any, Dict

from fastapi import APIRouter, HTTPException, status

from app.routes.limits import check_batch, check_steps
from app.schemas.tsp import PolicyImproveRequest, PolicyImproveResponse, PolicyImproveResult, TourOut
from app.services.evaluation_service import evaluate_policy
from app.services.policy_registry import policy_registry
from app.services.tour_service import make_tour

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/policy", tags=["policy"])


@router.get("/info", summary="Política carregada")
def policy_info() -> Dict[str, Any]:
    return policy_registry.info()


@router.post("/improve", response_model=PolicyImproveResponse, summary="Melhora tours com a política")
def improve(request: PolicyImproveRequest) -> PolicyImproveResponse:
    """
    Executa ``steps`` movimentos 2-opt escolhidos pela política em cada
    instância e devolve o melhor tour visitado.
    """
    if not policy_registry.is_loaded:
        raise HTTPException(
            status_code=status.HTTP_503_SERVICE_UNAVAILABLE,
            detail="nenhuma política carregada (defina POLICY_CHECKPOINT)",
        )
    check_batch(len(request.instances))
    check_steps(request.steps)

    instances = [item.to_instance() for item in request.instances]
    starts = None
    if request.orders is not None:
        starts = [make_tour(inst, order) for inst, order in zip(instances, request.orders)]

    evaluation = evaluate_policy(
        policy_registry.params, instances, request.steps, request.mode, seed=request.seed, starts=starts
    )
    logger.info(f"✅ Política: {len(instances)} instâncias, {request.steps} passos, custo médio {evaluation.mean_cost:.4f}")
    results = [
        PolicyImproveResult(
            initial_length=float(evaluation.initial_costs[k]),
            best=TourOut.from_tour(evaluation.best_tours[k]),
            found_at=int(evaluation.found_at[k]),
        )
        for k in range(len(instances))
    ]
    return PolicyImproveResponse(results=results, mean_length=evaluation.mean_cost)
