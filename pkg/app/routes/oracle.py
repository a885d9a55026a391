"""
Endpoints do oráculo exato.
"""
import logging

import numpy as np
from fastapi import APIRouter, HTTPException, status

from app.config.settings import settings
from app.routes.limits import check_batch
from app.schemas.tsp import OracleRequest, OracleResponse, TourOut
from app.services.oracle_service import brute_force, held_karp, solve

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/oracle", tags=["oracle"])

SOLVERS = {"auto": solve, "held-karp": held_karp, "brute-force": brute_force}


@router.post("/solve", response_model=OracleResponse, summary="Tour ótimo exato")
def solve_instances(request: OracleRequest) -> OracleResponse:
    """
    Resolve cada instância com força bruta ou Held-Karp.

    Instâncias acima de ORACLE_MAX_NODES (ou BRUTE_FORCE_MAX_NODES para
    força bruta) são recusadas com 413.
    """
    check_batch(len(request.instances))
    instances = [item.to_instance() for item in request.instances]
    largest = max(inst.n for inst in instances)
    if largest > settings.ORACLE_MAX_NODES:
        raise HTTPException(
            status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE,
            detail=f"n={largest} excede o limite do oráculo ({settings.ORACLE_MAX_NODES})",
        )
    solver = SOLVERS[request.solver]
    tours = [solver(inst)[0] for inst in instances]
    logger.info(f"✅ Oráculo ({request.solver}): {len(tours)} instâncias resolvidas")
    return OracleResponse(
        tours=[TourOut.from_tour(tour) for tour in tours],
        mean_length=float(np.mean([tour.length for tour in tours])),
    )
