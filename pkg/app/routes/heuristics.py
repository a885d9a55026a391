"""
Endpoints das heurísticas construtivas e da busca local 2-opt.
"""
import numpy as np
from fastapi import APIRouter

from app.routes.limits import check_steps
from app.schemas.config import LocalSearchConfig
from app.schemas.tsp import ConstructRequest, LocalSearchRequest, LocalSearchResponse, TourOut
from app.services.heuristics_service import construct, local_search_2opt
from app.services.tour_service import make_tour, random_tour

router = APIRouter(prefix="/heuristics", tags=["heuristics"])


@router.post("/construct", response_model=TourOut, summary="Heurística de inserção")
def construct_tour(request: ConstructRequest) -> TourOut:
    """Nearest, random ou farthest insertion; ``seed`` só afeta random."""
    tour = construct(request.instance.to_instance(), request.method, request.seed)
    return TourOut.from_tour(tour)


@router.post("/local-search", response_model=LocalSearchResponse, summary="Busca local 2-opt")
def run_local_search(request: LocalSearchRequest) -> LocalSearchResponse:
    check_steps(request.max_steps)
    instance = request.instance.to_instance()
    if request.order is not None:
        start = make_tour(instance, request.order)
    else:
        start = random_tour(instance, np.random.default_rng(request.seed))
    config = LocalSearchConfig(
        rule=request.rule, restarts=request.restarts, max_steps=request.max_steps, rng_seed=request.seed
    )
    best, steps, trace = local_search_2opt(instance, start, config)
    return LocalSearchResponse(
        initial=TourOut.from_tour(start),
        best=TourOut.from_tour(best),
        steps=steps,
        trace=trace,
    )
