from fastapi import APIRouter

from app.routes import benchmark, health, heuristics, oracle, policy


api_router = APIRouter()
api_router.include_router(oracle.router)
api_router.include_router(heuristics.router)
api_router.include_router(policy.router)
api_router.include_router(benchmark.router)
api_router.include_router(health.router, prefix="/health", tags=["health"])
