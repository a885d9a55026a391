"""
Limites de tamanho das requisições.
"""
from fastapi import HTTPException, status

from app.config.settings import settings


def check_batch(count: int) -> None:
    if count > settings.API_MAX_INSTANCES:
        raise HTTPException(
            status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE,
            detail=f"{count} instâncias excede o limite de {settings.API_MAX_INSTANCES}",
        )


def check_steps(steps: int) -> None:
    if steps > settings.API_MAX_STEPS:
        raise HTTPException(
            status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE,
            detail=f"{steps} passos excede o limite de {settings.API_MAX_STEPS}",
        )
