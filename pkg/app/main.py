from fastapi import FastAPI, Request, status
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from contextlib import asynccontextmanager
import logging

from app.config.settings import settings
from app.routes import api_router
from app.routes.health import router as health_router
from app.services.policy_registry import policy_registry
from app.utils.errors import DegenerateInstanceError, InstanceTooLargeError, InvalidInputError, TourEngineError

# Configurar logging
logging.basicConfig(level=settings.LOG_LEVEL)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """
    Carrega a política configurada ao subir a API e a descarta ao desligar
    """
    logger.info("🚀 Iniciando aplicação...")
    policy_registry.load_from_settings()

    yield

    logger.info("🛑 Desligando aplicação...")
    policy_registry.unload()


app = FastAPI(
    title=settings.APP_NAME,
    version=settings.APP_VERSION,
    lifespan=lifespan
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.CORS_ORIGINS.split(",") if settings.CORS_ORIGINS and settings.CORS_ORIGINS != "*" else ["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.exception_handler(TourEngineError)
async def tour_engine_error_handler(request: Request, exc: TourEngineError) -> JSONResponse:
    """Erros de domínio viram 422 (entrada), 413 (tamanho) ou 500."""
    if isinstance(exc, InstanceTooLargeError):
        code = status.HTTP_413_REQUEST_ENTITY_TOO_LARGE
    elif isinstance(exc, (InvalidInputError, DegenerateInstanceError)):
        code = status.HTTP_422_UNPROCESSABLE_ENTITY
    else:
        code = status.HTTP_500_INTERNAL_SERVER_ERROR
        logger.error(f"❌ {type(exc).__name__} em {request.url.path}: {exc}")
    return JSONResponse(status_code=code, content={"detail": str(exc), "error": type(exc).__name__})


app.include_router(api_router, prefix="/api")

# Health check na raiz (para K8s/Docker)
app.include_router(health_router, prefix="/health", tags=["health"])
