from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    APP_NAME: str = Field(default="2-opt DRL Engine")
    APP_VERSION: str = Field(default="1.0.0")
    DEBUG: bool = Field(default=False)
    ENVIRONMENT: str = Field(default="development")
    LOG_LEVEL: str = Field(default="INFO")

    # Server
    HOST: str = Field(default="0.0.0.0")
    PORT: int = Field(default=8000)
    CORS_ORIGINS: str = Field(default="*")

    # Execução
    SEED: int = Field(default=1234)
    THREADS: int = Field(default=1, ge=1)
    OUT_DIR: str = Field(default="runs")

    # Oráculo
    ORACLE_MAX_NODES: int = Field(default=20, ge=4)
    BRUTE_FORCE_MAX_NODES: int = Field(default=10, ge=4)

    # Política servida pela API
    POLICY_CHECKPOINT: Optional[str] = Field(default=None)
    API_MAX_INSTANCES: int = Field(default=256, ge=1)
    API_MAX_STEPS: int = Field(default=2000, ge=1)

    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )


settings = Settings()
