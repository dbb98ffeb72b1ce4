from pathlib import Path
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent.parent


class TomofuseSettings(BaseSettings):
    """
    Toolkit settings configuration using Pydantic.
    Reads from TOMOFUSE_* environment variables and the .env file.
    """
    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s - %(levelname)s - %(message)s"

    # Parallelism (1 = deterministic single-threaded mode)
    THREADS: int = Field(default=1, ge=1)

    # Physical calibration: attenuation of water per length unit, pixel size in length units
    MU_WATER: float = Field(default=0.2, gt=0)
    PIXEL_SIZE: float = Field(default=0.1, gt=0)

    # Desk-scale scan defaults; the bin count follows from the image diagonal
    IMAGE_SIZE: int = Field(default=256, ge=1)
    NUM_VIEWS: int = Field(default=360, ge=1)
    BLANK_COUNT: float = Field(default=2e5, gt=0)
    LOW_DOSE_BLANK_COUNT: float = Field(default=1e4, gt=0)

    # Model registry; unset means model_registry.json next to the trained network
    MODEL_REGISTRY_PATH: Optional[Path] = None

    @field_validator("LOG_LEVEL")
    @classmethod
    def check_log_level(cls, v: str) -> str:
        level = v.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"Unknown log level: {v}")
        return level

    model_config = SettingsConfigDict(
        env_file=str(BASE_DIR / ".env"),
        env_prefix="TOMOFUSE_",
        case_sensitive=True,
        extra="ignore"
    )


settings = TomofuseSettings()
