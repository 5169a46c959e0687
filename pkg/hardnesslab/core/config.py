from pathlib import Path
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # App
    APP_NAME: str = "hardnesslab"
    DEBUG: bool = False

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[Path] = None

    # Monte Carlo
    DEFAULT_SEED: int = 0
    WORKERS: int = 1
    # chunk length is part of the RNG contract; changing it changes every MC number
    CHUNK_SIZE: int = 4096

    # Storage
    DATA_DIR: Path = Path("data")
    REPORT_DIR: Path = Path("reports")

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="LAB_",
        case_sensitive=True,
        extra="ignore",
    )


settings = Settings()
