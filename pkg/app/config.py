"""Application configuration using pydantic-settings."""

from functools import lru_cache
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
        protected_namespaces=(),
    )

    # Data files (packaged defaults when unset)
    map_file: Path | None = None
    initializations_file: Path | None = None
    templates_file: Path | None = None

    # Trained model served by the API
    model_path: Path | None = None

    # Featurization
    feature_dim: int = 2048

    # Loss settings
    goal_alpha: float = 0.5
    anneal_k: float = 10.0
    anneal_mid: float = 0.5

    # Training defaults (constraints / goals)
    constraint_epochs: int = 10
    constraint_batch_size: int = 16
    constraint_learning_rate: float = 0.01
    goal_epochs: int = 25
    goal_batch_size: int = 8
    goal_learning_rate: float = 0.01
    momentum: float = 0.0

    # Evaluation
    folds: int = 10

    # Corpus generation and augmentation
    generation_retry_budget: int = 200
    min_edit_distance_ratio: float = 0.15

    # Randomness
    seed: int = 0

    # Logging
    log_level: str = "INFO"

    # API Settings
    api_host: str = "0.0.0.0"
    api_port: int = 8000

    # Application Info
    app_name: str = "Strategic Intent Translator"
    app_version: str = "0.1.0"


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
