"""
Configuration settings for the pipeline
"""
from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class Settings(BaseSettings):
    """Process-wide settings loaded from environment variables"""

    model_config = SettingsConfigDict(env_file=".env", case_sensitive=True, extra="ignore")

    # Application Configuration
    APP_ENV: str = "development"
    LOG_LEVEL: str = "INFO"
    LOG_DIR: str = "logs"
    LOG_RETENTION_DAYS: int = 30
    LOG_TO_FILE: bool = True

    # Pipeline Defaults
    DEFAULT_SEED: int = 42
    DEFAULT_CONNECTIVITY: int = 26
    THICKNESS_ANGULAR_STEP: float = 1.0  # degrees
    N_CLASSES: int = 5
    N_JOBS: int = 1

    # Volume Format
    VOLUME_MAGIC: str = "CQV1"
    MANIFEST_FILENAME: str = "manifest.csv"


# Global settings instance
settings = Settings()
