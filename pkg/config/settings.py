from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-level settings for the simulator, CLI and evaluation service"""

    # Application
    app_name: str = "Cell-Free ISAC Simulator"
    debug: bool = False
    version: str = "1.0.0"

    # Parallelism - ISAC_THREADS caps the drop worker pool
    threads: int = Field(default=1, ge=1)

    # Logging
    log_level: str = "INFO"
    log_json: bool = False
    log_file: Optional[str] = None

    # Results
    output_dir: str = "results"

    # Evaluation service
    host: str = "0.0.0.0"
    port: int = 8000
    max_api_drops: int = 20
    max_api_trials: int = 20_000

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="ISAC_",
        case_sensitive=False,
        extra="ignore",
    )

    def __init__(self, **kwargs):
        super().__init__(**kwargs)

        # Debug runs always log verbosely
        if self.debug and self.log_level.upper() == "INFO":
            self.log_level = "DEBUG"


# Global settings instance
settings = Settings()
