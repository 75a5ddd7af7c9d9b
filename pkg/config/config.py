"""
config.py

This module centralizes runtime configuration for the simulator.

It uses pydantic-settings to load settings from environment variables or a .env file,
providing a single, type-hinted source of truth for process-level values such as
log destinations, the output root and the worker pool size. Experiment physics and
learning hyperparameters live in the YAML files under config/experiments and are
validated by sarsched.params.
"""

from pathlib import Path
from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import load_dotenv

# Path(__file__).parent.parent is the project root, so the .env lookup does not
# depend on the working directory the CLI is started from.
PROJECT_ROOT = Path(__file__).parent.parent
env_path = PROJECT_ROOT / ".env"

if env_path.exists():
    load_dotenv(dotenv_path=env_path)


class Settings(BaseSettings):
    """
    Defines the process-level settings.
    Pydantic reads these from environment variables (case-insensitive)
    which were loaded by load_dotenv().
    """
    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore")

    # Logging destinations and verbosity.
    LOG_LEVEL: str = "INFO"
    LOG_DIR: str = str(PROJECT_ROOT / "logs")
    LOG_TO_FILE: bool = False
    LOG_JSON: bool = False

    # Where run directories are created when --out is not given.
    OUTPUT_ROOT: str = str(PROJECT_ROOT / "runs")

    # Process pool size for sweeps and equal-aperture grid searches; 1 runs inline.
    WORKERS: int = 1

    DEFAULT_EXPERIMENT: str = str(PROJECT_ROOT / "config" / "experiments" / "desk.yaml")


# Create a single, globally-accessible instance of the settings.
settings = Settings()
