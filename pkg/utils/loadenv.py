import os
from typing import Literal

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()


class RuntimeSettings(BaseSettings):
    """Process-level settings; configs carry everything that affects results."""
    model_config = SettingsConfigDict(env_prefix="FEDGAME_", env_file=".env", extra="ignore")

    verbosity: Literal["quiet", "info", "debug"] = "info"


def get_settings() -> RuntimeSettings:
    return RuntimeSettings()


def _sanitize_path(path: str) -> str:
    # Strip surrounding quotes and normalize
    cleaned = path.strip().strip('"').strip("'")
    cleaned = os.path.expandvars(os.path.expanduser(cleaned))
    return os.path.abspath(os.path.normpath(cleaned))
