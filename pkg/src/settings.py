from __future__ import annotations

import os
from dataclasses import dataclass

from dotenv import load_dotenv

load_dotenv()

SOFTWARE_VERSION = "0.4.0"


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        return default


@dataclass(frozen=True)
class Settings:
    """Run-wide defaults; command-line flags take precedence over these."""

    n_max: int = 256
    n_jobs: int = 1
    log_level: str = "INFO"
    output_dir: str = "results"


def load_settings() -> Settings:
    return Settings(
        n_max=_env_int("RABI_NMAX", 256),
        n_jobs=_env_int("RABI_N_JOBS", 1),
        log_level=os.getenv("RABI_LOG_LEVEL", "INFO").upper(),
        output_dir=os.getenv("RABI_OUTPUT_DIR", "results"),
    )
