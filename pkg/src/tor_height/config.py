from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from tor_height.exceptions import ConfigurationError

_FIELDS = (
    "precision_bits",
    "max_precision_bits",
    "theta_cap",
    "theta_sum_cap",
    "trial_division_bound",
    "scan_effort",
    "max_modulus_bits",
    "max_point_count_prime",
    "lnum_constant",
    "constant_exponent",
    "threads",
    "log_level",
)


class EnvConfig(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="TORHEIGHT_", case_sensitive=False, env_file=".env", extra="ignore"
    )

    precision_bits: Optional[int] = None
    max_precision_bits: Optional[int] = None
    theta_cap: Optional[int] = None
    theta_sum_cap: Optional[int] = None
    trial_division_bound: Optional[int] = None
    scan_effort: Optional[int] = None
    max_modulus_bits: Optional[int] = None
    max_point_count_prime: Optional[int] = None
    lnum_constant: Optional[float] = None
    constant_exponent: Optional[int] = None
    threads: Optional[int] = None
    log_level: Optional[str] = None


class FileConfig(BaseModel):
    precision_bits: Optional[int] = None
    max_precision_bits: Optional[int] = None
    theta_cap: Optional[int] = None
    theta_sum_cap: Optional[int] = None
    trial_division_bound: Optional[int] = None
    scan_effort: Optional[int] = None
    max_modulus_bits: Optional[int] = None
    max_point_count_prime: Optional[int] = None
    lnum_constant: Optional[float] = None
    constant_exponent: Optional[int] = None
    threads: Optional[int] = None
    log_level: Optional[str] = None


class RuntimeConfig(BaseModel):
    precision_bits: int = Field(128, ge=64, description="Default working precision in bits")
    max_precision_bits: int = Field(1 << 16, ge=64, description="Cap for precision doubling")
    theta_cap: int = Field(10**6, ge=0, description="Largest n whose primorial is materialised")
    theta_sum_cap: int = Field(10**7, ge=0, description="Largest n for which theta is summed")
    trial_division_bound: int = Field(10**7, ge=2, description="Trial division bound for N_ell")
    scan_effort: int = Field(10**6, ge=1, description="Candidates scanned in a progression")
    max_modulus_bits: int = Field(4096, ge=8, description="Bit cap for the congruence modulus")
    max_point_count_prime: int = Field(10**7, ge=5, description="Largest p counted by Legendre sums")
    lnum_constant: float = Field(2.4e11, gt=0, description="Constant in the log N_ell bound")
    constant_exponent: int = Field(21, description="Power of ten in the main height bound")
    threads: int = Field(1, ge=1, description="Worker count for verification suites")
    log_level: str = Field("WARNING", description="Logging level for stderr output")

    @field_validator("constant_exponent")
    @classmethod
    def _known_exponent(cls, value: int) -> int:
        if value not in (21, 31):
            raise ValueError("constant_exponent must be 21 or 31")
        return value

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        value = value.upper()
        if value not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level {value}")
        return value


DEFAULT_CONFIG_PATH = Path.cwd() / ".torheight.yml"
LOCAL_CONFIG_PATH = Path.cwd() / ".torheight.local.yml"


def load_file_config(path: Path = DEFAULT_CONFIG_PATH) -> FileConfig:
    if not path.exists():
        return FileConfig()

    data = yaml.safe_load(path.read_text()) or {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"Config file {path} must contain a mapping.")
    try:
        return FileConfig(**data)
    except ValidationError as exc:
        raise ConfigurationError(f"Invalid config file {path}: {exc}") from exc


def load_runtime_config(path: Path = DEFAULT_CONFIG_PATH, **overrides: Any) -> RuntimeConfig:
    """Load configuration with priority: overrides > env vars > local file > main file."""
    file_config = load_file_config(path)

    local_path = path.parent / ".torheight.local.yml" if path != DEFAULT_CONFIG_PATH else LOCAL_CONFIG_PATH
    local_config = load_file_config(local_path)

    try:
        env_config = EnvConfig()
    except ValidationError as exc:
        raise ConfigurationError(f"Invalid TORHEIGHT_ environment value: {exc}") from exc

    merged: Dict[str, Any] = {}
    for name in _FIELDS:
        for source in (overrides.get(name), getattr(env_config, name),
                       getattr(local_config, name), getattr(file_config, name)):
            if source is not None:
                merged[name] = source
                break

    try:
        return RuntimeConfig(**merged)
    except ValidationError as exc:
        raise ConfigurationError(f"Invalid configuration: {exc}") from exc


def write_default_config(path: Path = DEFAULT_CONFIG_PATH) -> Path:
    if path.exists():
        return path

    path.write_text(resources.files("tor_height").joinpath("sample_config.yml").read_text())
    return path
