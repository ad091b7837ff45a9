"""Configuration settings for qrw-cocycles."""

import os
from dataclasses import dataclass, field
from pathlib import Path

from dotenv import load_dotenv


def _find_and_load_dotenv() -> None:
    """Find and load .env file from multiple possible locations."""
    # Possible locations for .env file:
    # 1. In ~/.config/qrw-cocycles/
    # 2. In user's home directory
    # 3. Current working directory (development)
    possible_paths = [
        Path.home() / ".config" / "qrw-cocycles" / ".env",
        Path.home() / ".qrw-cocycles.env",
        Path.cwd() / ".env",
    ]

    for env_path in possible_paths:
        if env_path.exists():
            load_dotenv(env_path)
            return

    # Fall back to default load_dotenv behavior
    load_dotenv()


# Load environment variables from .env file
_find_and_load_dotenv()


def _get_log_level() -> str:
    """Get log level from environment variable.

    Valid values: DEBUG, INFO, WARNING, ERROR, CRITICAL
    Default: INFO
    """
    level = os.getenv("LOG_LEVEL", "INFO").upper()
    valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
    if level not in valid_levels:
        return "INFO"
    return level


def _get_positive_int(env_var: str, default: int) -> int:
    """Read a positive integer from the environment, falling back to default."""
    raw = os.getenv(env_var)
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        return default
    return value if value > 0 else default


def _get_threads() -> int:
    """Get the harness parallelism cap from QWC_THREADS.

    Default: 1 (serial evaluation).
    """
    return _get_positive_int("QWC_THREADS", 1)


def _get_toyfock_cap() -> int:
    """Get the largest toy Fock matrix dimension from QWC_TOYFOCK_CAP."""
    return _get_positive_int("QWC_TOYFOCK_CAP", 20_000)


def _get_tolerance() -> float:
    """Get the default structure tolerance from QWC_TOLERANCE.

    Must parse as a positive float; otherwise 1e-10.
    """
    raw = os.getenv("QWC_TOLERANCE")
    if not raw:
        return 1e-10
    try:
        value = float(raw)
    except ValueError:
        return 1e-10
    return value if value > 0 else 1e-10


@dataclass
class Config:
    """Application configuration."""

    # Logging
    log_level: str = field(default_factory=_get_log_level)

    # Harness
    threads: int = field(default_factory=_get_threads)
    order_window: int = 4

    # Toy Fock space
    toyfock_cap: int = field(default_factory=_get_toyfock_cap)

    # Structure checks
    tolerance: float = field(default_factory=_get_tolerance)
    bisection_tolerance: float = 1e-10

    # Matrix functions
    hermitian_tolerance: float = 1e-10

    # Principal logarithm of unitaries: eigenphases this close below 2*pi wrap to 0
    phase_wrap: float = 1e-9

    # e_a / e_b: continuity value below the first, Taylor band below the second
    scalar_zero_threshold: float = 1e-6
    scalar_taylor_threshold: float = 1e-3


# Global config instance
config = Config()
