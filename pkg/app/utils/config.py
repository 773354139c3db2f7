import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Optional, TextIO, Tuple

from app.utils.errors import ArgumentError

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


def _parse_seeds(raw: str) -> Tuple[int, ...]:
    """
    Parse a seed specification such as "1-32" or "3,5,7" or "1-4,9".

    Args:
        raw (str): Seed specification

    Returns:
        Tuple[int, ...]: Seeds in the order given
    """
    seeds = []
    for chunk in raw.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "-" in chunk:
            low, high = chunk.split("-", 1)
            seeds.extend(range(int(low), int(high) + 1))
        else:
            seeds.append(int(chunk))
    if not seeds:
        raise ArgumentError(f"Empty seed specification: {raw!r}")
    return tuple(seeds)


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or value == "":
        return default
    try:
        return int(value)
    except ValueError:
        raise ArgumentError(f"{name} must be an integer, got {value!r}")


@dataclass(frozen=True)
class Settings:
    log_level: str = "INFO"
    brute_force_edge_cap: int = 24
    exhaustive_n_max_cap: int = 8
    canonical_n_cap: int = 10
    merge_search_n_cap: int = 7
    sample_seeds: Tuple[int, ...] = field(default_factory=lambda: tuple(range(1, 33)))
    generation_attempts: int = 16
    jobs: int = 1
    host: str = "127.0.0.1"
    port: int = 8080
    debug: bool = True

    @classmethod
    def from_env(cls) -> "Settings":
        """
        Build settings from environment variables (after load_dotenv).

        Returns:
            Settings: Settings with environment overrides applied
        """
        return cls(
            log_level=os.getenv("LOG_LEVEL", "INFO").upper(),
            brute_force_edge_cap=_env_int("BRUTE_FORCE_EDGE_CAP", 24),
            exhaustive_n_max_cap=_env_int("EXHAUSTIVE_N_MAX_CAP", 8),
            canonical_n_cap=_env_int("CANONICAL_N_CAP", 10),
            merge_search_n_cap=_env_int("MERGE_SEARCH_N_CAP", 7),
            sample_seeds=_parse_seeds(os.getenv("SAMPLE_SEEDS", "1-32")),
            generation_attempts=_env_int("GENERATION_ATTEMPTS", 16),
            jobs=_env_int("JOBS", 1),
            host=os.getenv("HOST", "127.0.0.1"),
            port=_env_int("PORT", 8080),
            debug=os.getenv("DEBUG", "True").lower() == "true",
        )


def configure_logging(level: str = "INFO", stream: Optional[TextIO] = None) -> None:
    """Configure root logging the same way for every entry point."""
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format=LOG_FORMAT,
        handlers=[
            logging.StreamHandler(stream or sys.stdout),
        ],
        force=True,
    )
