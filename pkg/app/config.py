import os
from dataclasses import dataclass, replace
from typing import Optional

from dotenv import load_dotenv

from .errors import ConfigError
from .exact_arith import MAX_PRIME, is_prime

FORMATS = ("table", "json")


@dataclass(frozen=True)
class Config:
    p: int = 32003
    cap: int = 7
    max_cap: int = 10
    seed: int = 42
    window: Optional[int] = None
    max_trials: int = 50
    fmt: str = "table"
    seeds: int = 5
    workers: int = 4
    log_level: str = "WARNING"

    def __post_init__(self):
        if not is_prime(self.p) or self.p >= MAX_PRIME:
            raise ConfigError(f"p must be a prime below {MAX_PRIME}, got {self.p}")
        if self.cap < 2 or self.cap >= self.max_cap:
            raise ConfigError(f"need 2 <= cap < max_cap, got cap={self.cap} max_cap={self.max_cap}")
        if self.max_trials < 1 or self.seeds < 1 or self.workers < 1:
            raise ConfigError("max_trials, seeds and workers must be positive")
        if self.fmt not in FORMATS:
            raise ConfigError(f"unknown format {self.fmt!r}")

    @classmethod
    def from_env(cls) -> "Config":
        # .env подхватываем, но читаем только MCM_SEED
        load_dotenv()
        raw = os.getenv("MCM_SEED")
        if raw is None or raw.strip() == "":
            return cls()
        try:
            seed = int(raw)
        except ValueError:
            raise ConfigError(f"MCM_SEED is not an integer: {raw!r}")
        return cls(seed=seed)

    def with_overrides(self, **flags) -> "Config":
        """Копия с флагами CLI; None означает «не задано»."""
        changes = {k: v for k, v in flags.items() if v is not None}
        return replace(self, **changes)
