"""Configuration management for the boxmso engine."""

from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict

from boxmso.core.errors import BudgetExceededError


class Settings(BaseSettings):
    """Engine settings loaded from environment variables (prefix ``BOXMSO_``)."""

    # App Info
    app_name: str = "boxmso"
    app_version: str = "0.1.0"

    # Enumeration and table limits
    budget: int = 2**20
    max_rank: int = 3
    max_arity: int = 6
    max_labels: int = 16

    # Execution
    threads: int = 1
    default_epsilon: str = "1/4"

    # Logging
    log_level: str = "WARNING"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="BOXMSO_",
        case_sensitive=False,
    )

    @property
    def epsilon(self) -> Fraction:
        """Default accuracy as an exact rational."""
        return Fraction(self.default_epsilon)


@dataclass(frozen=True)
class Limits:
    """The limits a single run is held to."""

    budget: int = 2**20
    max_rank: int = 3
    max_arity: int = 6
    max_labels: int = 16

    @classmethod
    def from_settings(cls, settings: Settings, budget: int | None = None) -> "Limits":
        limits = cls(
            budget=settings.budget,
            max_rank=settings.max_rank,
            max_arity=settings.max_arity,
            max_labels=settings.max_labels,
        )
        if budget is not None:
            limits = replace(limits, budget=budget)
        return limits

    def check_context(self, rank: int, arity: int, labels: int) -> None:
        """Refuse type contexts outside the configured limits."""
        if rank > self.max_rank:
            raise BudgetExceededError(
                f"quantifier rank {rank} exceeds the limit {self.max_rank}", limit="max_rank"
            )
        if arity > self.max_arity:
            raise BudgetExceededError(
                f"{arity} free variables exceed the limit {self.max_arity}", limit="max_arity"
            )
        if labels > self.max_labels:
            raise BudgetExceededError(
                f"{labels} expression labels exceed the limit {self.max_labels}", limit="max_labels"
            )


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


settings = get_settings()
