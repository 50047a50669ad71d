"""
Configuration settings for the simulator
"""

from typing import Literal

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Market
    liquidity_b: float = 100.0
    endowment: float = 1000.0
    crowd_size: int = 100
    inactivity_threshold: int = 3
    collateral_fraction: float = 1.0
    price_clamp: float = 1e-12

    # Stabilization
    mode: Literal["instant", "ticked"] = "instant"
    tick_rate: float = 0.2
    convergence_epsilon: float = 1e-6
    max_ticks_per_round: int = 10_000

    # Agents
    epsilon: float = 1e-9
    trade_fraction: float = 0.5
    manipulation_distance: float = 0.2
    entry_order: Literal["random", "fifo"] = "random"

    # Numerics
    rational: bool = True

    # Rewards
    reward_pool: str = "100"
    reward_precision: str = "0.01"

    # Reports
    calibration_bucket_width: float = 0.05
    min_bucket_count: int = 30
    parallelism: int = 1

    # Logging
    log_level: str = "WARNING"
    log_format: Literal["json", "console"] = "json"

    model_config = SettingsConfigDict(
        env_prefix="ENTANGLE_",
        env_file=".env",
        case_sensitive=False,
    )


settings = Settings()
