from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    mode: Literal["exact", "double"] = Field("double", description="Arithmetic mode for loaded data")
    sum_tolerance: float = Field(1e-12, description="Normalization slack in double mode")
    independence_tolerance: float = Field(1e-10, description="Factorization slack in double mode")
    signaling_tolerance: float = Field(1e-9, description="Marginal-delta slack for theoretical datasets")
    fine_tolerance: float = Field(1e-9, description="Marginal reproduction slack for the Fine LP")
    significance_level: float = Field(0.01, gt=0, lt=1, description="Bonferroni-corrected level for empirical signaling")
    default_seed: int = Field(0, ge=0, lt=2**64)
    simulation_chunk_size: int = Field(65536, ge=2, description="Trials per RNG partition, even")
    simulation_workers: int = Field(1, ge=1)
    log_level: str = "WARNING"

    model_config = {"env_prefix": "BELLCP_", "env_file": ".env", "extra": "ignore"}


settings = Settings()
