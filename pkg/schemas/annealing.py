from typing import List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from settings import SA_WORKERS


class SaConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_sweep: int = Field(default=1000, ge=1)
    n_runs: int = Field(default=100, ge=1)
    t_final_ratio: float = Field(default=0.01, gt=0.0, le=1.0)
    seed: Optional[int] = Field(default=None, ge=0)
    zero_temperature: bool = False
    # one shared start, or one start per run
    initial_state: Optional[Union[List[int], List[List[int]]]] = None
    workers: int = Field(default=SA_WORKERS, ge=1)

    @field_validator("initial_state")
    @classmethod
    def _spins_only(cls, value):
        if value is None:
            return value
        flat = [v for row in value for v in row] if value and isinstance(value[0], list) else value
        if any(v not in (1, -1) for v in flat):
            raise ValueError("initial_state entries must be +1 or -1")
        return value


class SaResultSchema(BaseModel):
    best_energy: float
    best_bitstring: str
    per_run: List[dict]
    acceptance_rate: float
    sweep_count_executed: int
    modeled_cpu_seconds: float
    measured_seconds: float
