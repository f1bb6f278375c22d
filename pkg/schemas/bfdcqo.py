from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from settings import DEFAULT_EFFECTIVE_ANGLE, DEFAULT_TRANSVERSE_FIELD, SA_WORKERS


class BfDcqoConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_iter: int = Field(default=1, ge=0)
    n_shots: int = Field(default=2000, ge=1)
    n_cvar: int = Field(default=100, ge=1)
    n_trot: int = Field(default=1, ge=1)
    n_sweep_pre: int = Field(default=1000, ge=0)
    n_runs_pre: int = Field(default=100, ge=1)
    n_sweep_post: int = Field(default=10, ge=0)
    effective_angle: float = DEFAULT_EFFECTIVE_ANGLE
    transverse_field: float = DEFAULT_TRANSVERSE_FIELD
    bias_sign: int = -1
    bitflip_prob: float = Field(default=0.0, ge=0.0, le=0.5)
    seed: Optional[int] = Field(default=None, ge=0)
    workers: int = Field(default=SA_WORKERS, ge=1)

    @field_validator("bias_sign")
    @classmethod
    def _unit_sign(cls, value: int) -> int:
        if value not in (1, -1):
            raise ValueError("bias_sign must be +1 or -1")
        return value

    @field_validator("transverse_field")
    @classmethod
    def _nonzero_field(cls, value: float) -> float:
        if value == 0.0:
            raise ValueError("transverse_field must be nonzero")
        return value

    @model_validator(mode="after")
    def _cvar_within_shots(self) -> "BfDcqoConfig":
        if self.n_cvar > self.n_shots:
            raise ValueError(f"n_cvar ({self.n_cvar}) cannot exceed n_shots ({self.n_shots})")
        return self


class RuntimeEstimate(BaseModel):
    cpu_seconds: float
    qpu_seconds: float
    total_seconds: float


class BfDcqoRunRequest(BaseModel):
    instance: Dict[str, Any]
    layout: Optional[Dict[str, Any]] = None
    config: BfDcqoConfig = BfDcqoConfig()


class IterationSchema(BaseModel):
    iteration: int
    best_energy: float
    iteration_best: float
    bias_field: List[float]
    shot_summary: Dict[str, Any]


class BfDcqoResultSchema(BaseModel):
    best_energy: float
    best_bitstring: str
    pre_energy: Optional[float] = None
    iterations: List[IterationSchema]
    modeled_cpu_seconds: float
    modeled_qpu_seconds: float
    modeled_total_seconds: float
    measured_seconds: float
    program: Dict[str, int] = {}
    config: Dict[str, Any] = {}
