from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from schemas.annealing import SaConfig
from schemas.bfdcqo import BfDcqoConfig

SolverName = Literal["sa", "bfdcqo", "cplex", "sa_cplex"]


class GeneratorConfig(BaseModel):
    """Heavy-hex layout generator plus coefficient distribution."""
    model_config = ConfigDict(frozen=True)

    topology: Literal["patch", "heavy_hex", "heron"] = "patch"
    rows: int = Field(default=1, ge=1)
    cols: int = Field(default=1, ge=1)
    full_lines: bool = False
    n: int = Field(default=1, ge=1)
    s2q: int = Field(default=1, ge=0)
    s3q: int = Field(default=2, ge=0)
    distribution: Literal["cauchy", "pareto", "constant"] = "cauchy"
    alpha: float = Field(default=2.0, gt=0.0)
    truncation: Optional[float] = Field(default=None, gt=0.0)
    value: float = 1.0


class SuiteConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str = "suite"
    master_seed: int = Field(default=0, ge=0)
    generator: GeneratorConfig = GeneratorConfig()
    sizes: List[int] = Field(default_factory=lambda: [14])
    instances_per_size: int = Field(default=1, ge=1)
    solvers: List[SolverName] = Field(default_factory=lambda: ["sa"])
    sa: SaConfig = SaConfig()
    bfdcqo: BfDcqoConfig = BfDcqoConfig()
    targets: List[float] = Field(default_factory=lambda: [0.99])
    reference_solver: SolverName = "cplex"
    cplex_traces: Dict[str, str] = Field(default_factory=dict)
    sa_cplex_traces: Dict[str, str] = Field(default_factory=dict)
    optima: Dict[str, float] = Field(default_factory=dict)
    poll_interval: Optional[float] = Field(default=None, gt=0.0)
    artifacts: bool = True
    workers: int = Field(default=1, ge=1)

    @field_validator("sizes")
    @classmethod
    def _positive_sizes(cls, value: List[int]) -> List[int]:
        if any(n < 1 for n in value):
            raise ValueError("sizes must be positive")
        return value

    @field_validator("targets")
    @classmethod
    def _ratio_targets(cls, value: List[float]) -> List[float]:
        if any(not 0.0 <= t <= 1.0 for t in value):
            raise ValueError("targets must lie in [0, 1]")
        return value

    @model_validator(mode="after")
    def _heron_size(self) -> "SuiteConfig":
        if self.generator.topology == "heron" and any(n != 156 for n in self.sizes):
            raise ValueError("The heron topology has exactly 156 qubits")
        return self


class BenchJobRequest(BaseModel):
    config: SuiteConfig
    out_dir: Optional[str] = None


class WorkerModeRequest(BaseModel):
    mode: Literal["running", "draining", "paused"]
    reason: Optional[str] = None


class HardnessRequest(BaseModel):
    generator: GeneratorConfig = GeneratorConfig()
    num_qubits: int = Field(default=16, ge=1)
    n_instances: int = Field(default=10, ge=1)
    sa: SaConfig = SaConfig()
    seed: int = Field(default=0, ge=0)
