from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from schemas.annealing import SaConfig
from schemas.bench import GeneratorConfig


class GenerateRequest(BaseModel):
    generator: GeneratorConfig = GeneratorConfig()
    num_qubits: int = Field(default=14, ge=1)
    seed: Optional[int] = Field(default=None, ge=0)


class InstanceRequest(BaseModel):
    instance: Dict[str, Any]


class EnergyRequest(BaseModel):
    instance: Dict[str, Any]
    spins: Optional[List[int]] = None
    bitstring: Optional[str] = None

    @model_validator(mode="after")
    def _one_configuration(self) -> "EnergyRequest":
        if (self.spins is None) == (self.bitstring is None):
            raise ValueError("Provide exactly one of spins or bitstring")
        return self


class SaSolveRequest(BaseModel):
    instance: Dict[str, Any]
    config: SaConfig = SaConfig()
