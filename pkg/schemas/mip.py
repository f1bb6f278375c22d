from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, Field, model_validator


class LinearizeRequest(BaseModel):
    instance: Dict[str, Any]
    aux_policy: Literal["termwise", "shared"] = "termwise"
    include_lp: bool = True


class TtrRequest(BaseModel):
    """Incumbent trace text (`seconds,objective` rows) plus either an energy level or a ratio target."""
    trace: str
    e_ref: Optional[float] = None
    target_ratio: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    e_gs: Optional[float] = None
    poll_interval: Optional[float] = Field(default=None, gt=0.0)

    @model_validator(mode="after")
    def _one_target(self) -> "TtrRequest":
        if self.e_ref is None and (self.target_ratio is None or self.e_gs is None):
            raise ValueError("Provide e_ref, or target_ratio together with e_gs")
        return self
