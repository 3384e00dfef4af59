"""
Solver input schemas.
"""

import math
from enum import Enum
from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from hypolab.models.fields import GridField


class Gauge(str, Enum):
    ZERO_MEAN = "zero_mean"


class BoundaryCondition(str, Enum):
    PERIODIC = "periodic"


class GrushinSolveParams(BaseModel):
    """Per-frequency Grushin solve: second-order FD in x, FFT in y."""

    gauge: Gauge = Gauge.ZERO_MEAN
    bc: BoundaryCondition = BoundaryCondition.PERIODIC


class ProbeOperator(str, Enum):
    GRUSHIN = "grushin"
    P_OPERATOR = "p_operator"
    LAPLACIAN = "laplacian"


class PolarizedInput(BaseModel):
    """Forcing (f1, f2) for the first-order system with constant polarization lambda."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    lam: Tuple[float, float] = Field(..., alias="lambda")
    f1: GridField
    f2: GridField

    @field_validator("lam")
    @classmethod
    def validate_unit(cls, v):
        if abs(math.hypot(*v) ** 2 - 1.0) > 1e-12:
            raise ValueError("lambda must be a unit vector")
        return v

    @model_validator(mode="after")
    def validate_boxes(self):
        if self.f1.box != self.f2.box:
            raise ValueError("f1 and f2 must live on the same box")
        return self
