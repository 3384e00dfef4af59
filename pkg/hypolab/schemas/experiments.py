"""
Experiment configuration schema.
"""

import math
from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from hypolab.core.config import settings
from hypolab.schemas.grid import Box
from hypolab.schemas.singular import ChiSpec
from hypolab.utils.validation import ValidationUtils


class ExperimentName(str, Enum):
    BRACKET_CHECK = "bracket-check"
    THM1_GAIN = "thm1-gain"
    POLARIZED = "polarized"
    COUNTEREXAMPLE = "counterexample"
    HYP_SET = "hyp-set"
    KERNEL_DECAY = "kernel-decay"
    P_GAIN = "p-gain"
    HYPO_SYSTEM = "hypo-system"
    WAVEFRONT = "wavefront"


class ExperimentConfig(BaseModel):
    """
    One experiment invocation. Keys left unset fall back to the experiment's
    own defaults; unknown keys are rejected.
    """

    model_config = ConfigDict(extra="forbid", use_enum_values=False)

    experiment: ExperimentName

    # Box parameters
    lx: Optional[float] = Field(None, gt=0)
    ly: Optional[float] = Field(None, gt=0)
    nx: Optional[int] = Field(None, ge=16)
    ny: Optional[int] = Field(None, ge=16)

    s: Optional[List[float]] = None
    delta: float = Field(0.25, ge=0.0, lt=0.5)
    widths: Optional[List[float]] = None
    p_list: Optional[List[float]] = None
    theta: List[float] = Field(default_factory=lambda: [0.0, math.pi / 3, math.pi])
    chi: Optional[ChiSpec] = None
    base_points: Optional[List[Tuple[float, float]]] = None
    samples: Optional[int] = Field(None, ge=64)

    seed: int = Field(0, ge=0)
    output_dir: str = Field(default_factory=lambda: settings.output_dir)
    threads: Optional[int] = Field(None, ge=1)

    @field_validator("experiment", mode="before")
    @classmethod
    def validate_experiment(cls, v):
        names = [e.value for e in ExperimentName]
        if isinstance(v, str) and v not in names:
            raise ValueError(f"unknown experiment {v!r}; valid experiments: {', '.join(names)}")
        return v

    @field_validator("s", "widths", "p_list", "theta", mode="before")
    @classmethod
    def parse_lists(cls, v):
        return None if v is None else ValidationUtils.parse_float_list(v)

    @field_validator("lx", "ly", "delta", mode="before")
    @classmethod
    def parse_reals(cls, v):
        return None if v is None else ValidationUtils.parse_float(v)

    @field_validator("nx", "ny")
    @classmethod
    def validate_power_of_two(cls, v):
        if v is not None and not ValidationUtils.validate_power_of_two(v):
            raise ValueError("grid sizes must be powers of two")
        return v

    @field_validator("s")
    @classmethod
    def validate_s(cls, v):
        if v is not None:
            result = ValidationUtils.validate_range(v, 0.0)
            if not result["is_valid"]:
                raise ValueError(result["error"])
        return v

    @field_validator("widths")
    @classmethod
    def validate_widths(cls, v):
        if v is not None:
            for result in (
                ValidationUtils.validate_range(v, 0.0),
                ValidationUtils.validate_monotone(v, increasing=False),
            ):
                if not result["is_valid"]:
                    raise ValueError(result["error"])
            if v[-1] <= 0:
                raise ValueError("widths must be positive")
        return v

    @field_validator("p_list")
    @classmethod
    def validate_p_list(cls, v):
        if v is not None:
            for result in (
                ValidationUtils.validate_range(v, 2.0),
                ValidationUtils.validate_monotone(v, increasing=True),
            ):
                if not result["is_valid"]:
                    raise ValueError(result["error"])
        return v

    @field_validator("chi", mode="before")
    @classmethod
    def parse_chi(cls, v):
        return None if v is None else ValidationUtils.parse_chi(v)

    @field_validator("base_points", mode="before")
    @classmethod
    def parse_base_points(cls, v):
        return None if v is None else ValidationUtils.parse_base_points(v)

    def box(self, default: Box) -> Box:
        """The experiment box: `default` with any configured side lengths and sizes."""
        update = {k: getattr(self, k) for k in ("lx", "ly", "nx", "ny") if getattr(self, k) is not None}
        return Box(**{**default.model_dump(), **update})
