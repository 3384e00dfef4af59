"""
Schemas for the explicit non-smooth solutions of A u = 0.
"""

import math
from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from hypolab.utils.cutoffs import plateau


class ChiKind(str, Enum):
    INDICATOR = "indicator"
    SMOOTH_BUMP = "smooth_bump"


class ChiSpec(BaseModel):
    """
    Frequency profile chi supported in [a, b] within eta > 0.

    indicator is the sharp 1_{[a, b]}; smooth_bump is 1 on the inner part of
    (a, b) and vanishes outside it. For b = inf, `cutoff` truncates at Lambda.
    """

    kind: ChiKind
    a: float = Field(0.0, ge=0.0)
    b: float = math.inf
    cutoff: Optional[float] = Field(None, gt=0.0)

    @model_validator(mode="after")
    def validate_support(self):
        if not self.b > self.a:
            raise ValueError("chi support needs a < b")
        if self.cutoff is not None and self.cutoff <= self.a:
            raise ValueError("cutoff must exceed the lower support edge")
        if self.kind == ChiKind.SMOOTH_BUMP and not math.isfinite(self.upper):
            raise ValueError("smooth_bump needs a finite upper edge or a cutoff")
        return self

    @classmethod
    def indicator(cls, a: float, b: float = math.inf, cutoff: Optional[float] = None) -> "ChiSpec":
        return cls(kind=ChiKind.INDICATOR, a=a, b=b, cutoff=cutoff)

    @classmethod
    def smooth_bump(cls, a: float, b: float, cutoff: Optional[float] = None) -> "ChiSpec":
        return cls(kind=ChiKind.SMOOTH_BUMP, a=a, b=b, cutoff=cutoff)

    @property
    def upper(self) -> float:
        """Effective upper edge: min(b, cutoff)."""
        return min(self.b, self.cutoff) if self.cutoff is not None else self.b

    @property
    def margin(self) -> float:
        return min(1.0, (self.upper - self.a) / 4.0)

    @property
    def breakpoints(self) -> List[float]:
        if self.kind == ChiKind.INDICATOR:
            return []
        return [self.a + self.margin, self.upper - self.margin]

    def evaluate(self, eta: np.ndarray) -> np.ndarray:
        eta = np.asarray(eta, dtype=float)
        if self.kind == ChiKind.INDICATOR:
            return ((eta >= self.a) & (eta <= self.upper)).astype(float)
        return plateau(eta, self.a, self.upper, self.margin)


class CounterexampleSolution(BaseModel):
    """The pair (u1 e^{i theta}, -i u1 e^{i theta}) with u1_hat = chi(eta) e^{-x^2 eta / 2}."""

    chi: ChiSpec
    theta: float = 0.0

    @field_validator("theta")
    @classmethod
    def reduce_theta(cls, v):
        return v % (2 * math.pi)

    @property
    def phase(self) -> complex:
        return complex(math.cos(self.theta), math.sin(self.theta))


class TestFunctionKind(str, Enum):
    GAUSSIAN = "gaussian"
    ODD_GAUSSIAN = "odd_gaussian"


class TestFunctionSpec(BaseModel):
    """Schwartz test function phi(y): e^{-y^2/(2 w^2)} or y e^{-y^2/(2 w^2)}."""

    __test__ = False

    kind: TestFunctionKind = TestFunctionKind.GAUSSIAN
    width: float = Field(1.0, gt=0.0)

    def evaluate(self, y):
        y = np.asarray(y, dtype=float)
        gauss = np.exp(-(y**2) / (2 * self.width**2))
        return gauss if self.kind == TestFunctionKind.GAUSSIAN else y * gauss

    @property
    def value_at_zero(self) -> float:
        return 1.0 if self.kind == TestFunctionKind.GAUSSIAN else 0.0

    @property
    def pv_pairing(self) -> float:
        """<PV(1/y), phi>; zero for even phi."""
        if self.kind == TestFunctionKind.GAUSSIAN:
            return 0.0
        return math.sqrt(2 * math.pi) * self.width
