"""
Output models for experiment runs.
"""

import math
import operator
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

_OPERATORS = {
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
    "==": operator.eq,
}


class Comparison(str, Enum):
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    EQ = "=="

    def holds(self, value: float, threshold: float) -> bool:
        if math.isnan(value):
            return False
        return bool(_OPERATORS[self.value](value, threshold))


class Reduction(str, Enum):
    """How a check value is derived from one column of a stored table."""

    FIRST = "first"
    LAST = "last"
    MAX = "max"
    MIN = "min"
    RATIO = "ratio"  # first / last
    LOGLOG_SLOPE = "loglog_slope"
    INCREASING = "increasing"
    DECREASING = "decreasing"


class TableRef(BaseModel):
    """Column of an emitted CSV table; with `target` set the value is |reduced - target|."""

    table: str
    column: str
    reduction: Reduction
    x: Optional[str] = None
    target: Optional[float] = None


class Check(BaseModel):
    """One acceptance predicate: value <op> threshold."""

    name: str
    value: float
    op: Comparison
    threshold: float
    source: Optional[TableRef] = None
    passed: bool

    @classmethod
    def evaluate(
        cls,
        name: str,
        value: float,
        op: Comparison,
        threshold: float,
        source: Optional[TableRef] = None,
    ) -> "Check":
        op = Comparison(op)
        value = float(value)
        return cls(
            name=name,
            value=value,
            op=op,
            threshold=threshold,
            source=source,
            passed=op.holds(value, threshold),
        )


class StepRecord(BaseModel):
    name: str
    data: Dict[str, Any] = Field(default_factory=dict)
    exploratory: bool = False


class ExperimentReport(BaseModel):
    """Everything a run produced; `passed` is the conjunction of the checks."""

    experiment: str
    claim: str
    version: str
    config: Dict[str, Any]
    steps: List[StepRecord]
    checks: List[Check]
    passed: bool
    artifacts: List[str]
    wall_time: float


class VerificationReport(BaseModel):
    report: str
    checks_ok: bool
    manifest_ok: bool
    failures: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.checks_ok and self.manifest_ok
