"""
Complex fields sampled on a periodic box.
"""

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from hypolab.schemas.grid import Box


@dataclass(frozen=True, eq=False)
class GridField:
    """
    Immutable complex field on `box`; values[i, j] sits at (x_i, y_j).

    The stored array is a private read-only copy. Construction rejects
    NaN/Inf and arrays whose shape does not match the box.
    """

    box: Box
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=complex, copy=True)
        if values.shape != self.box.shape:
            raise ValueError(f"field shape {values.shape} does not match box {self.box.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, box: Box) -> "GridField":
        return cls(box, np.zeros(box.shape, dtype=complex))

    @classmethod
    def from_function(cls, box: Box, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "GridField":
        X, Y = box.coordinates()
        return cls(box, np.broadcast_to(fn(X, Y), box.shape))

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def with_values(self, values: np.ndarray) -> "GridField":
        return GridField(self.box, values)

    def _check_box(self, other: "GridField") -> None:
        if other.box != self.box:
            raise ValueError("fields live on different boxes")

    def __add__(self, other: "GridField") -> "GridField":
        self._check_box(other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "GridField") -> "GridField":
        self._check_box(other)
        return self.with_values(self.values - other.values)

    def __mul__(self, factor: Union[complex, float, np.ndarray]) -> "GridField":
        return self.with_values(self.values * factor)

    __rmul__ = __mul__

    def __neg__(self) -> "GridField":
        return self.with_values(-self.values)
