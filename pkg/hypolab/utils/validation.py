"""
Validation utilities for experiment configuration values.
"""

import math
import re
from typing import Any, Dict, List, Sequence, Tuple, Union

from hypolab.schemas.singular import ChiSpec

_CHI_RE = re.compile(
    r"^\s*(indicator|smooth_bump)\s*\(\s*([^,()]+)\s*,\s*([^,()]+)\s*(?:,\s*([^,()]+)\s*)?\)\s*$"
)


class ValidationUtils:
    """Utility class for parsing and checking configuration values."""

    @staticmethod
    def parse_float(text: Any) -> float:
        """
        Parse a real number, accepting 'inf' and multiples of 'pi' such as '2pi' or 'pi/3'.

        Args:
            text: Number or string

        Returns:
            The parsed float
        """
        if isinstance(text, (int, float)):
            return float(text)
        value = str(text).strip().lower().replace(" ", "")
        match = re.fullmatch(r"([-+]?[\d.]*)\*?pi(?:/([\d.]+))?", value)
        if match:
            head, divisor = match.groups()
            factor = float(head) if head not in ("", "+", "-") else float(f"{head}1")
            return factor * math.pi / (float(divisor) if divisor else 1.0)
        return float(value)

    @staticmethod
    def parse_float_list(value: Any) -> List[float]:
        """
        Parse a comma-separated list (or a sequence) of reals.

        Args:
            value: '0.4, 0.2, 0.1', a list, or a single number

        Returns:
            List of floats
        """
        if isinstance(value, str):
            parts = [p for p in value.split(",") if p.strip()]
        elif isinstance(value, (list, tuple)):
            parts = list(value)
        else:
            parts = [value]
        return [ValidationUtils.parse_float(p) for p in parts]

    @staticmethod
    def parse_base_points(value: Any) -> List[Tuple[float, float]]:
        """
        Parse base points written as 'x:y' pairs separated by commas.

        Args:
            value: '0:0, 0:0.5' or a sequence of pairs

        Returns:
            List of (x, y) tuples
        """
        if isinstance(value, str):
            points = []
            for item in value.split(","):
                if not item.strip():
                    continue
                coords = item.split(":")
                if len(coords) != 2:
                    raise ValueError(f"base point {item.strip()!r} is not of the form x:y")
                points.append(tuple(ValidationUtils.parse_float(c) for c in coords))
            return points
        return [(float(x), float(y)) for x, y in value]

    @staticmethod
    def parse_chi(value: Union[str, ChiSpec, Dict[str, Any]]) -> ChiSpec:
        """
        Parse a profile written as 'smooth_bump(a, b)' or 'indicator(a, b[, cutoff])'.

        Args:
            value: Text, a ChiSpec or its dict form

        Returns:
            ChiSpec
        """
        if isinstance(value, ChiSpec):
            return value
        if isinstance(value, dict):
            return ChiSpec(**value)
        match = _CHI_RE.match(str(value))
        if not match:
            raise ValueError(f"cannot parse chi {value!r}; expected e.g. smooth_bump(1, 4)")
        kind, a, b, cutoff = match.groups()
        return ChiSpec(
            kind=kind,
            a=ValidationUtils.parse_float(a),
            b=ValidationUtils.parse_float(b),
            cutoff=ValidationUtils.parse_float(cutoff) if cutoff else None,
        )

    @staticmethod
    def validate_monotone(values: Sequence[float], increasing: bool = True) -> Dict[str, Union[bool, str]]:
        """
        Check that a list is strictly monotone.

        Args:
            values: Values to check
            increasing: Direction

        Returns:
            Validation result
        """
        if len(values) < 2:
            return {"is_valid": False, "error": "at least two values are required"}
        pairs = list(zip(values, values[1:]))
        ok = all(b > a for a, b in pairs) if increasing else all(b < a for a, b in pairs)
        if not ok:
            word = "increasing" if increasing else "decreasing"
            return {"is_valid": False, "error": f"values must be strictly {word}"}
        return {"is_valid": True}

    @staticmethod
    def validate_range(
        values: Sequence[float], low: float, high: float = math.inf, closed_high: bool = False
    ) -> Dict[str, Union[bool, str]]:
        """Every value in [low, high) (or [low, high] with closed_high)."""
        for v in values:
            inside = low <= v <= high if closed_high else low <= v < high
            if not inside or math.isnan(v):
                bracket = "]" if closed_high else ")"
                return {"is_valid": False, "error": f"value {v} outside [{low}, {high}{bracket}"}
        return {"is_valid": True}

    @staticmethod
    def validate_power_of_two(n: int) -> bool:
        return n > 0 and not n & (n - 1)
