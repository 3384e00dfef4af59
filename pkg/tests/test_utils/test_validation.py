"""
Unit tests for configuration value parsing and checks.
"""

import math

import pytest

from hypolab.schemas.singular import ChiKind
from hypolab.utils.validation import ValidationUtils


class TestValidationUtils:
    """Test cases for ValidationUtils."""

    def test_parse_float_pi_forms(self):
        """Test reals written with pi."""
        assert ValidationUtils.parse_float("2pi") == pytest.approx(2 * math.pi)
        assert ValidationUtils.parse_float("pi/3") == pytest.approx(math.pi / 3)
        assert ValidationUtils.parse_float("-pi") == pytest.approx(-math.pi)
        assert ValidationUtils.parse_float("0.25") == 0.25
        assert ValidationUtils.parse_float("inf") == math.inf
        assert ValidationUtils.parse_float(3) == 3.0

    def test_parse_float_rejects_garbage(self):
        """Test that non-numeric text raises."""
        with pytest.raises(ValueError):
            ValidationUtils.parse_float("two")

    def test_parse_float_list(self):
        """Test comma lists, sequences and scalars."""
        assert ValidationUtils.parse_float_list("0.4, 0.2,0.1") == [0.4, 0.2, 0.1]
        assert ValidationUtils.parse_float_list([1, "pi"]) == [1.0, pytest.approx(math.pi)]
        assert ValidationUtils.parse_float_list(0.5) == [0.5]

    def test_parse_base_points(self):
        """Test x:y pairs."""
        assert ValidationUtils.parse_base_points("0:0, 0:-0.5") == [(0.0, 0.0), (0.0, -0.5)]
        with pytest.raises(ValueError, match="x:y"):
            ValidationUtils.parse_base_points("0,1")

    def test_parse_chi(self):
        """Test profile text."""
        chi = ValidationUtils.parse_chi("smooth_bump(1, 4)")
        assert chi.kind == ChiKind.SMOOTH_BUMP
        assert (chi.a, chi.b) == (1.0, 4.0)
        chi = ValidationUtils.parse_chi("indicator(0, inf, 20)")
        assert chi.upper == 20.0

    def test_parse_chi_rejects_unknown(self):
        """Test that unknown profile text raises."""
        with pytest.raises(ValueError, match="cannot parse chi"):
            ValidationUtils.parse_chi("gaussian(1)")

    def test_validate_monotone(self):
        """Test strict monotonicity."""
        assert ValidationUtils.validate_monotone([1, 2, 3])["is_valid"]
        assert not ValidationUtils.validate_monotone([1, 1, 2])["is_valid"]
        assert ValidationUtils.validate_monotone([0.4, 0.2], increasing=False)["is_valid"]
        assert not ValidationUtils.validate_monotone([0.4])["is_valid"]

    def test_validate_range(self):
        """Test half-open and closed ranges."""
        assert ValidationUtils.validate_range([0.0, 0.49], 0.0, 0.5)["is_valid"]
        result = ValidationUtils.validate_range([0.5], 0.0, 0.5)
        assert not result["is_valid"]
        assert "outside" in result["error"]
        assert ValidationUtils.validate_range([0.5], 0.0, 0.5, closed_high=True)["is_valid"]

    def test_validate_power_of_two(self):
        """Test power-of-two grid sizes."""
        assert ValidationUtils.validate_power_of_two(256)
        assert not ValidationUtils.validate_power_of_two(96)
