"""
Core configuration management for the hypolab workbench.
"""

import math
import os
from typing import List, Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Workbench settings with environment variable support (prefix HYPOLAB_)."""

    model_config = SettingsConfigDict(
        env_prefix="HYPOLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Application
    app_name: str = "hypolab"
    app_version: str = "0.1.0"

    # Output
    output_dir: str = "runs"

    # Parallelism (FFT workers, per-frequency solver pool)
    threads: int = os.cpu_count() or 1

    # Default periodic box: R^2 truncated to [-L/2, L/2)^2
    lx: float = 16 * math.pi
    ly: float = 16 * math.pi
    nx: int = 256
    ny: int = 256

    # Boxes used by the regularity probes and the wavefront experiments
    probe_length: float = 2 * math.pi
    probe_points: int = 256
    wavefront_length: float = 4 * math.pi
    wavefront_points: int = 256

    # Quadrature
    quad_epsabs: float = 1e-13
    quad_epsrel: float = 1e-11
    quad_limit: int = 400

    # Symbolic layer
    char_directions: int = 360
    rank_threshold: float = 1e-10

    # Regularity probe
    bounded_slope: float = 0.1

    # Kernel study
    kernel_samples: int = 128
    bound_margin: float = 2.0

    # Gabor probe
    gabor_sigma: float = 0.5
    gabor_scales: List[float] = [1.0, 2.0, 4.0, 8.0]
    gabor_directions: int = 16
    gabor_threshold: float = -2.0

    # Logging
    log_level: str = "INFO"
    log_file: Optional[str] = None


# Global settings instance
settings = Settings()
