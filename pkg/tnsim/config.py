"""
Configuration management for the tnsim engine.

This module uses Pydantic Settings for environment-based configuration
with validation and type checking. Only algorithmic knobs live here;
physical parameters always come from the experiment configuration file.
"""

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Engine settings with environment variable support (prefix TNSIM_)."""

    model_config = SettingsConfigDict(
        env_prefix="TNSIM_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    # Application settings
    log_level: str = Field(default="INFO", description="Logging level")
    output_dir: str = Field(default="results", description="Directory for result files")
    threads: int = Field(default=1, ge=1, description="Concurrent experiments in a batch run")
    emit_wall_time: bool = Field(
        default=False,
        description="Write wall-clock times into result files (breaks byte-stable output)"
    )

    # Eigen/linear solver settings
    eig_dense_max_dim: int = Field(
        default=512,
        description="Largest effective dimension solved with a dense eigensolver"
    )
    lanczos_krylov_dim: int = Field(default=48, description="Krylov space size per Lanczos restart")
    lanczos_tol: float = Field(default=1e-11, description="Lanczos residual tolerance")
    lanczos_max_restarts: int = Field(default=200, description="Maximum Lanczos restarts")
    conditioning_max: float = Field(
        default=1e12,
        description="Largest accepted condition number of a metric matrix"
    )
    ridge_epsilon: float = Field(
        default=1e-12,
        description="Relative ridge added to near-singular Hermitian systems"
    )
    svd_zero_cutoff: float = Field(
        default=1e-14,
        description="Singular values below cutoff * S[0] count as exact zeros"
    )

    # Capacity settings
    dense_max_dim: int = Field(default=2**14, description="Largest dense Hilbert space dimension")
    sparse_max_dim: int = Field(default=2**20, description="Largest sparse Hilbert space dimension")
    peps_exact_max_amplitudes: int = Field(
        default=2**20,
        description="Largest amplitude count for brute-force PEPS contraction"
    )
    product_norm_max_entries: int = Field(
        default=2**22,
        description="Largest intermediate of the exact ||op psi||^2 contraction; above it the zip-up estimate is used"
    )

    # Sweep settings
    default_precision: float = Field(default=1e-5, description="Default sweep convergence precision")
    max_sweeps: int = Field(default=40, description="Default maximum number of sweeps")

    # Uniform MPS settings
    power_tol: float = Field(default=1e-12, description="Power iteration tolerance for fixed points")
    power_max_iter: int = Field(default=10000, description="Power iteration limit for fixed points")


# Global settings instance
settings = Settings()
