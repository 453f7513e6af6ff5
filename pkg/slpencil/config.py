"""
Configuration models for slpencil.

Configs are plain YAML (or JSON) files; every section is validated by a
pydantic model that rejects unknown keys.
"""

import json
import logging
from pathlib import Path
from typing import List, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

logger = logging.getLogger(__name__)


class SolverConfig(BaseModel):
    """Direct solver settings"""

    model_config = ConfigDict(extra="forbid")

    grid_size: int = Field(2048, ge=16, description="Number of grid intervals G on [0, pi]")
    scan_step: float = Field(0.05, gt=0, description="Scan step in sqrt(lambda)")
    lambda_scan_step: float = Field(0.1, gt=0, description="Scan step near and below zero")
    extrapolate: bool = Field(True, description="Richardson-extrapolate RK4 against step h/2")
    kappa_guard: float = Field(0.5, gt=0, description="Largest |kappa_n| accepted by the count check")
    root_xtol: float = Field(1e-12, gt=0)
    chunk_size: int = Field(64, ge=1, description="Spectral parameters integrated per batch")

    @field_validator("grid_size")
    @classmethod
    def _even_grid(cls, value: int) -> int:
        if value % 2:
            raise ValueError("grid_size must be even for Simpson quadrature")
        return value


class InverseConfig(BaseModel):
    """Inverse solver settings"""

    model_config = ConfigDict(extra="forbid")

    n_data: int = Field(16, ge=1, description="Spectral pairs fitted at the base case")
    base_K: int = Field(12, ge=1, le=24, description="Cosine coefficients in the base-case fit")
    edge_terms: bool = Field(True, description="Add two quadratic endpoint-slope basis functions")
    base_tol: float = Field(1e-8, gt=0)
    max_iter: int = Field(50, ge=1)
    fd_step: float = Field(1e-5, gt=0)
    workers: int = Field(1, ge=1, description="Threads evaluating Jacobian columns")

    @property
    def n_basis(self) -> int:
        return self.base_K + (2 if self.edge_terms else 0)

    @model_validator(mode="after")
    def _enough_data(self):
        if self.n_data < self.n_basis + 2:
            raise ValueError(
                f"n_data={self.n_data} must be at least n_basis + 2 = {self.n_basis + 2}"
            )
        return self


class MetricConfig(BaseModel):
    """Metric and set-membership settings"""

    model_config = ConfigDict(extra="forbid")

    alpha: float = Field(0.25, ge=0, lt=0.5)
    n_max: int = Field(64, ge=8)
    Q: float = Field(2.0, gt=0)
    delta: float = Field(0.5, gt=0)
    R: float = Field(10.0, gt=0)
    eps: float = Field(0.1, gt=0)


class StudyConfig(BaseModel):
    """Finite-data approximation study settings"""

    model_config = ConfigDict(extra="forbid")

    m_values: List[int] = Field(default_factory=lambda: [4, 8, 16, 32])
    eps_values: List[float] = Field(default_factory=lambda: [0.0])
    alpha1: float = Field(0.1, ge=0, lt=0.5)
    alpha2: float = Field(0.4, ge=0, lt=0.5)
    seed: int = 0

    @model_validator(mode="after")
    def _ordered_alphas(self):
        if not self.alpha1 < self.alpha2:
            raise ValueError("alpha1 must be smaller than alpha2")
        return self


class SamplerConfig(BaseModel):
    """Random problem generation for Lipschitz experiments"""

    model_config = ConfigDict(extra="forbid")

    M: int = Field(0, ge=-1)
    N: int = Field(0, ge=-1)
    n_cos: int = Field(4, ge=1, description="Cosine modes in sampled potentials")
    pair_count: int = Field(100, ge=1)
    direction: str = Field("direct", pattern="^(direct|inverse|conditional)$")
    perturbation: float = Field(0.1, gt=0, description="Relative size of the second problem's offset")
    max_attempts: int = Field(500, ge=1)
    workers: int = Field(1, ge=1)


class SlpencilConfig(BaseModel):
    """Complete configuration bundle"""

    model_config = ConfigDict(extra="forbid")

    solver: SolverConfig = Field(default_factory=SolverConfig)
    inverse: InverseConfig = Field(default_factory=InverseConfig)
    metric: MetricConfig = Field(default_factory=MetricConfig)
    study: StudyConfig = Field(default_factory=StudyConfig)
    sampler: SamplerConfig = Field(default_factory=SamplerConfig)


def load_config(config_path: Optional[Union[str, Path]] = None) -> SlpencilConfig:
    """Load a configuration file, falling back to defaults"""
    if config_path is None:
        return SlpencilConfig()

    config_path = str(config_path)
    with open(config_path, "r") as f:
        if config_path.endswith(".yaml") or config_path.endswith(".yml"):
            raw = yaml.safe_load(f) or {}
        else:
            raw = json.load(f)

    logger.info(f"Loaded configuration from {config_path}")
    return SlpencilConfig.model_validate(raw)
