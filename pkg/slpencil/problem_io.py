"""
Problem and spectral-data files.

A problem file is a YAML document:

    name: robin
    sigma:
      expression: "0.5*cos(2*x)"      # or grid_size + values
    f: {h0: 0.0, h: 1.0, poles: []}   # or a number, or "infinity"
    F: infinity
    solver: {grid_size: 2048, n_max: 20}

Spectral data are JSON documents {M, N, pairs: [{n, lambda, gamma, kappa, beta}]}.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .config import MetricConfig, SamplerConfig, StudyConfig
from .direct_solver import Problem, SpectralData
from .exceptions import ProblemFileError
from .function_space import DEFAULT_GRID_SIZE, MeanZeroFunction, mean_zero_project, resample
from .hn_rational import RationalHN

logger = logging.getLogger(__name__)


class PoleSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    h: float
    delta: float = Field(gt=0)


class BoundarySpec(BaseModel):
    """Finite rational boundary function h0*lam + h + sum delta_j / (h_j - lam)."""

    model_config = ConfigDict(extra="forbid")

    h0: float = Field(0.0, ge=0)
    h: float = 0.0
    poles: List[PoleSpec] = Field(default_factory=list)


BoundaryField = Union[Literal["infinity"], float, BoundarySpec]


class SigmaSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    expression: Optional[str] = None
    grid_size: Optional[int] = Field(None, ge=2)
    values: Optional[List[float]] = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.expression is None) == (self.values is None):
            raise ValueError("sigma needs exactly one of 'expression' or 'values'")
        if self.values is not None and self.grid_size is not None and len(self.values) != self.grid_size + 1:
            raise ValueError(f"sigma has {len(self.values)} values but grid_size={self.grid_size}")
        return self


class SolverSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    grid_size: Optional[int] = Field(None, ge=16)
    n_max: int = Field(20, ge=1)


class ProblemFile(BaseModel):
    """Schema of a problem file; unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    description: Optional[str] = None
    sigma: SigmaSpec
    f: BoundaryField
    F: BoundaryField
    solver: SolverSpec = Field(default_factory=SolverSpec)
    study: Optional[StudyConfig] = None
    metric: Optional[MetricConfig] = None
    sampler: Optional[SamplerConfig] = None

    def grid_size(self, override: Optional[int] = None) -> int:
        if override is not None:
            return override
        if self.solver.grid_size is not None:
            return self.solver.grid_size
        if self.sigma.values is not None:
            return len(self.sigma.values) - 1
        return DEFAULT_GRID_SIZE

    def to_problem(self, grid_size: Optional[int] = None) -> Problem:
        G = self.grid_size(grid_size)
        if self.sigma.expression is not None:
            sigma = MeanZeroFunction.from_expression(self.sigma.expression, G)
        else:
            sigma = mean_zero_project(self.sigma.values)
            if sigma.grid_size != G:
                logger.info(f"Resampling sigma from G={sigma.grid_size} to G={G}")
                sigma = resample(sigma, G)
        return Problem(sigma, _boundary(self.f), _boundary(self.F))

    @classmethod
    def from_problem(cls, problem: Problem, **fields) -> "ProblemFile":
        return cls(
            sigma=SigmaSpec(grid_size=problem.grid_size, values=problem.sigma.values.tolist()),
            f=_boundary_field(problem.f),
            F=_boundary_field(problem.F),
            **fields,
        )


class PairSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    n: Optional[int] = Field(None, ge=1)
    lam: float = Field(alias="lambda")
    gamma: float
    kappa: Optional[float] = None
    beta: Optional[float] = None


class DataFile(BaseModel):
    """Spectral data; M and N may be omitted for bare finite pairs."""

    model_config = ConfigDict(extra="forbid")

    M: Optional[int] = Field(None, ge=-1)
    N: Optional[int] = Field(None, ge=-1)
    pairs: List[PairSpec]


def _boundary(field: BoundaryField) -> RationalHN:
    if isinstance(field, BoundarySpec):
        return RationalHN(h0=field.h0, h=field.h, poles=tuple((p.h, p.delta) for p in field.poles))
    return RationalHN.from_dict(field)


def _boundary_field(g: RationalHN) -> BoundaryField:
    data = g.to_dict()
    return data if isinstance(data, str) else BoundarySpec.model_validate(data)


def _read(path: Union[str, Path], loader) -> Any:
    path = Path(path)
    try:
        with open(path, "r") as f:
            return loader(f)
    except OSError as e:
        raise ProblemFileError(f"cannot read {path}: {e}") from e
    except (yaml.YAMLError, json.JSONDecodeError) as e:
        raise ProblemFileError(f"cannot parse {path}: {e}") from e


def load_problem_file(path: Union[str, Path]) -> ProblemFile:
    raw = _read(path, yaml.safe_load)
    try:
        return ProblemFile.model_validate(raw or {})
    except ValidationError as e:
        raise ProblemFileError(f"invalid problem file {path}:\n{e}") from e


def load_problem(path: Union[str, Path], grid_size: Optional[int] = None) -> Problem:
    spec = load_problem_file(path)
    problem = spec.to_problem(grid_size)
    logger.info(f"Loaded problem {spec.name or Path(path).stem}: {problem.describe()}")
    return problem


def save_problem(problem: Problem, path: Union[str, Path], **fields) -> Path:
    """Write a problem file with sigma stored as grid values."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    spec = ProblemFile.from_problem(problem, **fields)
    document = spec.model_dump(mode="json", exclude_none=True, by_alias=True)
    with open(path, "w") as f:
        yaml.safe_dump(document, f, sort_keys=False)
    return path


def load_data(path: Union[str, Path], M: Optional[int] = None, N: Optional[int] = None) -> SpectralData:
    """Read spectral data; `M` and `N` fill in (or must agree with) the file's indices."""
    raw = _read(path, json.load)
    try:
        spec = DataFile.model_validate(raw)
    except ValidationError as e:
        raise ProblemFileError(f"invalid data file {path}:\n{e}") from e

    indices = {}
    for key, given in (("M", M), ("N", N)):
        stored = getattr(spec, key)
        if stored is not None and given is not None and stored != given:
            raise ProblemFileError(f"{key}={given} disagrees with {key}={stored} stored in {path}")
        value = stored if stored is not None else given
        if value is None:
            raise ProblemFileError(f"{path} has no {key}; pass it explicitly")
        indices[key] = value

    pairs = sorted(spec.pairs, key=lambda p: p.n or 0) if all(p.n for p in spec.pairs) else spec.pairs
    return SpectralData(
        indices["M"],
        indices["N"],
        np.array([p.lam for p in pairs], dtype=float),
        np.array([p.gamma for p in pairs], dtype=float),
    )


def save_data(data: SpectralData, path: Union[str, Path]) -> Path:
    """Write spectral data as JSON after revalidating it."""
    document = data.to_dict()
    SpectralData.from_dict(document)
    return save_json(document, path)


def save_json(document: Dict[str, Any], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(document, f, indent=2)
        f.write("\n")
    return path
