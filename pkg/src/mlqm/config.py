"""Run configuration schema shared by the CLI subcommands.

Files are YAML or JSON. Unknown keys are rejected before any computation.
"""

from __future__ import annotations

from pathlib import Path
from typing import Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .bounds import BeamSpec
from .deformation import DeformationModel
from .hilbert import MomentumDistribution

SUBCOMMANDS = ("algebra", "gup", "chsh", "interferometer", "bounds", "paper-report")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelConfig(_Strict):
    kind: Literal["linear", "quadratic", "custom"] = "linear"
    beta: float = 1.0
    series_c: Optional[list[float]] = None
    half_power: float = 0.0
    u_max: Optional[float] = None

    def build(self) -> DeformationModel:
        if self.kind == "custom" and not self.series_c:
            raise ValueError("custom model needs series_c")
        return DeformationModel.from_config(self.model_dump(exclude_none=True))


class BeamConfig(_Strict):
    M_GeV: float = Field(0.1, gt=0)
    E_kin_GeV: float = Field(0.01, gt=0)
    N_constituents: int = Field(1, ge=1)
    alpha_scaling: float = Field(2.0, ge=0)

    def build(self) -> BeamSpec:
        return BeamSpec(self.M_GeV, self.E_kin_GeV, self.N_constituents, self.alpha_scaling)


class MonoDistribution(_Strict):
    kind: Literal["monoenergetic"]
    M_GeV: float = Field(gt=0)
    E_kin_GeV: float = Field(ge=0)


class GaussianDistribution(_Strict):
    kind: Literal["gaussian_radial"]
    sigma_GeV: float = Field(gt=0)
    n_points: int = Field(64, ge=1, le=4096)


class CustomDistribution(_Strict):
    kind: Literal["custom"]
    points: list[tuple[float, float]] = Field(min_length=1)


DistributionConfig = Union[MonoDistribution, GaussianDistribution, CustomDistribution]


def build_distribution(cfg: DistributionConfig) -> MomentumDistribution:
    if isinstance(cfg, MonoDistribution):
        return MomentumDistribution.monoenergetic(cfg.M_GeV, cfg.E_kin_GeV)
    if isinstance(cfg, GaussianDistribution):
        return MomentumDistribution.gaussian_radial(cfg.sigma_GeV, cfg.n_points)
    return MomentumDistribution.custom(cfg.points)


class RunConfig(_Strict):
    subcommand: Optional[Literal[SUBCOMMANDS]] = None
    model: ModelConfig = Field(default_factory=ModelConfig)
    beam: BeamConfig = Field(default_factory=BeamConfig)
    distribution: Optional[DistributionConfig] = Field(default=None, discriminator="kind")
    state: Literal["singlet", "phi_plus", "product", "partial"] = "singlet"
    state_theta: float = 0.39269908169872414
    settings: Optional[list[float]] = None
    optimize: bool = False
    restarts: int = Field(4, ge=1)
    visibility: float = Field(1.0, gt=0, le=1)
    shots: int = Field(100_000, ge=1)
    seed: int = Field(0, ge=0)
    workers: int = Field(1, ge=1)
    power: Optional[Literal[1, 2]] = None
    delta: float = Field(1.0, gt=0)
    output: Optional[str] = None
    format: Optional[Literal["csv", "json"]] = None

    @model_validator(mode="after")
    def _settings_length(self) -> RunConfig:
        if self.settings is not None and len(self.settings) != 4:
            raise ValueError(f"settings needs exactly 4 angles, got {len(self.settings)}")
        return self

    def momentum_distribution(self) -> MomentumDistribution:
        if self.distribution is not None:
            return build_distribution(self.distribution)
        return MomentumDistribution.monoenergetic(self.beam.M_GeV, self.beam.E_kin_GeV)


def load_config_file(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"config {path} must contain a mapping at the top level")
    return data


def merge_overrides(base: dict, overrides: dict) -> dict:
    """Recursively overlay non-``None`` override values onto ``base``."""
    merged = dict(base)
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_overrides(merged[key], value)
        elif isinstance(value, dict):
            merged[key] = merge_overrides({}, value)
            if not merged[key]:
                del merged[key]
        else:
            merged[key] = value
    return merged
