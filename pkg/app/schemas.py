import io
from typing import Dict, List, Literal, Mapping, Optional, Tuple

import numpy as np
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.config import (
    DEFAULT_DELTA_N, DEFAULT_DENSIFICATION, DEFAULT_FAILURE_BUDGET, DEFAULT_JOBS,
    DEFAULT_OMEGA_MAX, DEFAULT_OMEGA_MIN, DEFAULT_OUT_DIR, DEFAULT_POINTS,
    DEFAULT_U_OVER_C, CRITICAL_EXCLUSION, LIGHT_SPEED, MEDIUM_PRESETS,
)
from app.errors import ConfigError
from app.models import ModeSolution, ScatteringMatrix, Scenario, SubluminalInterval


def _split_triple(value):
    if isinstance(value, str):
        parts = [part.strip() for part in value.split(",") if part.strip()]
        return tuple(float(part) for part in parts)
    return value


# Medium schemas
class MediumParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    resonant_frequencies: Tuple[float, float, float]
    elastic_constants: Tuple[float, float, float]
    front_speed_fraction: float = Field(gt=0.0, lt=1.0)
    delta_n: float = Field(ge=0.0)
    light_speed: float = Field(default=LIGHT_SPEED, gt=0.0)

    @field_validator("resonant_frequencies", "elastic_constants", mode="before")
    @classmethod
    def _parse_triple(cls, value):
        return _split_triple(value)

    @field_validator("resonant_frequencies", "elastic_constants")
    @classmethod
    def _positive(cls, value):
        if any(not np.isfinite(item) or item <= 0 for item in value):
            raise ValueError("all entries must be finite and positive")
        return value

    @field_validator("resonant_frequencies")
    @classmethod
    def _distinct(cls, value):
        if len(set(value)) != len(value):
            raise ValueError("resonant frequencies must be distinct")
        return value

    @property
    def gamma(self) -> float:
        return 1.0 / np.sqrt(1.0 - self.front_speed_fraction ** 2)

    @classmethod
    def from_preset(cls, name: str, front_speed_fraction: float, delta_n: float,
                    light_speed: float = LIGHT_SPEED) -> "MediumParams":
        """Build Hopfield constants from a named Sellmeier fit"""
        if name not in MEDIUM_PRESETS:
            raise ConfigError(f"unknown medium preset {name!r}; known: {sorted(MEDIUM_PRESETS)}")
        preset = MEDIUM_PRESETS[name]
        resonances = tuple(2.0 * np.pi * light_speed / lam for lam in preset["wavelengths_um"])
        kappas = tuple(b / (4.0 * np.pi) for b in preset["B"])
        return cls(
            resonant_frequencies=resonances,
            elastic_constants=kappas,
            front_speed_fraction=front_speed_fraction,
            delta_n=delta_n,
            light_speed=light_speed,
        )


# Sweep configuration
class SweepConfig(BaseModel):
    """Everything a sweep needs; serialized as KEY=value lines"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    medium: str = "fused_silica"
    resonant_frequencies: Optional[Tuple[float, float, float]] = None
    elastic_constants: Optional[Tuple[float, float, float]] = None
    delta_n: float = Field(default=DEFAULT_DELTA_N, ge=0.0)
    u_over_c: float = Field(default=DEFAULT_U_OVER_C, gt=0.0, lt=1.0)
    omega_min: float = Field(default=DEFAULT_OMEGA_MIN, gt=0.0)
    omega_max: float = Field(default=DEFAULT_OMEGA_MAX, gt=0.0)
    points: int = Field(default=DEFAULT_POINTS, ge=2)
    spacing: Literal["two-tier", "log", "linear"] = "two-tier"
    densification: float = Field(default=DEFAULT_DENSIFICATION, gt=0.0)
    critical_exclusion: float = Field(default=CRITICAL_EXCLUSION, ge=0.0)
    bandwidth_ratio: float = Field(default=1.0, gt=0.0)
    out_dir: str = DEFAULT_OUT_DIR
    jobs: int = Field(default=DEFAULT_JOBS, ge=1)
    dump_modes: bool = False
    dump_smatrix: bool = False
    failure_budget: float = Field(default=DEFAULT_FAILURE_BUDGET, ge=0.0, le=1.0)

    @field_validator("resonant_frequencies", "elastic_constants", mode="before")
    @classmethod
    def _parse_triple(cls, value):
        if value == "":
            return None
        return _split_triple(value)

    @model_validator(mode="after")
    def _check_consistency(self):
        if self.omega_max <= self.omega_min:
            raise ValueError("omega_max must exceed omega_min")
        if (self.resonant_frequencies is None) != (self.elastic_constants is None):
            raise ValueError("resonant_frequencies and elastic_constants must be given together")
        if self.resonant_frequencies is None and self.medium not in MEDIUM_PRESETS:
            raise ValueError(f"unknown medium preset {self.medium!r}")
        return self

    def medium_params(self) -> MediumParams:
        if self.resonant_frequencies is not None:
            return MediumParams(
                resonant_frequencies=self.resonant_frequencies,
                elastic_constants=self.elastic_constants,
                front_speed_fraction=self.u_over_c,
                delta_n=self.delta_n,
            )
        return MediumParams.from_preset(self.medium, self.u_over_c, self.delta_n)

    # Key/value round trip
    def to_items(self) -> Dict[str, str]:
        items = {}
        for name, value in self.model_dump().items():
            if value is None:
                continue
            if isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, float):
                text = repr(value)
            elif isinstance(value, (tuple, list)):
                text = ",".join(repr(float(item)) for item in value)
            else:
                text = str(value)
            items[name.upper()] = text
        return items

    def to_text(self) -> str:
        return "".join(f"{key}={value}\n" for key, value in self.to_items().items())

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "SweepConfig":
        try:
            return cls(**{key.lower(): value for key, value in values.items() if value is not None})
        except ValidationError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_text(cls, text: str) -> "SweepConfig":
        return cls.from_mapping(dotenv_values(stream=io.StringIO(text)))

    @classmethod
    def load(cls, path: Optional[str] = None, overrides: Optional[Mapping[str, object]] = None) -> "SweepConfig":
        """Defaults < config file < explicit overrides (CLI flags)"""
        values: Dict[str, object] = {}
        if path is not None:
            try:
                with open(path, "r", encoding="utf-8") as handle:
                    values.update(dotenv_values(stream=handle))
            except OSError as exc:
                raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        for key, value in (overrides or {}).items():
            if value is not None:
                values[key.upper()] = value
        return cls.from_mapping(values)


# Result schemas
class FluxSpectrumRow(BaseModel):
    omega: float
    scenario: Optional[Scenario] = None
    fluxes: Dict[str, float]
    norm_signs: Dict[str, int]

    @property
    def positive_total(self) -> float:
        return sum(value for label, value in self.fluxes.items() if self.norm_signs[label] > 0)

    @property
    def negative_total(self) -> float:
        return sum(value for label, value in self.fluxes.items() if self.norm_signs[label] < 0)


class TwoModeReport(BaseModel):
    pair: Tuple[str, str]
    fluxes: Tuple[float, float]
    correlation: float
    correlation_flagged: bool = False
    log_negativity: float
    degree_of_entanglement: Optional[float] = None
    purity: float
    is_pure: bool


class JCPoint(BaseModel):
    scenario: Scenario
    omega: float
    pair: Tuple[str, str]
    correlation: float
    degree_of_entanglement: float


# Sweep records
class FrequencyRecord(BaseModel):
    """Outcome at one grid frequency; failures are kept as gap rows"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    omega: float
    ok: bool
    reason: str = ""
    scenario: Optional[Scenario] = None
    residual: Optional[float] = None
    condition_number: Optional[float] = None
    fluxes: Dict[str, float] = Field(default_factory=dict)
    norm_signs: Dict[str, int] = Field(default_factory=dict)
    entanglement: Dict[str, Tuple[float, Optional[float]]] = Field(default_factory=dict)
    modes: Tuple[ModeSolution, ...] = ()
    smatrix: Optional[ScatteringMatrix] = None


class TypifyingResult(BaseModel):
    scenario: Scenario
    omega: float
    labels: Tuple[str, ...]
    correlations: List[List[float]]
    entanglement: List[List[Optional[float]]]


class SweepArtifacts(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: SweepConfig
    kappa_scale: float
    left_elastic_constants: Tuple[float, float, float]
    right_elastic_constants: Tuple[float, float, float]
    resonant_frequencies: Tuple[float, float, float]
    intervals: Dict[str, Optional[SubluminalInterval]]
    typifying: Dict[Scenario, float]
    grid: List[float]
    records: List[FrequencyRecord]
    typifying_results: List[TypifyingResult] = Field(default_factory=list)
    jc_points: List[JCPoint] = Field(default_factory=list)
    dispersion: List[Tuple[str, str, float, float, float]] = Field(default_factory=list)
    files: Dict[str, str] = Field(default_factory=dict)

    @property
    def failed(self) -> int:
        return sum(1 for record in self.records if not record.ok)

    @property
    def failed_fraction(self) -> float:
        return self.failed / len(self.records) if self.records else 0.0
