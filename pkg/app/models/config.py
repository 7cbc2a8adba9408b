import math
from enum import Enum
from typing import Any, List, Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from typing_extensions import Self

from app.core.exceptions import ConfigValidationError
from app.core.model import energy_policy_from_db
from app.models.scenario import (
    EstimatorKind,
    FadingParams,
    FramePlan,
    InputKind,
    NoiseParams,
    Scenario,
    SensingModel,
)

# Busy-channel SNR at which P̄1/(B(σ_n²+σ_s²)) = 0.5
HALF_POWER_DB = 10.0 * math.log10(0.5)

SEED_MAX = 2**64 - 1


class SweepVariable(str, Enum):
    P_F = "p_f"
    P_D = "p_d"
    M = "m"
    SIGMA_RATIO = "sigma_s2_over_sigma_n2"
    MU0 = "mu0"
    MU1 = "mu1"
    SNR_IDLE_DB = "snr_idle_db"


class SeriesVariable(str, Enum):
    ALPHA = "alpha"
    P_F = "p_f"
    P_D = "p_d"
    M = "m"
    SIGMA_RATIO = "sigma_s2_over_sigma_n2"
    SNR_IDLE_DB = "snr_idle_db"


def _grid(start: float, stop: float, step: float) -> List[float]:
    count = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + i * step, 12) for i in range(count + 1)]


class SweepSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    variable: SweepVariable
    start: float = Field(..., alias="from")
    stop: float = Field(..., alias="to")
    step: float = Field(..., gt=0.0)

    @model_validator(mode="after")
    def _ordered(self) -> "SweepSpec":
        if self.start > self.stop:
            raise ValueError(f"sweep 'from' ({self.start}) must not exceed 'to' ({self.stop})")
        return self

    def values(self) -> List[float]:
        return _grid(self.start, self.stop, self.step)


class SeriesSpec(BaseModel):
    """One curve per value of ``name``; every row carries the value in a series column."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: SeriesVariable
    values: List[float] = Field(..., min_length=1)


class GridSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    m_min: int = Field(2, ge=2)
    m_max: int = Field(40, ge=2, description="Largest pilot period considered")
    m_values: Optional[List[int]] = Field(None, min_length=1)
    mu_step: float = Field(0.01, gt=0.0, le=0.5)
    mu_min: float = Field(0.0, ge=0.0, le=1.0)
    mu_max: float = Field(1.0, ge=0.0, le=1.0)
    mu0_values: Optional[List[float]] = Field(None, min_length=1)
    mu1_values: Optional[List[float]] = Field(None, min_length=1)
    joint: bool = Field(False, description="Evaluate every (mu0, mu1) pair")

    @model_validator(mode="after")
    def _non_empty(self) -> "GridSpec":
        if self.m_min > self.m_max:
            raise ValueError(f"m_min ({self.m_min}) must not exceed m_max ({self.m_max})")
        if self.mu_min > self.mu_max:
            raise ValueError(f"mu_min ({self.mu_min}) must not exceed mu_max ({self.mu_max})")
        if self.m_values is not None and min(self.m_values) < 2:
            raise ValueError("m_values must all be >= 2")
        for values in (self.mu0_values, self.mu1_values):
            if values is not None and not all(0.0 <= v <= 1.0 for v in values):
                raise ValueError("mu values must lie in [0, 1]")
        return self

    def m_grid(self) -> List[int]:
        if self.m_values is not None:
            return sorted(set(self.m_values))
        return list(range(self.m_min, self.m_max + 1))

    def _mu_grid(self, explicit: Optional[List[float]]) -> List[float]:
        if explicit is not None:
            return sorted(set(explicit))
        return _grid(self.mu_min, self.mu_max, self.mu_step)

    def mu0_grid(self) -> List[float]:
        return self._mu_grid(self.mu0_values)

    def mu1_grid(self) -> List[float]:
        return self._mu_grid(self.mu1_values)


class ExperimentConfig(BaseModel):
    """Flat experiment description; dB values are converted to linear ratios in ``scenario()``."""

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    name: str = Field("custom", description="Experiment name")
    description: str = Field("", description="Free-form description")

    alpha: float = Field(0.95, ge=0.0, le=1.0)
    sigma_r2: float = Field(1.0, gt=0.0)
    sigma_n2: float = Field(1.0, gt=0.0)
    sigma_s2: float = Field(1.0, ge=0.0)
    p_d: float = Field(0.9, ge=0.0, le=1.0)
    p_f: float = Field(0.2, ge=0.0, le=1.0)
    prior_busy: float = Field(0.2, ge=0.0, le=1.0)
    m: int = Field(10, ge=2)
    l_blocks: int = Field(10, ge=1)
    k_pilots: int = Field(1, ge=1)
    snr_idle_db: float = Field(10.0, description="P̄0/(Bσ_n²) in dB")
    snr_busy_db: Optional[float] = Field(HALF_POWER_DB, description="P̄1/(B(σ_n²+σ_s²)) in dB")
    mu0: float = Field(0.1, ge=0.0, le=1.0)
    mu1: float = Field(0.1, ge=0.0, le=1.0)
    pilot_energy_idle: Optional[float] = Field(None, ge=0.0)
    pilot_energy_busy: Optional[float] = Field(None, ge=0.0)
    interweave: bool = Field(False, description="Stay silent when the channel is sensed busy")
    sensed_idle_only: bool = Field(False, description="Report MSE given an idle decision only")

    sweep: Optional[SweepSpec] = None
    series: Optional[SeriesSpec] = None
    grid: GridSpec = Field(default_factory=GridSpec)

    trials: int = Field(10000, ge=1)
    inner_samples: int = Field(200, ge=1)
    seed: int = Field(0, ge=0, le=SEED_MAX)
    estimators: List[EstimatorKind] = Field(
        default_factory=lambda: [EstimatorKind.MMSE, EstimatorKind.LMMSE], min_length=1
    )
    inputs: List[InputKind] = Field(
        default_factory=lambda: [InputKind.BPSK, InputKind.GAUSSIAN], min_length=1
    )
    rate_estimator: EstimatorKind = EstimatorKind.MMSE
    output_path: Optional[str] = None

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> Self:
        """Validate raw config data, naming the offending key on failure."""
        try:
            return cls.model_validate(dict(data))
        except ValidationError as e:
            first = e.errors()[0]
            key = ".".join(str(part) for part in first["loc"]) or None
            raise ConfigValidationError(
                f"Invalid configuration at '{key}': {first['msg']}", key=key
            ) from e

    def with_updates(self, **updates: Any) -> Self:
        data = self.model_dump(mode="json", by_alias=True)
        data.update(updates)
        return type(self).from_mapping(data)

    def with_parameter(self, name: str, value: float) -> Self:
        """Return a copy with one sweep or series variable set."""
        if name == SweepVariable.SIGMA_RATIO.value:
            return self.with_updates(sigma_s2=value * self.sigma_n2)
        if name == SweepVariable.M.value:
            return self.with_updates(m=int(round(value)))
        if name not in {v.value for v in SweepVariable} | {v.value for v in SeriesVariable}:
            raise ConfigValidationError(f"Unknown sweep variable '{name}'", key="sweep.variable")
        return self.with_updates(**{name: value})

    def scenario(self) -> Scenario:
        noise = NoiseParams(sigma_n2=self.sigma_n2, sigma_s2=self.sigma_s2)
        energy = energy_policy_from_db(
            self.snr_idle_db,
            None if self.interweave else self.snr_busy_db,
            noise,
            mu_idle=self.mu0,
            mu_busy=self.mu1,
            pilot_energy_idle=self.pilot_energy_idle,
            pilot_energy_busy=0.0 if self.interweave else self.pilot_energy_busy,
        )
        try:
            frame = FramePlan(m=self.m, l_blocks=self.l_blocks, k_pilots=self.k_pilots)
        except ValidationError as e:
            raise ConfigValidationError(
                f"Invalid frame plan: {e.errors()[0]['msg']}", key="k_pilots"
            ) from e
        return Scenario(
            fading=FadingParams(alpha=self.alpha, sigma_r2=self.sigma_r2),
            noise=noise,
            sensing=SensingModel(p_d=self.p_d, p_f=self.p_f, prior_busy=self.prior_busy),
            frame=frame,
            energy=energy,
        )
