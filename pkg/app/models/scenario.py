from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing_extensions import Self


class Hypothesis(str, Enum):
    """Primary-user state. Used both for the true state H_i and the sensing decision Ĥ_j."""

    IDLE = "idle"
    BUSY = "busy"

    @property
    def index(self) -> int:
        return 0 if self is Hypothesis.IDLE else 1

    @classmethod
    def from_index(cls, index: int) -> "Hypothesis":
        return cls.IDLE if index == 0 else cls.BUSY


class EstimatorKind(str, Enum):
    MMSE = "mmse"
    LMMSE = "lmmse"


class InputKind(str, Enum):
    BPSK = "bpsk"
    GAUSSIAN = "gaussian"


class FadingParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(0.95, ge=0.0, le=1.0, description="Per-symbol correlation coefficient")
    sigma_r2: float = Field(1.0, gt=0.0, description="Fading power")


class NoiseParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    sigma_n2: float = Field(1.0, gt=0.0, description="Additive noise variance")
    sigma_s2: float = Field(1.0, ge=0.0, description="Primary-user interference power")


class SensingModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    p_d: float = Field(0.9, ge=0.0, le=1.0, description="Detection probability")
    p_f: float = Field(0.2, ge=0.0, le=1.0, description="False-alarm probability")
    prior_busy: float = Field(0.2, ge=0.0, le=1.0, description="Pr{H1}")

    @property
    def prior_idle(self) -> float:
        return 1.0 - self.prior_busy

    def prob_busy_decision_given(self, true_state: Hypothesis) -> float:
        """Pr{Ĥ1 | H_i}."""
        return self.p_d if true_state is Hypothesis.BUSY else self.p_f


class FramePlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int = Field(10, ge=2, description="Pilot period M = TB in symbols")
    l_blocks: int = Field(10, ge=1, description="Blocks per frame L")
    k_pilots: int = Field(1, ge=1, description="Number of past pilots K used for estimation")

    @model_validator(mode="after")
    def _pilots_fit_in_frame(self) -> "FramePlan":
        if self.k_pilots > self.l_blocks:
            raise ValueError(
                f"k_pilots ({self.k_pilots}) cannot exceed l_blocks ({self.l_blocks})"
            )
        return self

    @property
    def block_length(self) -> int:
        """Length of the estimated vector r_l: K pilot-time coefficients plus M-1 data ones."""
        return self.k_pilots + self.m - 1

    def symbol_times(self) -> List[int]:
        """Symbol indices of the entries of r_l relative to the current pilot at time 0."""
        pilots = [-(self.k_pilots - 1 - c) * self.m for c in range(self.k_pilots)]
        return pilots + list(range(1, self.m))


class EnergyPolicy(BaseModel):
    """Two-level power policy and training split.

    Powers are linear SNR ratios referenced to the noise: ``snr_idle = P̄0/(Bσ_n²)`` and
    ``snr_busy = P̄1/(Bσ_n²)``. ``pilot_energy_idle``/``pilot_energy_busy`` pin E_t,j
    directly instead of deriving it from the training fraction.
    """

    model_config = ConfigDict(frozen=True)

    snr_idle: float = Field(10.0, ge=0.0)
    snr_busy: float = Field(1.0, ge=0.0)
    mu_idle: float = Field(0.1, ge=0.0, le=1.0)
    mu_busy: float = Field(0.1, ge=0.0, le=1.0)
    pilot_energy_idle: Optional[float] = Field(None, ge=0.0)
    pilot_energy_busy: Optional[float] = Field(None, ge=0.0)

    def snr(self, decision: Hypothesis) -> float:
        return self.snr_idle if decision is Hypothesis.IDLE else self.snr_busy

    def mu(self, decision: Hypothesis) -> float:
        return self.mu_idle if decision is Hypothesis.IDLE else self.mu_busy

    def fixed_pilot_energy(self, decision: Hypothesis) -> Optional[float]:
        return self.pilot_energy_idle if decision is Hypothesis.IDLE else self.pilot_energy_busy


class Scenario(BaseModel):
    model_config = ConfigDict(frozen=True)

    fading: FadingParams = Field(default_factory=FadingParams)
    noise: NoiseParams = Field(default_factory=NoiseParams)
    sensing: SensingModel = Field(default_factory=SensingModel)
    frame: FramePlan = Field(default_factory=FramePlan)
    energy: EnergyPolicy = Field(default_factory=EnergyPolicy)

    def with_frame(self, **updates: int) -> Self:
        frame = FramePlan.model_validate({**self.frame.model_dump(), **updates})
        return self.model_copy(update={"frame": frame})

    def with_energy(self, **updates: object) -> Self:
        energy = EnergyPolicy.model_validate({**self.energy.model_dump(), **updates})
        return self.model_copy(update={"energy": energy})
