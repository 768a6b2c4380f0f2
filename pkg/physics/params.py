import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, NonNegativeFloat, PositiveFloat, model_validator

from physics.constants import DEFAULT_CONSTANTS, PhysicalConstants, SphereProps, rabi_frequency, thermal_occupancy
from physics.errors import DomainError

logger = logging.getLogger(__name__)

MARKOV_Q_WARNING = 100.0


class DriveMode(str, Enum):
    EFFECTIVE = "effective"
    PHYSICAL = "physical"


class EffectiveDrive(BaseModel):
    """Drive specified through its effect: effective detuning and enhanced coupling G."""

    model_config = ConfigDict(frozen=True)

    delta_1_tilde: float
    g_eff: NonNegativeFloat


class PhysicalDrive(BaseModel):
    """Drive specified physically: bare detuning plus a Rabi frequency or a field amplitude."""

    model_config = ConfigDict(frozen=True)

    delta_1: float
    rabi: Optional[NonNegativeFloat] = None
    b_field: Optional[NonNegativeFloat] = None

    @model_validator(mode="after")
    def _one_drive_strength(self):
        if (self.rabi is None) == (self.b_field is None):
            raise ValueError("physical drive needs exactly one of rabi or b_field")
        return self


class SystemParams(BaseModel):
    """Physical description of the cavity + two magnons + phonon system.

    All frequencies, detunings and rates are angular (rad/s); dissipation rates are
    amplitude rates as they appear in the Langevin equations.
    """

    model_config = ConfigDict(frozen=True)

    omega_a: PositiveFloat
    omega_b: PositiveFloat
    delta_a: float
    delta_2: float
    kappa_a: PositiveFloat
    kappa_1: PositiveFloat
    kappa_2: PositiveFloat
    gamma_b: PositiveFloat
    g_1: float
    g_2: float
    g_0: NonNegativeFloat
    temperature: NonNegativeFloat
    sphere: SphereProps
    drive_mode: DriveMode
    effective: Optional[EffectiveDrive] = None
    physical: Optional[PhysicalDrive] = None

    @model_validator(mode="after")
    def _check_drive_block(self):
        if self.drive_mode is DriveMode.EFFECTIVE and (self.effective is None or self.physical is not None):
            raise ValueError("effective drive mode needs the effective block and no physical block")
        if self.drive_mode is DriveMode.PHYSICAL and (self.physical is None or self.effective is not None):
            raise ValueError("physical drive mode needs the physical block and no effective block")
        if self.quality_factor < MARKOV_Q_WARNING:
            logger.warning(f"Mechanical quality factor {self.quality_factor:.1f} is low; Markov approximation is doubtful")
        return self

    @property
    def omega_0(self) -> float:
        """Drive frequency, reconstructed from the cavity detuning."""
        return self.omega_a - self.delta_a

    @property
    def quality_factor(self) -> float:
        return self.omega_b / self.gamma_b

    def with_updates(self, **changes: Any) -> "SystemParams":
        """Validated copy with top-level fields (or drive blocks) replaced."""
        data = self.model_dump()
        for key, value in changes.items():
            if isinstance(value, BaseModel):
                value = value.model_dump()
            data[key] = value
        return SystemParams.model_validate(data)

    def resolved_rabi(self, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
        if self.physical is None:
            raise DomainError("Rabi frequency is only defined for a physically specified drive")
        if self.physical.rabi is not None:
            return self.physical.rabi
        return rabi_frequency(self.physical.b_field, self.sphere, constants)


@dataclass(frozen=True)
class BathOccupancies:
    cavity: float
    magnon1: float
    magnon2: float
    mechanics: float


def magnon_frequencies(params: SystemParams) -> tuple[float, float]:
    """Lab-frame magnon frequencies (omega_1, omega_2) rebuilt from the rotating-frame detunings."""
    if params.drive_mode is DriveMode.EFFECTIVE:
        delta_1 = params.effective.delta_1_tilde
    else:
        delta_1 = params.physical.delta_1
    return delta_1 + params.omega_0, params.delta_2 + params.omega_0


def thermal_occupancies(params: SystemParams, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> BathOccupancies:
    omega_1, omega_2 = magnon_frequencies(params)
    temperature = params.temperature
    return BathOccupancies(
        cavity=thermal_occupancy(params.omega_a, temperature, constants),
        magnon1=thermal_occupancy(omega_1, temperature, constants),
        magnon2=thermal_occupancy(omega_2, temperature, constants),
        mechanics=thermal_occupancy(params.omega_b, temperature, constants),
    )
