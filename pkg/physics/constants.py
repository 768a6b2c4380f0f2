import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveFloat
from scipy import constants as codata

from physics.errors import DomainError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# Kerr coefficient of a 1-mm-diameter YIG sphere, rad/s.
REFERENCE_KERR = TWO_PI * 0.1e-9
REFERENCE_DIAMETER = 1e-3


class PhysicalConstants(BaseModel):
    """Constants of the YIG magnon system (SI units, angular frequencies)."""

    model_config = ConfigDict(frozen=True)

    hbar: PositiveFloat = codata.hbar
    k_B: PositiveFloat = codata.k
    gamma_gyro: PositiveFloat = TWO_PI * 28e9
    rho_spin: PositiveFloat = 4.22e27
    s_spin: PositiveFloat = 2.5


DEFAULT_CONSTANTS = PhysicalConstants()


class SphereProps(BaseModel):
    model_config = ConfigDict(frozen=True)

    diameter: PositiveFloat
    volume: PositiveFloat
    n_spins: PositiveFloat
    kerr_coeff: PositiveFloat


def sphere_volume(diameter: float) -> float:
    return math.pi / 6.0 * diameter**3


def derive_sphere(diameter: float, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> SphereProps:
    """Volume, spin count and Kerr coefficient of a YIG sphere of the given diameter (m).

    The Kerr coefficient scales inversely with the volume, anchored at 0.1 nHz for 1 mm.
    """
    if not diameter > 0:
        raise DomainError(f"Sphere diameter must be positive, got {diameter}")
    volume = sphere_volume(diameter)
    kerr = REFERENCE_KERR * sphere_volume(REFERENCE_DIAMETER) / volume
    return SphereProps(
        diameter=diameter,
        volume=volume,
        n_spins=constants.rho_spin * volume,
        kerr_coeff=kerr,
    )


def rabi_frequency(b_field: float, sphere: SphereProps, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Rabi frequency (rad/s) of the drive field amplitude b_field (T) on the Kittel mode."""
    if b_field < 0:
        raise DomainError(f"Drive field amplitude must be non-negative, got {b_field}")
    return math.sqrt(5.0) / 4.0 * constants.gamma_gyro * math.sqrt(sphere.n_spins) * b_field


def field_for_rabi(rabi: float, sphere: SphereProps, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Inverse of rabi_frequency: the field amplitude (T) producing the Rabi frequency (rad/s)."""
    if rabi < 0:
        raise DomainError(f"Rabi frequency must be non-negative, got {rabi}")
    return rabi / (math.sqrt(5.0) / 4.0 * constants.gamma_gyro * math.sqrt(sphere.n_spins))


def thermal_occupancy(omega: float, temperature: float, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Bose-Einstein occupancy [exp(hbar*omega/k_B T) - 1]^-1 of a bath at temperature T."""
    if not omega > 0:
        raise DomainError(f"Mode frequency must be positive, got {omega}")
    if temperature < 0:
        raise DomainError(f"Temperature must be non-negative, got {temperature}")
    if temperature == 0:
        return 0.0
    x = constants.hbar * omega / constants.k_B / temperature
    with np.errstate(over="ignore"):
        return float(1.0 / np.expm1(x))
