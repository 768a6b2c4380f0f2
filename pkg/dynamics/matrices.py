import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from physics.constants import DEFAULT_CONSTANTS, PhysicalConstants
from physics.params import SystemParams, thermal_occupancies
from steadystate.solver import ModeAmplitudes

logger = logging.getLogger(__name__)

MODE_LABELS = ("cavity", "magnon1", "magnon2", "mechanics")
QUADRATURE_LABELS = ("X", "Y", "x1", "y1", "x2", "y2", "q", "p")


def mode_slice(mode: str) -> slice:
    """Quadrature indices (x, y) of a mode in the fluctuation vector."""
    index = MODE_LABELS.index(mode)
    return slice(2 * index, 2 * index + 2)


@dataclass(frozen=True)
class DriftMatrix:
    """Drift matrix A (rad/s) of du/dt = A u + n.

    omega_b is carried along so stability can be judged against the mechanical frequency.
    """

    entries: np.ndarray
    omega_b: Optional[float] = None

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class DiffusionMatrix:
    entries: np.ndarray

    @property
    def size(self) -> int:
        return self.entries.shape[0]


def build_drift(params: SystemParams, amplitudes: ModeAmplitudes) -> DriftMatrix:
    """Linearized drift matrix over (dX, dY, dx1, dy1, dx2, dy2, dq, dp) in the real-G gauge."""
    d_a, d_1, d_2 = params.delta_a, amplitudes.delta_1_tilde, params.delta_2
    k_a, k_1, k_2 = params.kappa_a, params.kappa_1, params.kappa_2
    g_1, g_2, G = params.g_1, params.g_2, amplitudes.g_eff
    w_b, gamma_b = params.omega_b, params.gamma_b

    drift = np.array(
        [
            [-k_a, d_a, 0.0, g_1, 0.0, g_2, 0.0, 0.0],
            [-d_a, -k_a, -g_1, 0.0, -g_2, 0.0, 0.0, 0.0],
            [0.0, g_1, -k_1, d_1, 0.0, 0.0, -G, 0.0],
            [-g_1, 0.0, -d_1, -k_1, 0.0, 0.0, 0.0, 0.0],
            [0.0, g_2, 0.0, 0.0, -k_2, d_2, 0.0, 0.0],
            [-g_2, 0.0, 0.0, 0.0, -d_2, -k_2, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, w_b],
            [0.0, 0.0, 0.0, G, 0.0, 0.0, -w_b, -gamma_b],
        ]
    )
    return DriftMatrix(entries=drift, omega_b=w_b)


def build_diffusion(params: SystemParams, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> DiffusionMatrix:
    """Diagonal diffusion matrix of the symmetrized input-noise correlations."""
    baths = thermal_occupancies(params, constants)
    cavity = params.kappa_a * (2 * baths.cavity + 1)
    magnon1 = params.kappa_1 * (2 * baths.magnon1 + 1)
    magnon2 = params.kappa_2 * (2 * baths.magnon2 + 1)
    mechanics = params.gamma_b * (2 * baths.mechanics + 1)
    logger.debug(f"Bath occupancies at T={params.temperature} K: {baths}")
    return DiffusionMatrix(entries=np.diag([cavity, cavity, magnon1, magnon1, magnon2, magnon2, 0.0, mechanics]))
