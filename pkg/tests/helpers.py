import math

import numpy as np

from physics.constants import TWO_PI
from physics.params import DriveMode, EffectiveDrive, PhysicalDrive, SystemParams

OMEGA_B = TWO_PI * 10e6
KAPPA = TWO_PI * 1e6
G_BASELINE = TWO_PI * 4.8e6


def physical_variant(params: SystemParams, delta_1: float, rabi: float | None = None, b_field: float | None = None, **updates) -> SystemParams:
    data = params.model_dump()
    data.update(updates)
    data["drive_mode"] = DriveMode.PHYSICAL
    data["effective"] = None
    data["physical"] = PhysicalDrive(delta_1=delta_1, rabi=rabi, b_field=b_field).model_dump()
    return SystemParams.model_validate(data)


def effective_variant(params: SystemParams, delta_1_tilde: float, g_eff: float, **updates) -> SystemParams:
    data = params.model_dump()
    data.update(updates)
    data["drive_mode"] = DriveMode.EFFECTIVE
    data["physical"] = None
    data["effective"] = EffectiveDrive(delta_1_tilde=delta_1_tilde, g_eff=g_eff).model_dump()
    return SystemParams.model_validate(data)


def rotation(theta: float) -> np.ndarray:
    return np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])


def two_mode_squeezed_vacuum(r: float) -> np.ndarray:
    c, s = math.cosh(2 * r), math.sinh(2 * r)
    z = np.diag([1.0, -1.0])
    return 0.5 * np.block([[c * np.eye(2), s * z], [s * z, c * np.eye(2)]])
