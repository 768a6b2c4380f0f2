import logging
from dataclasses import dataclass

import numpy as np

from dynamics.matrices import DriftMatrix
from physics.errors import NumericalError

logger = logging.getLogger(__name__)

# Stability margin relative to omega_b; near-marginal drifts give ill-conditioned Lyapunov solves.
STABILITY_MARGIN = 1e-6


@dataclass(frozen=True)
class StabilityResult:
    stable: bool
    max_re_eig: float
    eigenvalues: list[complex]


def check_stability(drift: DriftMatrix) -> StabilityResult:
    try:
        eigenvalues = np.linalg.eigvals(drift.entries)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"Eigenvalue computation of the drift matrix failed: {str(e)}") from e
    if not np.all(np.isfinite(eigenvalues)):
        raise NumericalError("Drift matrix eigenvalues are not finite")

    max_re = float(np.max(eigenvalues.real))
    margin = STABILITY_MARGIN * drift.omega_b if drift.omega_b else 0.0
    stable = max_re < -margin
    if not stable:
        logger.debug(f"Drift matrix unstable: max Re(eig) = {max_re:.3e} rad/s")
    return StabilityResult(stable=stable, max_re_eig=max_re, eigenvalues=[complex(e) for e in eigenvalues])
