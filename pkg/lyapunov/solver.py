import logging
import math
from dataclasses import dataclass, field

import numpy as np

from dynamics.matrices import MODE_LABELS, DiffusionMatrix, DriftMatrix
from dynamics.stability import check_stability
from physics.errors import NumericalError, StabilityError

logger = logging.getLogger(__name__)

RESIDUAL_RTOL = 1e-8
# Recommended oracle step as a fraction of 1/||A||.
STEP_FRACTION = 0.01
MAX_REFINEMENTS = 6


def _default_labels(size: int) -> tuple[str, ...]:
    if size == 2 * len(MODE_LABELS):
        return MODE_LABELS
    return tuple(f"mode{i + 1}" for i in range(size // 2))


@dataclass(frozen=True)
class CovarianceMatrix:
    """Symmetric covariance matrix of the quadrature fluctuations (vacuum variance 1/2)."""

    entries: np.ndarray
    mode_labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", 0.5 * (entries + entries.T))
        if not self.mode_labels:
            object.__setattr__(self, "mode_labels", _default_labels(entries.shape[0]))

    def block(self, mode: str) -> np.ndarray:
        index = self.mode_labels.index(mode)
        return self.entries[2 * index:2 * index + 2, 2 * index:2 * index + 2]


def _require_stable(drift: DriftMatrix):
    stability = check_stability(drift)
    if not stability.stable:
        raise StabilityError(f"Drift matrix is not stable (max Re(eig) = {stability.max_re_eig:.3e} rad/s)")
    return stability


def _lyapunov_operator(a: np.ndarray) -> np.ndarray:
    """Kronecker-sum matrix L with vec(A V + V A^T) = L vec(V) (row-major vec)."""
    identity = np.eye(a.shape[0])
    return np.kron(a, identity) + np.kron(identity, a)


def lyapunov_residual(drift: DriftMatrix, diffusion: DiffusionMatrix, cm: CovarianceMatrix) -> float:
    a, v = drift.entries, cm.entries
    return float(np.linalg.norm(a @ v + v @ a.T + diffusion.entries, "fro"))


def solve_steady(drift: DriftMatrix, diffusion: DiffusionMatrix) -> CovarianceMatrix:
    """Stationary covariance matrix from A V + V A^T = -D, solved as one dense linear system."""
    _require_stable(drift)
    n = drift.size
    try:
        vec = np.linalg.solve(_lyapunov_operator(drift.entries), -diffusion.entries.reshape(n * n))
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"Lyapunov linear system is singular: {str(e)}") from e
    cm = CovarianceMatrix(vec.reshape(n, n))

    residual = lyapunov_residual(drift, diffusion, cm)
    limit = RESIDUAL_RTOL * np.linalg.norm(diffusion.entries, "fro")
    if residual > limit:
        raise NumericalError(f"Lyapunov residual {residual:.3e} exceeds {limit:.3e}")
    return cm


def _rk4_affine_map(operator: np.ndarray, source: np.ndarray, step: float) -> tuple[np.ndarray, np.ndarray]:
    """One classical RK4 step of dv/dt = L v + d, written as v -> P v + c."""
    z = step * operator
    identity = np.eye(operator.shape[0])
    z2 = z @ z
    z3 = z2 @ z
    propagator = identity + z + z2 / 2 + z3 / 6 + z3 @ z / 24
    forcing = step * (identity + z / 2 + z2 / 6 + z3 / 24) @ source
    return propagator, forcing


def _propagate(propagator: np.ndarray, forcing: np.ndarray, steps: int, start: np.ndarray) -> np.ndarray:
    """Apply the affine step map `steps` times by repeated squaring."""
    acc_p, acc_c = np.eye(propagator.shape[0]), np.zeros_like(forcing)
    base_p, base_c = propagator, forcing
    while steps:
        if steps & 1:
            acc_p, acc_c = base_p @ acc_p, base_p @ acc_c + base_c
        base_p, base_c = base_p @ base_p, base_p @ base_c + base_c
        steps >>= 1
    return acc_p @ start + acc_c


def _integrate_fixed_step(operator, source, start, horizon: float, step: float) -> np.ndarray:
    steps = max(1, math.ceil(horizon / step))
    propagator, forcing = _rk4_affine_map(operator, source, horizon / steps)
    radius = float(np.max(np.abs(np.linalg.eigvals(propagator))))
    if radius >= 1.0:
        raise NumericalError(
            f"RK4 step {horizon / steps:.3e} s is unstable (amplification {radius:.6f}); use a smaller step"
        )
    return _propagate(propagator, forcing, steps, start)


def integrate_to_steady(
    drift: DriftMatrix,
    diffusion: DiffusionMatrix,
    horizon: float,
    step: float | None = None,
    atol: float = 1e-9,
) -> CovarianceMatrix:
    """Cross-check oracle: integrate dV/dt = A V + V A^T + D from V(0) = I/2 up to `horizon` seconds.

    The step is halved until two successive resolutions agree within atol.
    """
    stability = _require_stable(drift)
    if horizon * abs(stability.max_re_eig) < 10:
        logger.warning(f"Horizon {horizon:.3e} s is short against the slowest decay time {1 / abs(stability.max_re_eig):.3e} s")

    n = drift.size
    recommended = STEP_FRACTION / np.linalg.norm(drift.entries, 2)
    if step is None:
        step = recommended
    elif step > recommended:
        logger.warning(f"Step {step:.3e} s exceeds the recommended {recommended:.3e} s")

    operator = _lyapunov_operator(drift.entries)
    source = diffusion.entries.reshape(n * n)
    start = 0.5 * np.eye(n).reshape(n * n)

    coarse = _integrate_fixed_step(operator, source, start, horizon, step)
    for _ in range(MAX_REFINEMENTS):
        step /= 2
        fine = _integrate_fixed_step(operator, source, start, horizon, step)
        error = float(np.max(np.abs(fine - coarse)))
        if error <= atol * max(1.0, float(np.max(np.abs(fine)))):
            logger.debug(f"Oracle integration converged at step {step:.3e} s (error {error:.3e})")
            return CovarianceMatrix(fine.reshape(n, n))
        coarse = fine
    raise NumericalError(f"Oracle integration did not reach tolerance {atol:.1e} (last change {error:.3e})")
