import logging
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from lyapunov.solver import CovarianceMatrix
from physics.errors import DomainError, NumericalError

logger = logging.getLogger(__name__)

PAIRING_RTOL = 1e-8
ZERO_CLAMP = 1e-12
MAX_LOG_NEGATIVITY = 50.0
VACUUM_NU = 0.5
# Relative slack below 1/2 still counted as separable (round-off on product states).
SEPARABLE_RTOL = 1e-10

PARTIAL_TRANSPOSE = np.diag([1.0, -1.0, 1.0, 1.0])


@dataclass(frozen=True)
class EntanglementResult:
    pair: tuple[str, str]
    nu_minus: float
    log_negativity: float
    entangled: bool


def symplectic_form(n_modes: int) -> np.ndarray:
    """Direct sum of [[0, 1], [-1, 0]] over the (x, y) pairs of each mode."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def reduce(cm: CovarianceMatrix, pair: tuple[str, str]) -> np.ndarray:
    """4x4 covariance matrix of two modes: the other modes' rows and columns removed."""
    first, second = pair
    if first == second:
        raise DomainError(f"A bipartition needs two distinct modes, got ({first}, {second})")
    unknown = [mode for mode in pair if mode not in cm.mode_labels]
    if unknown:
        raise DomainError(f"Unknown mode(s) {unknown}; expected one of {list(cm.mode_labels)}")
    indices = []
    for mode in pair:
        index = cm.mode_labels.index(mode)
        indices.extend([2 * index, 2 * index + 1])
    return cm.entries[np.ix_(indices, indices)]


def partial_transpose(cm4: np.ndarray) -> np.ndarray:
    """Flip the momentum quadrature of the first mode: P V P with P = diag(1, -1, 1, 1)."""
    return PARTIAL_TRANSPOSE @ cm4 @ PARTIAL_TRANSPOSE


def symplectic_spectrum(cm: np.ndarray) -> list[float]:
    """Symplectic eigenvalues of a 2n x 2n covariance matrix, ascending."""
    cm = np.asarray(cm, dtype=float)
    size = cm.shape[0]
    if cm.ndim != 2 or size != cm.shape[1] or size % 2:
        raise DomainError(f"Covariance matrix must be square of even size, got shape {cm.shape}")
    try:
        moduli = np.sort(np.abs(np.linalg.eigvals(1j * symplectic_form(size // 2) @ cm)))
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"Symplectic eigenvalue computation failed: {str(e)}") from e
    moduli[moduli < ZERO_CLAMP] = 0.0

    lower, upper = moduli[0::2], moduli[1::2]
    mismatch = np.abs(upper - lower)
    if np.any(mismatch > PAIRING_RTOL * np.maximum(upper, ZERO_CLAMP)):
        raise NumericalError(f"Eigenvalues of i*Omega*V do not pair (moduli {moduli.tolist()})")
    return [float(v) for v in 0.5 * (lower + upper)]


def is_physical(cm: CovarianceMatrix, tol: float = 1e-8) -> bool:
    """Uncertainty principle: every symplectic eigenvalue is at least 1/2."""
    return min(symplectic_spectrum(cm.entries)) >= VACUUM_NU - tol


def log_negativity(cm4: np.ndarray, pair: tuple[str, str] = ("mode1", "mode2")) -> EntanglementResult:
    nu_minus = min(symplectic_spectrum(partial_transpose(cm4)))
    entangled = nu_minus < VACUUM_NU * (1.0 - SEPARABLE_RTOL)
    if not entangled:
        value = 0.0
    elif nu_minus == 0.0:
        value = MAX_LOG_NEGATIVITY
    else:
        value = min(MAX_LOG_NEGATIVITY, -math.log(2.0 * nu_minus))
    return EntanglementResult(pair=tuple(pair), nu_minus=nu_minus, log_negativity=value, entangled=entangled)


def pair_log_negativity(cm: CovarianceMatrix, pair: tuple[str, str]) -> EntanglementResult:
    return log_negativity(reduce(cm, pair), pair)


def all_bipartite(cm: CovarianceMatrix) -> dict[tuple[str, str], EntanglementResult]:
    """Logarithmic negativity of every unordered pair of modes."""
    results = {pair: pair_log_negativity(cm, pair) for pair in combinations(cm.mode_labels, 2)}
    entangled = [f"{a}-{b}" for (a, b), result in results.items() if result.entangled]
    logger.debug(f"Entangled pairs: {entangled or 'none'}")
    return results
