import logging
from typing import Optional

from pydantic import BaseModel, ConfigDict, PositiveFloat

from dynamics.matrices import DriftMatrix
from dynamics.stability import check_stability
from physics.constants import DEFAULT_CONSTANTS, PhysicalConstants
from physics.params import MARKOV_Q_WARNING, SystemParams
from steadystate.solver import ModeAmplitudes

logger = logging.getLogger(__name__)


class ValidityThresholds(BaseModel):
    """Numeric stand-ins for the "much less than" conditions of the linearized model."""

    model_config = ConfigDict(frozen=True)

    excitation_ratio: PositiveFloat = 0.01
    kerr_ratio: PositiveFloat = 0.1
    markov_q: PositiveFloat = MARKOV_Q_WARNING


class ValidityReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    excitation_ratio_1: float
    excitation_ratio_2: float
    kerr_ratio: float
    markov_q: float
    stable: bool
    max_re_eig: float
    n_spins: float
    rabi: float
    kerr_shift: float
    violations: list[str]

    @property
    def valid(self) -> bool:
        return not self.violations


def audit_validity(
    params: SystemParams,
    amplitudes: ModeAmplitudes,
    drift: DriftMatrix,
    thresholds: Optional[ValidityThresholds] = None,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> ValidityReport:
    """Check low excitation (Holstein-Primakoff), negligible Kerr shift, Markov regime and stability."""
    thresholds = thresholds or ValidityThresholds()
    n_spins = params.sphere.n_spins
    capacity = 2.0 * n_spins * constants.s_spin
    ratio_1 = amplitudes.occupation("magnon1") / capacity
    ratio_2 = amplitudes.occupation("magnon2") / capacity

    kerr_shift = params.sphere.kerr_coeff * abs(amplitudes.m1_avg) ** 3
    kerr_ratio = kerr_shift / amplitudes.rabi if kerr_shift > 0 else 0.0
    stability = check_stability(drift)

    violations = []
    if ratio_1 >= thresholds.excitation_ratio:
        violations.append(f"magnon1 excitation ratio {ratio_1:.3e} >= {thresholds.excitation_ratio}")
    if ratio_2 >= thresholds.excitation_ratio:
        violations.append(f"magnon2 excitation ratio {ratio_2:.3e} >= {thresholds.excitation_ratio}")
    if kerr_ratio >= thresholds.kerr_ratio:
        violations.append(f"Kerr ratio {kerr_ratio:.3e} >= {thresholds.kerr_ratio}")
    if params.quality_factor < thresholds.markov_q:
        violations.append(f"mechanical Q {params.quality_factor:.1f} < {thresholds.markov_q}")
    if not stability.stable:
        violations.append(f"unstable drift (max Re(eig) = {stability.max_re_eig:.3e} rad/s)")
    if violations:
        logger.debug(f"Validity violations: {violations}")

    return ValidityReport(
        excitation_ratio_1=ratio_1,
        excitation_ratio_2=ratio_2,
        kerr_ratio=kerr_ratio,
        markov_q=params.quality_factor,
        stable=stability.stable,
        max_re_eig=stability.max_re_eig,
        n_spins=n_spins,
        rabi=amplitudes.rabi,
        kerr_shift=kerr_shift,
        violations=violations,
    )
