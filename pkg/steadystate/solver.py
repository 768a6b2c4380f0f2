import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from physics.constants import DEFAULT_CONSTANTS, PhysicalConstants
from physics.errors import ConvergenceError, DomainError, InconsistentParametersError, SingularConfigurationError
from physics.params import DriveMode, SystemParams

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000
RELAXATION = 0.5
# Detunings closer than this multiple of the largest dissipation rate void the closed forms.
LARGE_DETUNING_FACTOR = 10.0
_SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class ModeAmplitudes:
    """Semiclassical steady-state amplitudes and the effective magnomechanical coupling.

    g_eff is the modulus of G = i*sqrt(2)*G0*<m1>; gauge_phase is arg(G), i.e. the local
    rotation applied to the m1 quadratures so that the drift matrix carries a real coupling.
    """

    a_avg: complex
    m1_avg: complex
    m2_avg: complex
    q_avg: float
    p_avg: float
    delta_1_tilde: float
    g_eff: float
    gauge_phase: float
    rabi: float
    bistable: bool = False
    residual: float = 0.0

    def occupation(self, mode: str) -> float:
        """Mean excitation number <O^dag O> ~ |<O>|^2 of the cavity or a magnon mode."""
        amplitudes = {"cavity": self.a_avg, "magnon1": self.m1_avg, "magnon2": self.m2_avg}
        if mode not in amplitudes:
            raise DomainError(f"No coherent amplitude for mode {mode}")
        return abs(amplitudes[mode]) ** 2


def _warn_small_detunings(params: SystemParams, delta_1: float):
    kappa_max = max(params.kappa_a, params.kappa_1, params.kappa_2)
    smallest = min(abs(params.delta_a), abs(delta_1), abs(params.delta_2))
    if smallest < LARGE_DETUNING_FACTOR * kappa_max:
        logger.warning(
            f"Smallest detuning {smallest:.3e} rad/s is not large against dissipation {kappa_max:.3e} rad/s; "
            "large-detuning amplitudes are approximate"
        )


def _zero_drive(delta_1_tilde: float) -> ModeAmplitudes:
    return ModeAmplitudes(0j, 0j, 0j, 0.0, 0.0, delta_1_tilde, 0.0, 0.0, 0.0)


def _cubic_denominator(params: SystemParams, delta_1_tilde: float) -> float:
    d_a, d_2 = params.delta_a, params.delta_2
    g1_sq, g2_sq = params.g_1**2, params.g_2**2
    den = d_a * delta_1_tilde * d_2 - g1_sq * d_2 - g2_sq * delta_1_tilde
    scale = abs(d_a * delta_1_tilde * d_2) + g1_sq * abs(d_2) + g2_sq * abs(delta_1_tilde)
    if d_2 == 0 or scale == 0 or abs(den) <= _SINGULAR_RTOL * scale:
        raise SingularConfigurationError(
            f"Steady-state denominator vanishes (delta_2={d_2:.6e}, denominator={den:.3e})"
        )
    return den


def coupling_from_rabi(params: SystemParams, rabi: float, delta_1_tilde: float | None = None) -> float:
    """Forward large-detuning expression for G given the Rabi frequency (both rad/s)."""
    if delta_1_tilde is None:
        if params.effective is None:
            raise DomainError("delta_1_tilde is required when the drive is not given in effective form")
        delta_1_tilde = params.effective.delta_1_tilde
    den = _cubic_denominator(params, delta_1_tilde)
    return math.sqrt(2.0) * params.g_0 * rabi * (params.delta_2 * params.delta_a - params.g_2**2) / den


def approximate_coupling(params: SystemParams, rabi: float) -> float:
    """Shortcut G ~ sqrt(2) G0 Omega / omega_b, valid when g1^2, g2^2 << omega_b^2."""
    return math.sqrt(2.0) * params.g_0 * rabi / params.omega_b


def solve_effective(params: SystemParams, quiet: bool = False) -> ModeAmplitudes:
    """Amplitudes implied by a fixed effective detuning and coupling (large-detuning closed forms).

    The Rabi frequency is back-solved from the coupling; its sign is absorbed in the drive phase
    and the magnitude is reported.
    """
    if params.drive_mode is not DriveMode.EFFECTIVE:
        raise DomainError("solve_effective needs a drive given in effective form")
    drive = params.effective
    if not quiet:
        _warn_small_detunings(params, drive.delta_1_tilde)
    if drive.g_eff == 0:
        return _zero_drive(drive.delta_1_tilde)
    if params.g_0 == 0:
        raise InconsistentParametersError("Nonzero effective coupling requires a nonzero single-magnon coupling G0")

    den = _cubic_denominator(params, drive.delta_1_tilde)
    swap = params.delta_2 * params.delta_a - params.g_2**2
    if swap == 0:
        raise SingularConfigurationError("Delta_2 * Delta_a = g_2^2: the coupling cannot be reached by any drive")

    m1_abs = drive.g_eff / (math.sqrt(2.0) * params.g_0)
    rabi = drive.g_eff * den / (math.sqrt(2.0) * params.g_0 * swap)
    a_avg = 1j * params.g_1 * params.delta_2 * rabi / den
    m2_avg = -params.g_2 * a_avg / params.delta_2
    return ModeAmplitudes(
        a_avg=a_avg,
        m1_avg=-1j * m1_abs,
        m2_avg=m2_avg,
        q_avg=-(params.g_0 / params.omega_b) * m1_abs**2,
        p_avg=0.0,
        delta_1_tilde=drive.delta_1_tilde,
        g_eff=drive.g_eff,
        gauge_phase=0.0,
        rabi=abs(rabi),
    )


class _IntensityEquation:
    """Self-consistency of |<m1>|^2 once <a> and <m2> are eliminated.

    <m1> = Omega / (i(Delta_1 - beta n) + kappa_1 + s) with n = |<m1>|^2, beta = G0^2/omega_b and
    s = g1^2 / (i Delta_a + kappa_a + g2^2/(i Delta_2 + kappa_2)).
    """

    def __init__(self, params: SystemParams, rabi: float):
        self.params = params
        self.rabi = rabi
        self.beta = params.g_0**2 / params.omega_b
        self.chi_2 = 1j * params.delta_2 + params.kappa_2
        self.chi_a = 1j * params.delta_a + params.kappa_a + params.g_2**2 / self.chi_2
        self.s = params.g_1**2 / self.chi_a
        self.delta_1 = params.physical.delta_1

    def denominator(self, n: float) -> complex:
        return 1j * (self.delta_1 - self.beta * n) + self.params.kappa_1 + self.s

    def step(self, m1: complex) -> complex:
        return self.rabi / self.denominator(abs(m1) ** 2)

    def intensity_mismatch(self, n: float) -> float:
        return n * abs(self.denominator(n)) ** 2 - self.rabi**2

    def positive_roots(self) -> np.ndarray:
        """Real positive roots of the cubic in n, ascending."""
        k = self.params.kappa_1 + self.s.real
        u = self.delta_1 + self.s.imag
        norm = k * k + u * u
        n0 = self.rabi**2 / norm
        shift = self.beta * n0
        roots = np.roots([shift**2 / norm, -2.0 * shift * u / norm, 1.0, -1.0])
        real = roots[np.abs(roots.imag) <= 1e-9 * np.maximum(1.0, np.abs(roots))].real
        return np.sort(real[real > 0]) * n0

    def upper_bound(self) -> float:
        return 2.0 * self.rabi**2 / (self.params.kappa_1 + self.s.real) ** 2


def _picard(equation: _IntensityEquation, tol: float, max_iter: int) -> tuple[complex | None, float]:
    """Damped fixed-point iteration from zero; returns (m1, or None when it stalls, last residual)."""
    m1 = 0j
    residual = math.inf
    rising = 0
    for _ in range(max_iter):
        new = equation.step(m1)
        m1_next = (1.0 - RELAXATION) * m1 + RELAXATION * new
        next_residual = abs(m1_next - equation.step(m1_next)) / abs(m1_next)
        rising = rising + 1 if next_residual >= residual else 0
        m1, residual = m1_next, next_residual
        if residual < 0.1 * tol:
            return m1, residual
        if rising >= 20:
            logger.debug(f"Picard iteration oscillating at residual {residual:.3e}")
            return None, residual
    logger.debug(f"Picard iteration not converged after {max_iter} steps (residual {residual:.3e})")
    return None, residual


def _lowest_branch(equation: _IntensityEquation, roots: np.ndarray, tol: float) -> complex:
    """Lowest fixed point by bisection on n = |<m1>|^2."""
    if len(roots) >= 2:
        upper = 0.5 * (roots[0] + roots[1])
    elif len(roots) == 1 and equation.intensity_mismatch(2.0 * roots[0]) > 0:
        upper = 2.0 * roots[0]
    else:
        upper = equation.upper_bound()
    scale = roots[0] if len(roots) else upper
    n = optimize.bisect(equation.intensity_mismatch, 0.0, upper, xtol=tol * scale * 1e-3, rtol=4 * np.finfo(float).eps)
    return equation.rabi / equation.denominator(n)


def _residuals(params: SystemParams, rabi: float, a: complex, m1: complex, m2: complex, delta_1_tilde: float) -> float:
    res_a = (1j * params.delta_a + params.kappa_a) * a + 1j * (params.g_1 * m1 + params.g_2 * m2)
    res_m1 = (1j * delta_1_tilde + params.kappa_1) * m1 + 1j * params.g_1 * a - rabi
    res_m2 = (1j * params.delta_2 + params.kappa_2) * m2 + 1j * params.g_2 * a
    return max(abs(res_a), abs(res_m1), abs(res_m2))


def solve_physical(
    params: SystemParams,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> ModeAmplitudes:
    """Self-consistent fixed point of the full nonlinear steady-state equations (dissipation kept).

    When the intensity equation admits several fixed points the branch connected to zero drive is
    returned and flagged as bistable.
    """
    if params.drive_mode is not DriveMode.PHYSICAL:
        raise DomainError("solve_physical needs a physically specified drive")
    rabi = params.resolved_rabi(constants)
    if rabi == 0:
        return _zero_drive(params.physical.delta_1)

    equation = _IntensityEquation(params, rabi)
    roots = equation.positive_roots()
    bistable = len(roots) > 1
    if bistable:
        logger.warning(f"Mean-field equations have {len(roots)} fixed points; reporting the branch reached from zero")

    m1, picard_residual = _picard(equation, tol, max_iter)
    if m1 is not None and bistable and not math.isclose(abs(m1) ** 2, roots[0], rel_tol=1e-6):
        logger.debug("Picard iteration reached an upper branch; refining the lower branch by bisection")
        m1 = None
    if m1 is None:
        logger.debug(f"Falling back to bisection on |<m1>|^2 (iteration residual {picard_residual:.3e})")
        m1 = _lowest_branch(equation, roots, tol)

    n = abs(m1) ** 2
    delta_1_tilde = equation.delta_1 - equation.beta * n
    a_avg = -1j * params.g_1 * m1 / equation.chi_a
    m2_avg = -1j * params.g_2 * a_avg / equation.chi_2
    residual = _residuals(params, rabi, a_avg, m1, m2_avg, delta_1_tilde)
    if residual >= tol * rabi:
        raise ConvergenceError("Mean-field fixed point did not converge", residual / rabi)

    coupling = 1j * math.sqrt(2.0) * params.g_0 * m1
    return ModeAmplitudes(
        a_avg=a_avg,
        m1_avg=m1,
        m2_avg=m2_avg,
        q_avg=-(params.g_0 / params.omega_b) * n,
        p_avg=0.0,
        delta_1_tilde=delta_1_tilde,
        g_eff=abs(coupling),
        gauge_phase=cmath.phase(coupling) if coupling != 0 else 0.0,
        rabi=rabi,
        bistable=bistable,
        residual=residual / rabi,
    )


def solve_amplitudes(params: SystemParams, quiet: bool = False) -> ModeAmplitudes:
    if params.drive_mode is DriveMode.EFFECTIVE:
        return solve_effective(params, quiet=quiet)
    return solve_physical(params)
