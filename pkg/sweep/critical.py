import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from entanglement.measures import MAX_LOG_NEGATIVITY, SEPARABLE_RTOL
from physics.errors import DomainError, MagnonError, NumericalError
from physics.params import SystemParams
from sweep.engine import AxisSpec, ThermalScan, apply_knobs, axis_settings

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-3
PRESCAN_POINTS = 8


@dataclass(frozen=True)
class CriticalCurve:
    axis: AxisSpec
    temperatures: np.ndarray
    pair: tuple[str, str]


def _entanglement_margin(scan: ThermalScan, temperature: float) -> float:
    """-ln(2 nu_minus), shifted so that it is positive exactly when the pair counts as entangled."""
    result = scan.result(temperature)
    if result.nu_minus == 0.0:
        return MAX_LOG_NEGATIVITY + math.log1p(-SEPARABLE_RTOL)
    return -math.log(2.0 * result.nu_minus) + math.log1p(-SEPARABLE_RTOL)


def critical_temperature(
    params: SystemParams,
    pair: tuple[str, str],
    t_low: float,
    t_high: float,
    tol: float = DEFAULT_TOL,
) -> float:
    """Temperature (K) above which the pair's log-negativity vanishes, found by bisection."""
    if not 0 <= t_low < t_high:
        raise DomainError(f"Temperature bracket must satisfy 0 <= t_low < t_high, got [{t_low}, {t_high}]")
    scan = ThermalScan(params, pair)
    if not scan.stable:
        raise DomainError("Critical temperature is undefined for an unstable configuration")

    def margin(t: float) -> float:
        return _entanglement_margin(scan, t)

    if margin(t_low) <= 0:
        raise DomainError(f"Lower endpoint t_low={t_low} K is not entangled")
    if margin(t_high) > 0:
        raise DomainError(f"Upper endpoint t_high={t_high} K is still entangled")

    signs = np.sign([margin(t) for t in np.linspace(t_low, t_high, PRESCAN_POINTS)])
    changes = int(np.count_nonzero(np.diff(signs)))
    if changes > 1:
        raise NumericalError(f"Entanglement changes sign {changes} times in [{t_low}, {t_high}] K; bracket a single crossing")

    t_c = optimize.bisect(margin, t_low, t_high, xtol=tol)
    logger.info(f"Critical temperature for {pair[0]}-{pair[1]}: {t_c * 1e3:.3f} mK")
    return t_c


def critical_temperature_curve(
    params: SystemParams,
    axis: AxisSpec,
    pair: tuple[str, str],
    t_low: float,
    t_high: float,
    tol: float = DEFAULT_TOL,
    threads: int = 1,
) -> CriticalCurve:
    """Critical temperature along one knob; points whose bracket fails hold NaN."""
    grid = axis.values

    def task(value: float) -> float:
        point = apply_knobs(params, axis_settings(axis, value))
        try:
            return critical_temperature(point, pair, t_low, t_high, tol)
        except MagnonError as e:
            logger.warning(f"No critical temperature at {axis.parameter}={value:.6g}: {str(e)}")
            return float("nan")

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            temperatures = list(pool.map(task, grid))
    else:
        temperatures = [task(value) for value in grid]
    return CriticalCurve(axis=axis, temperatures=np.array(temperatures), pair=tuple(pair))
