import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveInt, model_validator

from dynamics.matrices import DriftMatrix, build_diffusion, build_drift
from dynamics.stability import check_stability
from entanglement.measures import EntanglementResult, pair_log_negativity
from lyapunov.solver import solve_steady
from physics.errors import DomainError, MagnonError, SingularConfigurationError
from physics.params import DriveMode, SystemParams
from physics.validity import audit_validity
from steadystate.solver import solve_amplitudes

logger = logging.getLogger(__name__)

UNSTABLE = float("nan")


class Knob(str, Enum):
    DELTA_A = "delta_a"
    DELTA_2 = "delta_2"
    DELTA_1_TILDE = "delta_1_tilde"
    G2_RATIO = "g2_ratio"
    G_RATIO = "G_ratio"
    TEMPERATURE = "temperature"
    KAPPA_MAGNON = "kappa_magnon"
    KAPPA_A = "kappa_a"


def parse_knob(name: str) -> Knob:
    try:
        return Knob(name)
    except ValueError:
        raise DomainError(f"Unknown sweep knob '{name}'; expected one of {[k.value for k in Knob]}") from None


class AxisSpec(BaseModel):
    """One sweep axis in internal units (rad/s, K or a dimensionless ratio).

    unit_scale converts back to the configured external unit: external = internal / unit_scale.
    ties makes other knobs follow this one as factor * value.
    """

    model_config = ConfigDict(frozen=True)

    parameter: str
    start: float
    stop: float
    points: PositiveInt
    scale: Literal["linear"] = "linear"
    ties: dict[str, float] = {}
    unit: str = "si"
    unit_scale: float = 1.0

    @model_validator(mode="after")
    def _check_span(self):
        if self.points == 1 and self.start != self.stop:
            raise ValueError("a single-point axis needs start == stop")
        if self.points > 1 and self.start == self.stop:
            raise ValueError("axis start and stop must differ")
        return self

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)

    @property
    def external_values(self) -> np.ndarray:
        return self.values / self.unit_scale


@dataclass(frozen=True)
class SweepResult:
    """Grid of log-negativities; unstable or singular points hold NaN, never 0."""

    axes: tuple[AxisSpec, ...]
    values: np.ndarray
    validity_flags: np.ndarray
    stable: np.ndarray
    pair: tuple[str, str]

    def argmax(self) -> tuple[int, ...]:
        return np.unravel_index(np.nanargmax(self.values), self.values.shape)


def apply_knobs(params: SystemParams, settings: dict[Knob, float]) -> SystemParams:
    """Copy of params with every knob set; ratio knobs keep g_1 fixed."""
    updates = {}
    effective = params.effective.model_dump() if params.effective is not None else None
    for knob, value in settings.items():
        if knob is Knob.DELTA_A:
            updates["delta_a"] = value
        elif knob is Knob.DELTA_2:
            updates["delta_2"] = value
        elif knob is Knob.G2_RATIO:
            updates["g_2"] = value * params.g_1
        elif knob is Knob.TEMPERATURE:
            updates["temperature"] = value
        elif knob is Knob.KAPPA_MAGNON:
            updates["kappa_1"] = value
            updates["kappa_2"] = value
        elif knob is Knob.KAPPA_A:
            updates["kappa_a"] = value
        elif effective is None:
            raise DomainError(f"Knob {knob.value} needs a drive given in effective form")
        elif knob is Knob.DELTA_1_TILDE:
            effective["delta_1_tilde"] = value
        elif knob is Knob.G_RATIO:
            effective["g_eff"] = value * params.g_1
    if effective is not None and params.drive_mode is DriveMode.EFFECTIVE:
        updates["effective"] = effective
    return params.with_updates(**updates)


def axis_settings(axis: AxisSpec, value: float) -> dict[Knob, float]:
    settings = {parse_knob(axis.parameter): value}
    for name, factor in axis.ties.items():
        settings[parse_knob(name)] = factor * value
    return settings


def _check_axes(axes: tuple[AxisSpec, ...]):
    if not 1 <= len(axes) <= 2:
        raise DomainError(f"A sweep takes one or two axes, got {len(axes)}")
    touched = [knob for axis in axes for knob in axis_settings(axis, axis.start)]
    if len(set(touched)) != len(touched):
        raise DomainError(f"Sweep axes (with ties) set the same knob twice: {[k.value for k in touched]}")


def evaluate_point(params: SystemParams, pair: tuple[str, str]) -> tuple[float, bool, bool]:
    """(log-negativity or NaN, model valid, stable) for one parameter set.

    Points whose steady state or covariance matrix cannot be computed hold NaN; domain errors
    (bad pair, wrong drive form) still propagate.
    """
    try:
        amplitudes = solve_amplitudes(params, quiet=True)
        drift = build_drift(params, amplitudes)
        report = audit_validity(params, amplitudes, drift)
        if not report.stable:
            return UNSTABLE, False, False
        cm = solve_steady(drift, build_diffusion(params))
        return pair_log_negativity(cm, pair).log_negativity, report.valid, True
    except SingularConfigurationError as e:
        logger.debug(f"Singular steady state, point skipped: {str(e)}")
    except DomainError:
        raise
    except MagnonError as e:
        logger.warning(f"Sweep point failed ({type(e).__name__}), recorded as NaN: {str(e)}")
    return UNSTABLE, False, False


def sweep(params: SystemParams, axes: list[AxisSpec], pair: tuple[str, str], threads: int = 1) -> SweepResult:
    """Evaluate the pair's log-negativity over a 1D or 2D grid of knobs."""
    axes = tuple(axes)
    _check_axes(axes)
    shape = tuple(axis.points for axis in axes)
    values = np.full(shape, UNSTABLE)
    valid = np.zeros(shape, dtype=bool)
    stable = np.zeros(shape, dtype=bool)
    grids = [axis.values for axis in axes]
    logger.info(f"Starting sweep over {' x '.join(a.parameter for a in axes)} ({values.size} points, {threads} thread(s))")

    def task(index: tuple[int, ...]):
        settings = {}
        for axis, grid, i in zip(axes, grids, index):
            settings.update(axis_settings(axis, grid[i]))
        values[index], valid[index], stable[index] = evaluate_point(apply_knobs(params, settings), pair)

    indices = list(np.ndindex(*shape))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(task, indices))
    else:
        for index in indices:
            task(index)

    unstable = int(np.count_nonzero(~stable))
    if unstable:
        logger.warning(f"{unstable} of {values.size} sweep points are unstable or singular")
    logger.info(f"Sweep complete: max E_N = {np.nanmax(values) if stable.any() else float('nan'):.6g}")
    return SweepResult(axes=axes, values=values, validity_flags=valid, stable=stable, pair=tuple(pair))


class ThermalScan:
    """Entanglement of one pair as a function of temperature; the drift is built once."""

    def __init__(self, params: SystemParams, pair: tuple[str, str]):
        self.params = params
        self.pair = tuple(pair)
        amplitudes = solve_amplitudes(params)
        self.drift: DriftMatrix = build_drift(params, amplitudes)
        self.stable = check_stability(self.drift).stable
        if not self.stable:
            logger.warning("Drift matrix is unstable; the temperature scan yields no entanglement values")

    def result(self, temperature: float) -> EntanglementResult | None:
        if not self.stable:
            return None
        params = self.params.with_updates(temperature=temperature)
        cm = solve_steady(self.drift, build_diffusion(params))
        return pair_log_negativity(cm, self.pair)

    def log_negativity(self, temperature: float) -> float:
        result = self.result(temperature)
        return UNSTABLE if result is None else result.log_negativity


def temperature_curve(params: SystemParams, temps: list[float], pair: tuple[str, str]) -> list[float]:
    temps = list(temps)
    if any(t < 0 for t in temps):
        raise DomainError("Temperatures must be non-negative")
    if any(b < a for a, b in zip(temps, temps[1:])):
        raise DomainError("Temperatures must be ascending")
    scan = ThermalScan(params, pair)
    curve = [scan.log_negativity(t) for t in temps]
    logger.info(f"Temperature curve over {len(temps)} points computed for {pair[0]}-{pair[1]}")
    return curve
