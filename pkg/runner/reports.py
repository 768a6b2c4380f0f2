import logging
import math
from dataclasses import dataclass
from typing import Any, Literal, Optional

from pydantic import BaseModel

from dynamics.matrices import build_diffusion, build_drift
from dynamics.stability import StabilityResult, check_stability
from entanglement.measures import EntanglementResult, all_bipartite
from lyapunov.solver import CovarianceMatrix, solve_steady
from physics.params import SystemParams
from physics.validity import ValidityReport, ValidityThresholds, audit_validity
from steadystate.solver import ModeAmplitudes, solve_amplitudes

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 12


@dataclass(frozen=True)
class PointReport:
    """Everything computed for one parameter set; entanglement is empty when the drift is unstable."""

    params: SystemParams
    amplitudes: ModeAmplitudes
    stability: StabilityResult
    entanglement: dict[tuple[str, str], EntanglementResult]
    validity: ValidityReport
    covariance: Optional[CovarianceMatrix] = None


def analyze_point(params: SystemParams, thresholds: Optional[ValidityThresholds] = None) -> PointReport:
    amplitudes = solve_amplitudes(params)
    drift = build_drift(params, amplitudes)
    stability = check_stability(drift)
    validity = audit_validity(params, amplitudes, drift, thresholds)
    for violation in validity.violations:
        logger.warning(f"Validity check failed: {violation}")

    covariance = None
    entanglement = {}
    if stability.stable:
        covariance = solve_steady(drift, build_diffusion(params))
        entanglement = all_bipartite(covariance)
    else:
        logger.warning(f"Drift matrix unstable (max Re(eig) = {stability.max_re_eig:.3e} rad/s); no covariance matrix")
    return PointReport(
        params=params,
        amplitudes=amplitudes,
        stability=stability,
        entanglement=entanglement,
        validity=validity,
        covariance=covariance,
    )


def round_significant(value: float) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return float(f"{value:.{SIGNIFICANT_DIGITS}g}")


def _clean(node: Any) -> Any:
    if isinstance(node, bool) or node is None:
        return node
    if isinstance(node, float):
        return round_significant(node)
    if isinstance(node, dict):
        return {key: _clean(value) for key, value in node.items()}
    if isinstance(node, (list, tuple)):
        return [_clean(item) for item in node]
    return node


class ComplexValue(BaseModel):
    re: float
    im: float

    @classmethod
    def of(cls, z: complex) -> "ComplexValue":
        return cls(re=z.real, im=z.imag)


class AmplitudesRecord(BaseModel):
    a_avg: ComplexValue
    m1_avg: ComplexValue
    m2_avg: ComplexValue
    q_avg: float
    p_avg: float
    delta_1_tilde: float
    g_eff: float
    gauge_phase: float
    rabi: float
    bistable: bool
    residual: float


class StabilityRecord(BaseModel):
    stable: bool
    max_re_eig: float
    eigenvalues: list[ComplexValue]


class EntanglementRecord(BaseModel):
    pair: tuple[str, str]
    nu_minus: float
    log_negativity: float
    entangled: bool


class ValidityRecord(BaseModel):
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
    valid: bool


class AxisRecord(BaseModel):
    parameter: str
    unit: str
    values: list[float]
    ties: dict[str, float] = {}


class PointRecord(BaseModel):
    command: Literal["point"] = "point"
    params: dict[str, Any]
    amplitudes: AmplitudesRecord
    stability: StabilityRecord
    entanglement: list[EntanglementRecord]
    validity: ValidityRecord


class SweepRecord(BaseModel):
    command: Literal["sweep"] = "sweep"
    params: dict[str, Any]
    pair: tuple[str, str]
    axes: list[AxisRecord]
    log_negativity: list[Any]
    validity_flags: list[Any]
    stable: list[Any]


class TcurveRecord(BaseModel):
    command: Literal["tcurve"] = "tcurve"
    params: dict[str, Any]
    pair: tuple[str, str]
    temperatures_k: list[float]
    log_negativity: list[Optional[float]]


class TcritRecord(BaseModel):
    command: Literal["tcrit"] = "tcrit"
    params: dict[str, Any]
    pair: tuple[str, str]
    t_low_k: float
    t_high_k: float
    tol_k: float
    critical_temperature_k: Optional[float] = None
    axis: Optional[AxisRecord] = None
    critical_temperatures_k: Optional[list[Optional[float]]] = None


class AuditRecord(BaseModel):
    command: Literal["audit"] = "audit"
    params: dict[str, Any]
    validity: ValidityRecord


class ErrorRecord(BaseModel):
    error: str
    message: str
    command: Optional[str] = None
    paths: list[str] = []


OUTPUT_RECORDS: dict[str, type[BaseModel]] = {
    "point": PointRecord,
    "sweep": SweepRecord,
    "tcurve": TcurveRecord,
    "tcrit": TcritRecord,
    "audit": AuditRecord,
    "error": ErrorRecord,
}


def amplitudes_record(amplitudes: ModeAmplitudes) -> AmplitudesRecord:
    return AmplitudesRecord(
        a_avg=ComplexValue.of(amplitudes.a_avg),
        m1_avg=ComplexValue.of(amplitudes.m1_avg),
        m2_avg=ComplexValue.of(amplitudes.m2_avg),
        q_avg=amplitudes.q_avg,
        p_avg=amplitudes.p_avg,
        delta_1_tilde=amplitudes.delta_1_tilde,
        g_eff=amplitudes.g_eff,
        gauge_phase=amplitudes.gauge_phase,
        rabi=amplitudes.rabi,
        bistable=amplitudes.bistable,
        residual=amplitudes.residual,
    )


def validity_record(report: ValidityReport) -> ValidityRecord:
    return ValidityRecord(**report.model_dump(), valid=report.valid)


def entanglement_record(result: EntanglementResult) -> EntanglementRecord:
    return EntanglementRecord(
        pair=result.pair,
        nu_minus=result.nu_minus,
        log_negativity=result.log_negativity,
        entangled=result.entangled,
    )


def point_record(report: PointReport, provenance: dict[str, Any]) -> PointRecord:
    return PointRecord(
        params=provenance,
        amplitudes=amplitudes_record(report.amplitudes),
        stability=StabilityRecord(
            stable=report.stability.stable,
            max_re_eig=report.stability.max_re_eig,
            eigenvalues=[ComplexValue.of(complex(z)) for z in report.stability.eigenvalues],
        ),
        entanglement=[entanglement_record(result) for result in report.entanglement.values()],
        validity=validity_record(report.validity),
    )


def to_document(record: BaseModel) -> dict[str, Any]:
    """JSON-ready dict: floats rounded to 12 significant digits, NaN and infinities as null."""
    return _clean(record.model_dump(mode="python"))
