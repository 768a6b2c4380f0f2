import json
import logging
import os
from pathlib import Path
from typing import Annotated, Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat, PositiveInt, ValidationError, model_validator

from dynamics.matrices import MODE_LABELS
from physics.constants import DEFAULT_CONSTANTS, TWO_PI, PhysicalConstants, derive_sphere
from physics.errors import ConfigError
from physics.params import DriveMode, EffectiveDrive, PhysicalDrive, SystemParams
from physics.validity import ValidityThresholds
from sweep.engine import AxisSpec, Knob, parse_knob

logger = logging.getLogger(__name__)

COMMANDS = ("point", "sweep", "tcurve", "tcrit", "audit")
DEFAULT_DIAMETER = 250e-6
DEFAULT_G0_HZ = 0.3
DEFAULT_PAIR = ("magnon1", "magnon2")
BUNDLED_PRESETS = Path(__file__).resolve().parent.parent / "presets"

_FREQUENCY_KNOBS = {Knob.DELTA_A, Knob.DELTA_2, Knob.DELTA_1_TILDE, Knob.KAPPA_MAGNON, Knob.KAPPA_A}
_RATIO_KNOBS = {Knob.G2_RATIO, Knob.G_RATIO}


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class EffectiveDriveConfig(_Strict):
    mode: Literal["effective"] = "effective"
    delta_1_tilde: float
    g_eff_hz: NonNegativeFloat


class PhysicalDriveConfig(_Strict):
    mode: Literal["physical"] = "physical"
    delta_1: float
    rabi_hz: Optional[NonNegativeFloat] = None
    b_field_t: Optional[NonNegativeFloat] = None

    @model_validator(mode="after")
    def _one_drive_strength(self):
        if (self.rabi_hz is None) == (self.b_field_t is None):
            raise ValueError("physical drive needs exactly one of rabi_hz or b_field_t")
        return self


class SystemConfig(_Strict):
    """System parameters in external units: frequencies as omega/2pi in Hz, K, m, T.

    Detunings (including the drive block's) are in Hz or, with detuning_unit = "omega_b",
    in units of the mechanical frequency.
    """

    omega_a_hz: PositiveFloat
    omega_b_hz: PositiveFloat
    gamma_b_hz: PositiveFloat
    kappa_a_hz: PositiveFloat
    kappa_1_hz: Optional[PositiveFloat] = None
    kappa_2_hz: Optional[PositiveFloat] = None
    g_1_hz: float
    g_2_hz: float
    g_0_hz: NonNegativeFloat = DEFAULT_G0_HZ
    temperature_k: NonNegativeFloat
    sphere_diameter_m: PositiveFloat = DEFAULT_DIAMETER
    detuning_unit: Literal["hz", "omega_b"] = "hz"
    delta_a: float
    delta_2: float
    drive: Annotated[Union[EffectiveDriveConfig, PhysicalDriveConfig], Field(discriminator="mode")]

    @model_validator(mode="after")
    def _sanity(self):
        for name in ("kappa_a_hz", "kappa_1_hz", "kappa_2_hz"):
            value = getattr(self, name)
            if value is not None and value > self.omega_b_hz:
                raise ValueError(f"{name}={value} exceeds omega_b_hz={self.omega_b_hz}")
        return self

    def detuning(self, value: float) -> float:
        if self.detuning_unit == "omega_b":
            return value * TWO_PI * self.omega_b_hz
        return value * TWO_PI

    def to_params(self, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> SystemParams:
        kappa_a = TWO_PI * self.kappa_a_hz
        common = dict(
            omega_a=TWO_PI * self.omega_a_hz,
            omega_b=TWO_PI * self.omega_b_hz,
            delta_a=self.detuning(self.delta_a),
            delta_2=self.detuning(self.delta_2),
            kappa_a=kappa_a,
            kappa_1=TWO_PI * self.kappa_1_hz if self.kappa_1_hz is not None else kappa_a,
            kappa_2=TWO_PI * self.kappa_2_hz if self.kappa_2_hz is not None else kappa_a,
            gamma_b=TWO_PI * self.gamma_b_hz,
            g_1=TWO_PI * self.g_1_hz,
            g_2=TWO_PI * self.g_2_hz,
            g_0=TWO_PI * self.g_0_hz,
            temperature=self.temperature_k,
            sphere=derive_sphere(self.sphere_diameter_m, constants),
        )
        if isinstance(self.drive, EffectiveDriveConfig):
            drive = EffectiveDrive(delta_1_tilde=self.detuning(self.drive.delta_1_tilde), g_eff=TWO_PI * self.drive.g_eff_hz)
            return SystemParams(drive_mode=DriveMode.EFFECTIVE, effective=drive, **common)
        drive = PhysicalDrive(
            delta_1=self.detuning(self.drive.delta_1),
            rabi=TWO_PI * self.drive.rabi_hz if self.drive.rabi_hz is not None else None,
            b_field=self.drive.b_field_t,
        )
        return SystemParams(drive_mode=DriveMode.PHYSICAL, physical=drive, **common)


class AxisConfig(_Strict):
    parameter: str
    start: float
    stop: float
    points: PositiveInt = 61
    unit: Literal["hz", "omega_b", "ratio", "k"]
    ties: dict[str, float] = {}

    def to_axis(self, system: SystemConfig) -> AxisSpec:
        knob = parse_knob(self.parameter)
        if knob in _FREQUENCY_KNOBS:
            allowed = {"hz": TWO_PI, "omega_b": TWO_PI * system.omega_b_hz}
        elif knob in _RATIO_KNOBS:
            allowed = {"ratio": 1.0}
        else:
            allowed = {"k": 1.0}
        if self.unit not in allowed:
            raise ConfigError(f"Unit '{self.unit}' does not fit knob '{knob.value}' (use {sorted(allowed)})", ["unit"])
        scale = allowed[self.unit]
        return AxisSpec(
            parameter=knob.value,
            start=self.start * scale,
            stop=self.stop * scale,
            points=self.points,
            ties=self.ties,
            unit=self.unit,
            unit_scale=scale,
        )


def _check_pair(pair: tuple[str, str]) -> tuple[str, str]:
    if pair[0] == pair[1] or any(mode not in MODE_LABELS for mode in pair):
        raise ValueError(f"pair must be two distinct modes from {list(MODE_LABELS)}, got {list(pair)}")
    return pair


class PointArgs(_Strict):
    command: Literal["point"] = "point"
    thresholds: ValidityThresholds = ValidityThresholds()


class AuditArgs(_Strict):
    command: Literal["audit"] = "audit"
    thresholds: ValidityThresholds = ValidityThresholds()


class SweepArgs(_Strict):
    command: Literal["sweep"] = "sweep"
    axes: list[AxisConfig] = Field(min_length=1, max_length=2)
    pair: tuple[str, str] = DEFAULT_PAIR

    @model_validator(mode="after")
    def _pair(self):
        _check_pair(self.pair)
        return self


class TcurveArgs(_Strict):
    command: Literal["tcurve"] = "tcurve"
    temperatures_k: list[NonNegativeFloat] = Field(min_length=1)
    pair: tuple[str, str] = DEFAULT_PAIR

    @model_validator(mode="after")
    def _pair(self):
        _check_pair(self.pair)
        return self


class TcritArgs(_Strict):
    command: Literal["tcrit"] = "tcrit"
    pair: tuple[str, str] = DEFAULT_PAIR
    t_low_k: NonNegativeFloat = 1e-3
    t_high_k: PositiveFloat = 1.0
    tol_k: PositiveFloat = 1e-3
    axis: Optional[AxisConfig] = None

    @model_validator(mode="after")
    def _pair(self):
        _check_pair(self.pair)
        return self


class OutputConfig(_Strict):
    format: Literal["csv", "json"] = "json"
    path: Optional[str] = None


class RunConfig(_Strict):
    system: SystemConfig
    args: Annotated[
        Union[PointArgs, SweepArgs, TcurveArgs, TcritArgs, AuditArgs],
        Field(discriminator="command"),
    ]
    output: OutputConfig = OutputConfig()
    threads: PositiveInt = 1

    @property
    def command(self) -> str:
        return self.args.command


def preset_dir() -> Path:
    return Path(os.getenv("MAGNON_PRESET_DIR", str(BUNDLED_PRESETS)))


def _read_json(path: Path, what: str) -> dict:
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"{what} not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{what} {path} is not valid JSON: {str(e)}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{what} {path} must hold a JSON object")
    return data


def _deep_merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in override.items():
        current = merged.get(key)
        both_dicts = isinstance(value, dict) and isinstance(current, dict)
        # a drive block of the other mode replaces the base drive wholesale
        switches_mode = both_dicts and key == "drive" and value.get("mode", current.get("mode")) != current.get("mode")
        if both_dicts and not switches_mode:
            merged[key] = _deep_merge(current, value)
        else:
            merged[key] = value
    return merged


def load_preset(name: str, seen: tuple[str, ...] = ()) -> dict:
    """Preset document with any parent presets it names merged underneath."""
    if name in seen:
        raise ConfigError(f"Preset cycle: {' -> '.join(seen + (name,))}", ["preset"])
    document = _read_json(preset_dir() / f"{name}.json", f"Preset '{name}'")
    parent = document.pop("preset", None)
    if parent:
        document = _deep_merge(load_preset(parent, seen + (name,)), document)
    return document


def _error_paths(error: ValidationError, prefix: str = "") -> list[str]:
    paths = []
    for item in error.errors():
        loc = ".".join(str(part) for part in item["loc"])
        paths.append(f"{prefix}{loc} ({item['msg']})")
    return paths


def parse_config(raw: dict[str, Any], overrides: Optional[dict[str, Any]] = None) -> RunConfig:
    """Validate a raw config document, resolving presets and command-line overrides."""
    raw = dict(raw)
    preset = (overrides or {}).get("preset") or raw.pop("preset", None)
    raw.pop("preset", None)
    if preset:
        raw = _deep_merge(load_preset(preset), raw)

    overrides = overrides or {}
    command = overrides.get("command") or raw.pop("command", None) or raw.get("args", {}).get("command")
    raw.pop("command", None)
    if command not in COMMANDS:
        raise ConfigError(f"Unknown command '{command}'; expected one of {list(COMMANDS)}", ["command"])
    args = dict(raw.get("args") or {})
    if args.get("command", command) != command:
        args = {}
    args["command"] = command
    raw["args"] = args

    output = dict(raw.get("output") or {})
    for key in ("format", "path"):
        if overrides.get(key) is not None:
            output[key] = overrides[key]
    raw["output"] = output
    threads = overrides.get("threads") or raw.get("threads") or int(os.getenv("MAGNON_THREADS", "1"))
    raw["threads"] = threads

    try:
        config = RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError("Invalid configuration", _error_paths(e)) from None
    logger.info(f"Loaded {command} configuration" + (f" from preset {preset}" if preset else ""))
    return config


def load_config(path: Optional[str] = None, overrides: Optional[dict[str, Any]] = None) -> RunConfig:
    raw = _read_json(Path(path), "Config file") if path else {}
    if not path and not (overrides or {}).get("preset"):
        raise ConfigError("Either a config file or a preset is required")
    return parse_config(raw, overrides)


def resolved_document(config: RunConfig) -> dict[str, Any]:
    """Self-contained config document; reloading it reproduces the same run."""
    return config.model_dump(mode="json")
