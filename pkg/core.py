import argparse
import json
import logging
import os
import sys
from typing import Any, Optional

from dotenv import load_dotenv

from physics.errors import ConfigError, MagnonError
from runner.config import COMMANDS, RunConfig, TcritArgs, load_config, resolved_document
from runner.reports import (
    OUTPUT_RECORDS,
    AuditRecord,
    AxisRecord,
    ErrorRecord,
    SweepRecord,
    TcritRecord,
    TcurveRecord,
    analyze_point,
    point_record,
    to_document,
    validity_record,
)
from runner.writers import write_json, write_output
from steadystate.solver import solve_amplitudes
from dynamics.matrices import build_drift
from physics.validity import audit_validity
from sweep.critical import critical_temperature, critical_temperature_curve
from sweep.engine import AxisSpec, sweep, temperature_curve

# Load environment variables
load_dotenv()

# Configure logging
logging.basicConfig(
    level=os.getenv("MAGNON_LOG_LEVEL", "INFO").upper(),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def _axis_record(axis: AxisSpec) -> AxisRecord:
    return AxisRecord(parameter=axis.parameter, unit=axis.unit, values=axis.external_values.tolist(), ties=axis.ties)


class MagnonEntanglementRunner:
    def __init__(self, config: RunConfig):
        self.config = config
        self.params = config.system.to_params()
        self.provenance = resolved_document(config)
        logger.info(f"Initialized runner for command '{config.command}' (drive mode {self.params.drive_mode.value})")

    def run(self) -> dict[str, Any]:
        """Execute the configured command and return its result document."""
        command = self.config.command
        args = self.config.args
        logger.info(f"Starting {command}")
        if command == "point":
            report = analyze_point(self.params, args.thresholds)
            record = point_record(report, self.provenance)
        elif command == "sweep":
            axes = [axis.to_axis(self.config.system) for axis in args.axes]
            result = sweep(self.params, axes, args.pair, threads=self.config.threads)
            record = SweepRecord(
                params=self.provenance,
                pair=args.pair,
                axes=[_axis_record(axis) for axis in axes],
                log_negativity=result.values.tolist(),
                validity_flags=result.validity_flags.tolist(),
                stable=result.stable.tolist(),
            )
        elif command == "tcurve":
            curve = temperature_curve(self.params, args.temperatures_k, args.pair)
            record = TcurveRecord(
                params=self.provenance,
                pair=args.pair,
                temperatures_k=args.temperatures_k,
                log_negativity=curve,
            )
        elif command == "tcrit":
            record = self._critical_temperature(args)
        elif command == "audit":
            amplitudes = solve_amplitudes(self.params)
            report = audit_validity(self.params, amplitudes, build_drift(self.params, amplitudes), args.thresholds)
            for violation in report.violations:
                logger.warning(f"Validity check failed: {violation}")
            record = AuditRecord(params=self.provenance, validity=validity_record(report))
        else:
            raise ConfigError(f"Unknown command '{command}'", ["command"])
        logger.info(f"Completed {command}")
        return to_document(record)

    def _critical_temperature(self, args: TcritArgs) -> TcritRecord:
        common = dict(
            params=self.provenance,
            pair=args.pair,
            t_low_k=args.t_low_k,
            t_high_k=args.t_high_k,
            tol_k=args.tol_k,
        )
        if args.axis is None:
            t_c = critical_temperature(self.params, args.pair, args.t_low_k, args.t_high_k, args.tol_k)
            return TcritRecord(critical_temperature_k=t_c, **common)
        axis = args.axis.to_axis(self.config.system)
        curve = critical_temperature_curve(
            self.params, axis, args.pair, args.t_low_k, args.t_high_k, args.tol_k, threads=self.config.threads
        )
        return TcritRecord(axis=_axis_record(axis), critical_temperatures_k=curve.temperatures.tolist(), **common)


def output_schemas() -> dict[str, Any]:
    """JSON Schemas of the run configuration and of every output record."""
    schemas = {name: model.model_json_schema() for name, model in OUTPUT_RECORDS.items()}
    schemas["config"] = RunConfig.model_json_schema()
    return schemas


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magnon-entangle",
        description="Steady-state entanglement of a cavity magnomechanical system with two magnon modes.",
    )
    parser.add_argument("command", choices=list(COMMANDS) + ["schema"])
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--out", help="output path (stdout when omitted)")
    parser.add_argument("--format", choices=["csv", "json"], help="output format (default json)")
    parser.add_argument("--preset", help="bundled preset name, e.g. fig2_baseline")
    parser.add_argument("--threads", type=int, help="worker threads for sweeps")
    parser.add_argument("--emit-config", help="write the resolved configuration to this path and continue")
    return parser


def _report_error(error: Exception, command: Optional[str]):
    record = ErrorRecord(
        error=type(error).__name__,
        message=str(error),
        command=command,
        paths=getattr(error, "paths", []) or [],
    )
    sys.stderr.write(json.dumps(record.model_dump()) + "\n")


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "schema":
        write_json(output_schemas(), args.out)
        return EXIT_OK

    overrides = {
        "command": args.command,
        "preset": args.preset,
        "format": args.format,
        "path": args.out,
        "threads": args.threads,
    }
    try:
        config = load_config(args.config, overrides)
        if args.emit_config:
            write_json(resolved_document(config), args.emit_config)
        runner = MagnonEntanglementRunner(config)
        document = runner.run()
        write_output(document, config.output.format, config.output.path)
    except ConfigError as e:
        logger.error(f"Configuration error: {str(e)}")
        _report_error(e, args.command)
        return EXIT_CONFIG
    except MagnonError as e:
        logger.error(f"{args.command} failed: {str(e)}")
        _report_error(e, args.command)
        return EXIT_FAILURE
    except OSError as e:
        logger.error(f"I/O failure: {str(e)}")
        _report_error(e, args.command)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
