import csv
import json
import logging
import math
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterable, Optional

logger = logging.getLogger(__name__)

NAN_TEXT = "nan"
PARAMS_PREFIX = "# params: "


def format_number(value: Optional[float]) -> str:
    """12 significant digits; missing or unstable values become nan."""
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        return NAN_TEXT
    if isinstance(value, bool):
        return "true" if value else "false"
    return f"{value:.12g}"


@contextmanager
def _open_target(path: Optional[str]):
    if path is None:
        yield sys.stdout
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="") as f:
        yield f


def write_json(document: dict[str, Any], path: Optional[str] = None):
    with _open_target(path) as f:
        json.dump(document, f, indent=2)
        f.write("\n")
    if path:
        logger.info(f"Wrote JSON output to {path}")


def _write_rows(rows: Iterable[list[str]], path: Optional[str]):
    with _open_target(path) as f:
        writer = csv.writer(f, delimiter=",", lineterminator="\n")
        writer.writerows(rows)
    if path:
        logger.info(f"Wrote CSV output to {path}")


def _sweep_rows(document: dict[str, Any]) -> list[list[str]]:
    axes = document["axes"]
    values = document["log_negativity"]
    if len(axes) == 1:
        axis = axes[0]
        rows = [[f"{axis['parameter']} [{axis['unit']}]", "log_negativity", "valid", "stable"]]
        for x, e_n, valid, stable in zip(axis["values"], values, document["validity_flags"], document["stable"]):
            rows.append([format_number(x), format_number(e_n), format_number(valid), format_number(stable)])
        return rows
    rows_axis, cols_axis = axes
    corner = f"{rows_axis['parameter']} [{rows_axis['unit']}] \\ {cols_axis['parameter']} [{cols_axis['unit']}]"
    rows = [[corner] + [format_number(y) for y in cols_axis["values"]]]
    for x, row in zip(rows_axis["values"], values):
        rows.append([format_number(x)] + [format_number(e_n) for e_n in row])
    return rows


def _point_rows(document: dict[str, Any]) -> list[list[str]]:
    rows = [["mode_a", "mode_b", "nu_minus", "log_negativity", "entangled"]]
    for result in document["entanglement"]:
        first, second = result["pair"]
        rows.append(
            [first, second, format_number(result["nu_minus"]), format_number(result["log_negativity"]), format_number(result["entangled"])]
        )
    return rows


def _tcurve_rows(document: dict[str, Any]) -> list[list[str]]:
    rows = [["temperature_k", "log_negativity"]]
    for t, e_n in zip(document["temperatures_k"], document["log_negativity"]):
        rows.append([format_number(t), format_number(e_n)])
    return rows


def _tcrit_rows(document: dict[str, Any]) -> list[list[str]]:
    axis = document.get("axis")
    if axis is None:
        first, second = document["pair"]
        return [["mode_a", "mode_b", "critical_temperature_k"], [first, second, format_number(document["critical_temperature_k"])]]
    rows = [[f"{axis['parameter']} [{axis['unit']}]", "critical_temperature_k"]]
    for x, t_c in zip(axis["values"], document["critical_temperatures_k"]):
        rows.append([format_number(x), format_number(t_c)])
    return rows


def _audit_rows(document: dict[str, Any]) -> list[list[str]]:
    validity = document["validity"]
    rows = [["check", "value"]]
    for key, value in validity.items():
        if key == "violations":
            rows.append([key, "; ".join(value)])
        else:
            rows.append([key, format_number(value)])
    return rows


CSV_LAYOUTS = {
    "point": _point_rows,
    "sweep": _sweep_rows,
    "tcurve": _tcurve_rows,
    "tcrit": _tcrit_rows,
    "audit": _audit_rows,
}


def csv_rows(document: dict[str, Any]) -> list[list[str]]:
    return CSV_LAYOUTS[document["command"]](document)


def write_csv(document: dict[str, Any], path: Optional[str] = None):
    """Plot-ready CSV of a result document.

    The parameter block goes to a <path>.params.json sidecar; on stdout it precedes the rows as a
    single `# params: {...}` comment line.
    """
    if path is None:
        sys.stdout.write(f"{PARAMS_PREFIX}{json.dumps(document['params'])}\n")
    _write_rows(csv_rows(document), path)
    if path:
        write_json(document["params"], f"{path}.params.json")


def write_output(document: dict[str, Any], fmt: str, path: Optional[str] = None):
    if fmt == "csv":
        write_csv(document, path)
    else:
        write_json(document, path)
