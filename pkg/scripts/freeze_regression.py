"""Recompute the regression operating points and write tests/fixtures/regression_values.json.

Run from the repository root after a deliberate numerical change:

    python scripts/freeze_regression.py

Values come from the direct Lyapunov solve; each one is cross-checked against the
time-integrated covariance matrix before it is written.
"""

import json
import logging
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

from dynamics.matrices import build_diffusion, build_drift  # noqa: E402
from dynamics.stability import check_stability  # noqa: E402
from entanglement.measures import pair_log_negativity  # noqa: E402
from lyapunov.solver import integrate_to_steady, solve_steady  # noqa: E402
from physics.constants import TWO_PI  # noqa: E402
from physics.params import SystemParams  # noqa: E402
from runner.config import SystemConfig, load_preset  # noqa: E402
from steadystate.solver import solve_amplitudes  # noqa: E402
from sweep.critical import critical_temperature  # noqa: E402

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger("freeze_regression")

FIXTURE = ROOT / "tests" / "fixtures" / "regression_values.json"
ORACLE_ATOL = 1e-6


def baseline() -> SystemParams:
    return SystemConfig.model_validate(load_preset("fig2_baseline")["system"]).to_params()


def operating_points() -> dict[str, tuple[SystemParams, tuple[str, str]]]:
    params = baseline()
    omega_b = params.omega_b
    detection = params.with_updates(kappa_a=TWO_PI * 3e6, kappa_1=TWO_PI * 0.6e6, kappa_2=TWO_PI * 0.6e6)
    return {
        "fig2a_optimum_m1m2": (params, ("magnon1", "magnon2")),
        "fig2a_resonant_m1m2": (params.with_updates(delta_a=-omega_b, delta_2=-omega_b), ("magnon1", "magnon2")),
        "fig2b_am1_no_g2": (params.with_updates(g_2=0.0), ("cavity", "magnon1")),
        "fig2c_am1_with_g2": (params, ("cavity", "magnon1")),
        "baseline_m1b": (params, ("magnon1", "mechanics")),
        "fig3b_detection_m1m2": (detection, ("magnon1", "magnon2")),
    }


def log_negativities() -> dict[str, float]:
    values = {}
    for name, (params, pair) in operating_points().items():
        drift = build_drift(params, solve_amplitudes(params, quiet=True))
        diffusion = build_diffusion(params)
        direct = solve_steady(drift, diffusion)
        horizon = 60.0 / abs(check_stability(drift).max_re_eig)
        integrated = integrate_to_steady(drift, diffusion, horizon)
        gap = float(np.max(np.abs(integrated.entries - direct.entries)))
        if gap > ORACLE_ATOL:
            raise RuntimeError(f"{name}: direct and integrated covariance matrices differ by {gap:.3e}")
        values[name] = pair_log_negativity(direct, pair).log_negativity
    return values


def stability_outcomes() -> dict[str, bool]:
    params = baseline()
    outcomes = {}
    for factor in (1.0, 10.0):
        drive = params.effective.model_copy(update={"g_eff": factor * params.effective.g_eff})
        point = params.with_updates(effective=drive)
        outcomes[f"stable_G_x{factor:g}"] = check_stability(build_drift(point, solve_amplitudes(point, quiet=True))).stable
    return outcomes


def critical_temperatures() -> dict[str, float]:
    params = baseline()
    detection = params.with_updates(kappa_a=TWO_PI * 3e6, kappa_1=TWO_PI * 0.6e6, kappa_2=TWO_PI * 0.6e6)
    strong = params.with_updates(kappa_a=TWO_PI * 15e6, kappa_1=TWO_PI * 3e6, kappa_2=TWO_PI * 3e6)
    pair = ("magnon1", "magnon2")
    return {
        "tc_baseline": critical_temperature(params, pair, 1e-3, 1.0, tol=1e-6),
        "tc_detection": critical_temperature(detection, pair, 1e-3, 1.0, tol=1e-6),
        "tc_kappa_3mhz": critical_temperature(strong, pair, 1e-3, 1.0, tol=1e-6),
    }


def regression_values() -> dict:
    return {
        "log_negativity": log_negativities(),
        "stability": stability_outcomes(),
        "critical_temperature_k": critical_temperatures(),
    }


def main():
    values = regression_values()
    FIXTURE.parent.mkdir(parents=True, exist_ok=True)
    with open(FIXTURE, "w") as f:
        json.dump(values, f, indent=2)
        f.write("\n")
    logger.info(f"Wrote {FIXTURE}")


if __name__ == "__main__":
    main()
