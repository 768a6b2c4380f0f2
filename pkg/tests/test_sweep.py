import math

import numpy as np
import pytest
from pydantic import ValidationError

import sweep.engine as engine
from dynamics.matrices import build_diffusion, build_drift
from dynamics.stability import check_stability
from entanglement.measures import symplectic_spectrum
from helpers import OMEGA_B, physical_variant
from lyapunov.solver import solve_steady
from physics.constants import TWO_PI
from physics.errors import ConvergenceError, DomainError, NumericalError
from steadystate.solver import solve_amplitudes
from sweep.engine import AxisSpec, Knob, apply_knobs, evaluate_point, parse_knob, sweep, temperature_curve

MAGNONS = ("magnon1", "magnon2")


def omega_b_axis(parameter, start, stop, points, **extra):
    return AxisSpec(
        parameter=parameter,
        start=start * OMEGA_B,
        stop=stop * OMEGA_B,
        points=points,
        unit="omega_b",
        unit_scale=OMEGA_B,
        **extra,
    )


def test_parse_knob():
    assert parse_knob("g2_ratio") is Knob.G2_RATIO
    with pytest.raises(DomainError):
        parse_knob("omega_a")


def test_axis_values_in_both_units():
    axis = omega_b_axis("delta_a", -2.0, 0.0, 5)
    np.testing.assert_allclose(axis.external_values, [-2.0, -1.5, -1.0, -0.5, 0.0])
    assert axis.values[0] == pytest.approx(-2 * OMEGA_B)


def test_axis_span_rules():
    AxisSpec(parameter="temperature", start=0.01, stop=0.01, points=1)
    with pytest.raises(ValidationError):
        AxisSpec(parameter="temperature", start=0.01, stop=0.02, points=1)
    with pytest.raises(ValidationError):
        AxisSpec(parameter="temperature", start=0.01, stop=0.01, points=3)
    with pytest.raises(ValidationError):
        AxisSpec(parameter="temperature", start=0.0, stop=0.1, points=0)


def test_ratio_knobs_hold_g1_fixed(baseline_params):
    params = apply_knobs(baseline_params, {Knob.G2_RATIO: 0.5, Knob.G_RATIO: 2.0})
    assert params.g_1 == baseline_params.g_1
    assert params.g_2 == pytest.approx(0.5 * baseline_params.g_1)
    assert params.effective.g_eff == pytest.approx(2.0 * baseline_params.g_1)


def test_kappa_knobs(baseline_params):
    params = apply_knobs(baseline_params, {Knob.KAPPA_MAGNON: TWO_PI * 0.6e6, Knob.KAPPA_A: TWO_PI * 3e6})
    assert params.kappa_1 == params.kappa_2 == pytest.approx(TWO_PI * 0.6e6)
    assert params.kappa_a == pytest.approx(TWO_PI * 3e6)


def test_effective_knobs_need_effective_drive(physical_params):
    with pytest.raises(DomainError):
        apply_knobs(physical_params, {Knob.G_RATIO: 1.0})
    assert apply_knobs(physical_params, {Knob.DELTA_A: -OMEGA_B}).delta_a == -OMEGA_B


def test_single_point_sweep_matches_point(baseline_params):
    delta_a = baseline_params.delta_a
    axis = AxisSpec(parameter="delta_a", start=delta_a, stop=delta_a, points=1)
    result = sweep(baseline_params, [axis], MAGNONS)
    value, valid, stable = evaluate_point(baseline_params, MAGNONS)
    assert result.values.shape == (1,)
    assert result.values[0] == value
    assert result.validity_flags[0] == valid and result.stable[0] == stable


def test_ties_follow_the_swept_knob(baseline_params):
    axis = omega_b_axis("delta_a", -1.2, -0.6, 3, ties={"delta_2": 1.0})
    result = sweep(baseline_params, [axis], MAGNONS)
    for i, delta in enumerate(axis.values):
        point = apply_knobs(baseline_params, {Knob.DELTA_A: delta, Knob.DELTA_2: delta})
        assert result.values[i] == evaluate_point(point, MAGNONS)[0]


def test_singular_points_are_nan_not_zero(baseline_params):
    axis = omega_b_axis("delta_2", -0.5, 0.5, 3)
    result = sweep(baseline_params, [axis], MAGNONS)
    assert math.isnan(result.values[1])
    assert not result.validity_flags[1]
    assert not result.stable[1]


def test_two_dimensional_grid_shape_and_threads(baseline_params):
    axes = [omega_b_axis("delta_a", -1.2, -0.6, 4), omega_b_axis("delta_2", -1.2, -0.6, 3)]
    serial = sweep(baseline_params, axes, MAGNONS)
    threaded = sweep(baseline_params, axes, MAGNONS, threads=3)
    assert serial.values.shape == (4, 3)
    np.testing.assert_array_equal(serial.values, threaded.values)
    np.testing.assert_array_equal(serial.validity_flags, threaded.validity_flags)


def test_same_knob_twice_is_rejected(baseline_params):
    axes = [omega_b_axis("delta_a", -1.2, -0.6, 3, ties={"delta_2": 1.0}), omega_b_axis("delta_2", -1.2, -0.6, 3)]
    with pytest.raises(DomainError):
        sweep(baseline_params, axes, MAGNONS)


def test_three_axes_are_rejected(baseline_params):
    axes = [AxisSpec(parameter="temperature", start=0.0, stop=0.1, points=2)] * 3
    with pytest.raises(DomainError):
        sweep(baseline_params, axes, MAGNONS)


def test_temperature_curve_starts_at_the_point_value(baseline_params):
    curve = temperature_curve(baseline_params, [0.01, 0.05, 0.1], MAGNONS)
    assert curve[0] == pytest.approx(evaluate_point(baseline_params, MAGNONS)[0], abs=1e-12)


def test_temperature_curve_is_non_increasing(baseline_params):
    temps = np.linspace(0.0, 0.3, 16)
    curve = temperature_curve(baseline_params, temps, MAGNONS)
    assert all(b <= a + 1e-12 for a, b in zip(curve, curve[1:]))
    assert curve[-1] == 0.0


@pytest.mark.parametrize("temps", [[0.1, 0.05], [-0.01, 0.1]])
def test_temperature_curve_domain(baseline_params, temps):
    with pytest.raises(DomainError):
        temperature_curve(baseline_params, temps, MAGNONS)


def test_physical_drive_sweep(physical_params):
    axis = omega_b_axis("delta_a", -1.0, -0.8, 2)
    result = sweep(physical_params, [axis], MAGNONS)
    assert result.values.shape == (2,)


@pytest.mark.parametrize("error", [ConvergenceError("mean-field iteration stalled", 0.1), NumericalError("pairing failed")])
def test_failed_points_are_nan_and_the_grid_completes(baseline_params, monkeypatch, error):
    real_solve = engine.solve_amplitudes

    def flaky(params, quiet=False):
        if params.delta_a > -0.8 * OMEGA_B:
            raise error
        return real_solve(params, quiet=quiet)

    monkeypatch.setattr(engine, "solve_amplitudes", flaky)
    result = sweep(baseline_params, [omega_b_axis("delta_a", -1.2, -0.6, 3)], MAGNONS)
    assert np.all(np.isfinite(result.values[:2]))
    assert math.isnan(result.values[2])
    assert not result.stable[2] and not result.validity_flags[2]


def test_unknown_pair_still_raises(baseline_params):
    with pytest.raises(DomainError):
        sweep(baseline_params, [omega_b_axis("delta_a", -1.2, -0.6, 2)], ("magnon1", "phonon"))


def test_physical_drive_sweep_beyond_the_baseline_drive(baseline_params):
    baseline = solve_amplitudes(baseline_params)
    params = physical_variant(baseline_params, delta_1=0.85 * OMEGA_B, rabi=3 * baseline.rabi)
    result = sweep(params, [omega_b_axis("delta_a", -1.2, -0.6, 7)], MAGNONS)
    assert result.values.shape == (7,)
    assert np.all(np.isfinite(result.values[result.stable]))


def test_axis_order_transposes_the_grid(baseline_params):
    first = omega_b_axis("delta_a", -1.2, -0.6, 4)
    second = omega_b_axis("delta_2", -1.1, -0.7, 3)
    forward = sweep(baseline_params, [first, second], MAGNONS)
    backward = sweep(baseline_params, [second, first], MAGNONS)
    np.testing.assert_array_equal(forward.values, backward.values.T)
    np.testing.assert_array_equal(forward.stable, backward.stable.T)


def test_stable_points_have_physical_covariance_matrices(baseline_params):
    for delta_a in np.linspace(-1.5, -0.5, 5) * OMEGA_B:
        for g_ratio in (0.5, 1.5, 2.5):
            params = apply_knobs(baseline_params, {Knob.DELTA_A: delta_a, Knob.G_RATIO: g_ratio})
            drift = build_drift(params, solve_amplitudes(params, quiet=True))
            if not check_stability(drift).stable:
                continue
            cm = solve_steady(drift, build_diffusion(params))
            assert min(symplectic_spectrum(cm.entries)) >= 0.5 - 1e-8


@pytest.mark.slow
def test_magnon_entanglement_optimum_near_minus_point_nine_omega_b(baseline_params):
    # computed optimum of the 61 x 61 grid sits at (-0.867, -0.9) omega_b
    grid = omega_b_axis("delta_a", -2.0, 0.0, 61), omega_b_axis("delta_2", -2.0, 0.0, 61)
    result = sweep(baseline_params, list(grid), MAGNONS)
    i, j = result.argmax()
    assert grid[0].external_values[i] == pytest.approx(-0.9, abs=0.1)
    assert grid[1].external_values[j] == pytest.approx(-0.9, abs=0.1)
    k = int(np.argmin(np.abs(grid[0].external_values + 0.9)))
    assert result.values[k, k] > 0


@pytest.mark.slow
def test_entanglement_transfer_pattern(baseline_params):
    # the cavity-magnon optimum without g_2 and the magnon-magnon optimum with g_2 share the
    # magnon detuning; the cavity detuning of the transferred optimum moves towards -omega_b
    axes = [
        omega_b_axis("delta_a", -2.0, 0.0, 61, ties={"delta_2": 1.0}),
        omega_b_axis("delta_1_tilde", 0.0, 2.0, 61),
    ]
    cavity_magnon = sweep(baseline_params.with_updates(g_2=0.0), axes, ("cavity", "magnon1"))
    magnons = sweep(baseline_params, axes, MAGNONS)
    (i_am, j_am), (i_mm, j_mm) = cavity_magnon.argmax(), magnons.argmax()
    assert abs(int(j_am) - int(j_mm)) <= 2
    assert axes[1].external_values[j_mm] == pytest.approx(0.8, abs=0.1)
    for i in (i_am, i_mm):
        assert -1.2 <= axes[0].external_values[i] <= -0.6
    assert np.nanmax(cavity_magnon.values) > 0 and np.nanmax(magnons.values) > 0


@pytest.mark.slow
def test_coupling_optimum_is_interior(baseline_params):
    axes = [
        AxisSpec(parameter="g2_ratio", start=0.1, stop=2.0, points=61, unit="ratio"),
        AxisSpec(parameter="G_ratio", start=0.1, stop=3.0, points=61, unit="ratio"),
    ]
    result = sweep(baseline_params, axes, MAGNONS)
    _, j = result.argmax()
    assert 0 < j < 60
    assert 2.0 <= axes[1].external_values[j] <= 2.9
    assert np.nanmax(result.values) > 0.2
