import pytest

from dynamics.matrices import build_drift
from helpers import G_BASELINE, OMEGA_B, effective_variant
from physics.constants import TWO_PI
from physics.validity import ValidityThresholds, audit_validity
from steadystate.solver import solve_effective


def audit(params, thresholds=None):
    amplitudes = solve_effective(params)
    return audit_validity(params, amplitudes, build_drift(params, amplitudes), thresholds)


def test_baseline_is_valid(baseline_params):
    report = audit(baseline_params)
    assert report.valid
    assert report.violations == []
    assert report.stable
    assert report.markov_q == pytest.approx(1e5)


def test_baseline_validity_arithmetic(baseline_params):
    report = audit(baseline_params)
    assert report.n_spins == pytest.approx(3.5e16, rel=0.02)
    assert report.kerr_shift == pytest.approx(5.8e13, rel=0.15)
    assert report.rabi == pytest.approx(7.1e14, rel=0.05)
    assert report.excitation_ratio_1 == pytest.approx(1.3e14 / 1.7e17, rel=0.1)
    assert report.excitation_ratio_2 < report.excitation_ratio_1
    assert report.kerr_ratio < 0.1


def test_strong_coupling_breaks_the_kerr_condition(baseline_params):
    params = effective_variant(baseline_params, delta_1_tilde=0.85 * OMEGA_B, g_eff=3 * G_BASELINE)
    report = audit(params)
    assert not report.valid
    assert any("Kerr" in violation for violation in report.violations)


def test_low_quality_factor_is_flagged(baseline_params):
    report = audit(baseline_params.with_updates(gamma_b=TWO_PI * 1e6))
    assert any("mechanical Q" in violation for violation in report.violations)


def test_custom_thresholds(baseline_params):
    report = audit(baseline_params, ValidityThresholds(excitation_ratio=1e-4))
    assert any("magnon1 excitation" in violation for violation in report.violations)


def test_zero_drive_has_no_kerr_shift(baseline_params):
    params = effective_variant(baseline_params, delta_1_tilde=0.85 * OMEGA_B, g_eff=0.0)
    report = audit(params)
    assert report.kerr_shift == 0.0
    assert report.kerr_ratio == 0.0
