import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st
from scipy.linalg import solve_continuous_lyapunov

from dynamics.matrices import DiffusionMatrix, DriftMatrix, build_diffusion, build_drift
from dynamics.stability import check_stability
from helpers import G_BASELINE, OMEGA_B, effective_variant
from lyapunov.solver import CovarianceMatrix, integrate_to_steady, lyapunov_residual, solve_steady
from physics.errors import StabilityError
from steadystate.solver import solve_effective


def matrices(params):
    return build_drift(params, solve_effective(params)), build_diffusion(params)


def test_baseline_residual(baseline_params):
    drift, diffusion = matrices(baseline_params)
    cm = solve_steady(drift, diffusion)
    assert lyapunov_residual(drift, diffusion, cm) <= 1e-8 * np.linalg.norm(diffusion.entries, "fro")
    np.testing.assert_array_equal(cm.entries, cm.entries.T)


def test_matches_library_lyapunov_solver(baseline_params):
    drift, diffusion = matrices(baseline_params)
    cm = solve_steady(drift, diffusion)
    reference = solve_continuous_lyapunov(drift.entries, -diffusion.entries)
    np.testing.assert_allclose(cm.entries, reference, rtol=1e-6, atol=1e-9)


def test_damped_thermal_oscillator():
    kappa, omega, occupancy = 0.3, 2.0, 1.7
    drift = DriftMatrix(np.array([[-kappa, omega], [-omega, -kappa]]))
    diffusion = DiffusionMatrix(np.diag([kappa * (2 * occupancy + 1)] * 2))
    cm = solve_steady(drift, diffusion)
    np.testing.assert_allclose(cm.entries, (occupancy + 0.5) * np.eye(2), atol=1e-12)
    assert cm.mode_labels == ("mode1",)


def test_unstable_drift_is_refused():
    drift = DriftMatrix(np.diag([0.1, -1.0]))
    with pytest.raises(StabilityError):
        solve_steady(drift, DiffusionMatrix(np.eye(2)))


def test_covariance_is_symmetrized():
    cm = CovarianceMatrix(np.array([[1.0, 0.2], [0.4, 1.0]]))
    np.testing.assert_allclose(cm.entries, [[1.0, 0.3], [0.3, 1.0]], rtol=1e-15)
    np.testing.assert_array_equal(cm.entries, cm.entries.T)


def test_mode_blocks(baseline_params):
    cm = solve_steady(*matrices(baseline_params))
    assert cm.mode_labels == ("cavity", "magnon1", "magnon2", "mechanics")
    np.testing.assert_array_equal(cm.block("mechanics"), cm.entries[6:, 6:])


def test_time_integration_matches_direct_solve_at_baseline(baseline_params):
    drift, diffusion = matrices(baseline_params)
    horizon = 60.0 / abs(check_stability(drift).max_re_eig)
    direct = solve_steady(drift, diffusion)
    integrated = integrate_to_steady(drift, diffusion, horizon)
    np.testing.assert_allclose(integrated.entries, direct.entries, rtol=0, atol=1e-6)


@pytest.mark.slow
@settings(max_examples=20, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(
    delta_a=st.floats(min_value=-1.5, max_value=-0.5),
    delta_1_tilde=st.floats(min_value=0.5, max_value=1.5),
    g_ratio=st.floats(min_value=0.1, max_value=1.2),
    temperature=st.floats(min_value=0.0, max_value=0.2),
)
def test_time_integration_matches_direct_solve_on_random_draws(baseline_params, delta_a, delta_1_tilde, g_ratio, temperature):
    params = effective_variant(
        baseline_params,
        delta_1_tilde=delta_1_tilde * OMEGA_B,
        g_eff=g_ratio * G_BASELINE,
        delta_a=delta_a * OMEGA_B,
        delta_2=delta_a * OMEGA_B,
        temperature=temperature,
    )
    drift, diffusion = matrices(params)
    stability = check_stability(drift)
    assume(stability.stable and stability.max_re_eig < -1e3)
    direct = solve_steady(drift, diffusion)
    integrated = integrate_to_steady(drift, diffusion, 60.0 / abs(stability.max_re_eig))
    np.testing.assert_allclose(integrated.entries, direct.entries, rtol=0, atol=1e-6)


def test_solution_is_linear_in_the_diffusion(baseline_params):
    drift, thermal = matrices(baseline_params)
    extra = DiffusionMatrix(np.diag([0.3, 0.3, 1.0, 1.0, 0.0, 0.0, 2.0, 2.0]) * baseline_params.kappa_a)
    combined = DiffusionMatrix(thermal.entries + extra.entries)
    summed = solve_steady(drift, thermal).entries + solve_steady(drift, extra).entries
    together = solve_steady(drift, combined).entries
    np.testing.assert_allclose(together, summed, rtol=1e-9, atol=1e-9 * np.max(np.abs(together)))


@pytest.mark.parametrize("temperature", [0.0, 0.01, 0.2])
@pytest.mark.parametrize("g_ratio", [0.5, 1.0])
def test_covariance_is_positive_semidefinite(baseline_params, temperature, g_ratio):
    params = effective_variant(
        baseline_params, delta_1_tilde=0.85 * OMEGA_B, g_eff=g_ratio * G_BASELINE, temperature=temperature
    )
    cm = solve_steady(*matrices(params))
    assert np.min(np.linalg.eigvalsh(cm.entries)) >= -1e-10


def test_integration_without_noise_decays_to_zero(baseline_params):
    drift, _ = matrices(baseline_params)
    horizon = 60.0 / abs(check_stability(drift).max_re_eig)
    integrated = integrate_to_steady(drift, DiffusionMatrix(np.zeros((8, 8))), horizon)
    assert np.max(np.abs(integrated.entries)) < 1e-9
