import pytest

from helpers import OMEGA_B, physical_variant
from physics.params import SystemParams
from runner.config import SystemConfig, load_preset


@pytest.fixture
def baseline_system() -> SystemConfig:
    return SystemConfig.model_validate(load_preset("fig2_baseline")["system"])


@pytest.fixture
def baseline_params(baseline_system) -> SystemParams:
    return baseline_system.to_params()


@pytest.fixture
def physical_params(baseline_params) -> SystemParams:
    """Baseline system driven physically with a weak drive, far from any bistability."""
    return physical_variant(baseline_params, delta_1=0.85 * OMEGA_B, rabi=1e12)
