import pytest

from latstep.scenario import (DEFAULT_SWEEP_MAGNITUDES, SweepSpec,
                              default_config, run_scenario, run_sweep)


@pytest.fixture(scope="session")
def default_cfg():
    return default_config()


@pytest.fixture(scope="session")
def default_result():
    """Canonical 220 N impact scenario with full telemetry."""
    return run_scenario(default_config(), record_trace=True)


@pytest.fixture(scope="session")
def default_sweep():
    """Default 11-magnitude sweep, both reflex arms."""
    spec = SweepSpec(magnitudes=DEFAULT_SWEEP_MAGNITUDES)
    return run_sweep(spec, default_config())
