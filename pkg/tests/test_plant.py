"""Lateral plant tests: integration, fall latch, sensing, filtering."""

import math

import numpy as np
import pytest

from latstep.errors import ConfigError, NonFiniteStateError
from latstep.plant import (
    Disturbance,
    FilterState,
    FootholdUpdate,
    PlantParams,
    PlantState,
    design_butterworth,
    filter_accel,
    measured_lateral_accel,
    recoverable_speed_bound,
    step_plant,
    total_force,
)
from latstep.zmp import PendulumState

Q = math.sqrt(9.81 / 0.45)
PP = PlantParams()


def _step(state, u=None, force=0.0, reach=PP.passive_reach, dt=1e-3):
    return step_plant(state, u, force, dt, Q, 22.0, 0.15, 0.45, PP, reach)


def test_free_response_matches_closed_form():
    x0, v0, s = 0.05, -0.2, 0.01
    state = PlantState(cog=PendulumState(x0, v0), support_x=s, phase=1)
    for _ in range(400):
        state = _step(state)
    t = 0.4
    c, sh = math.cosh(Q * t), math.sinh(Q * t)
    assert state.cog.x == pytest.approx(s + (x0 - s) * c + v0 / Q * sh, abs=1e-9)
    assert state.cog.xdot == pytest.approx((x0 - s) * Q * sh + v0 * c, abs=1e-8)


def test_foothold_update_applies_before_integration():
    state = PlantState(cog=PendulumState(0.0, 0.0), support_x=0.0, phase=1)
    moved = _step(state, u=FootholdUpdate(support_x=0.1, phase=-1))
    assert moved.support_x == 0.1
    assert moved.phase == -1
    # CoG accelerates away from the new support immediately
    assert moved.cog.xdot < 0.0
    assert moved.roll_proxy == pytest.approx(
        math.atan2(moved.cog.x - 0.1, 0.45), abs=1e-12)


def test_recoverable_speed_bound_frozen_value():
    bound = recoverable_speed_bound(0.085, Q, 0.3)
    assert bound == pytest.approx(0.6564219, abs=1e-6)
    # monotone in reach
    assert recoverable_speed_bound(0.33, Q, 0.3) > bound


def test_fall_latch_needs_excursion_and_speed():
    # outside the stance band but slow: recoverable, not fallen
    slow = PlantState(cog=PendulumState(0.2, 0.1), support_x=0.0, phase=1)
    assert not _step(slow).fallen
    # outside and faster than repeated stepping can absorb: fallen
    fast = PlantState(cog=PendulumState(0.2, 1.0), support_x=0.0, phase=1)
    assert _step(fast).fallen
    # inside the band, any speed: not fallen yet
    inside = PlantState(cog=PendulumState(0.05, 3.0), support_x=0.0, phase=1)
    assert not _step(inside).fallen
    # a larger available reach raises the latch threshold
    assert not _step(fast, reach=0.33).fallen


def test_fall_latch_is_sticky():
    state = PlantState(cog=PendulumState(0.2, 1.0), support_x=0.0, phase=1)
    state = _step(state)
    assert state.fallen
    # even a support update cannot clear it
    state = _step(state, u=FootholdUpdate(support_x=state.cog.x, phase=1))
    assert state.fallen


def test_step_plant_rejects_non_finite():
    bad = PlantState(cog=PendulumState(math.inf, 0.0), support_x=0.0, phase=1)
    with pytest.raises(NonFiniteStateError):
        _step(bad)
    with pytest.raises(ConfigError):
        step_plant(PlantState(cog=PendulumState(0, 0), support_x=0, phase=1),
                   None, 0.0, 0.0, Q, 22.0, 0.15, 0.45, PP, 0.085)


def test_measured_accel_is_velocity_difference():
    a = PlantState(cog=PendulumState(0.0, 0.10), support_x=0.0, phase=1)
    b = PlantState(cog=PendulumState(0.0, 0.13), support_x=0.0, phase=1)
    assert measured_lateral_accel(a, b, 1e-3) == pytest.approx(30000.0)


def test_disturbance_window_half_open():
    d = Disturbance(force=220.0, t_start=2.5, duration=0.2)
    assert not d.active(2.4999)
    assert d.active(2.5)
    assert d.active(2.6999)
    assert not d.active(2.7)
    with pytest.raises(ConfigError):
        Disturbance(force=10.0, t_start=-0.1, duration=0.2).validate()
    with pytest.raises(ConfigError):
        Disturbance(force=10.0, t_start=0.0, duration=0.0).validate()


def test_total_force_sums_overlaps():
    ds = (Disturbance(force=100.0, t_start=1.0, duration=1.0),
          Disturbance(force=-30.0, t_start=1.5, duration=1.0))
    assert total_force(ds, 0.5) == 0.0
    assert total_force(ds, 1.2) == 100.0
    assert total_force(ds, 1.7) == 70.0
    assert total_force(ds, 2.2) == -30.0


def test_plant_params_validation():
    PlantParams().validate()
    for bad in (dict(stance_offset=-0.01), dict(passive_reach=0.0),
                dict(half_period=0.0), dict(g=0.0)):
        with pytest.raises(ConfigError):
            PlantParams(**bad).validate()


def test_butterworth_design():
    fs = design_butterworth(1.67, 1000.0)
    assert isinstance(fs, FilterState)
    # unity DC gain is algebraic: H(1) = sum(b) / (1 + sum(a)); the shared
    # normalization divisor leaves a few-ulp residue at this cutoff/fs ratio
    dc = sum(fs.b) / (1.0 + sum(fs.a))
    assert dc == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ConfigError):
        design_butterworth(0.0, 1000.0)
    with pytest.raises(ConfigError):
        design_butterworth(500.0, 1000.0)
    with pytest.raises(ConfigError):
        design_butterworth(-1.0, 1000.0)


def test_butterworth_matches_scipy_design():
    signal = pytest.importorskip("scipy.signal")
    fs = design_butterworth(1.67, 1000.0)
    b_ref, a_ref = signal.butter(2, 1.67, btype="low", fs=1000.0)
    assert np.allclose(fs.b, b_ref, atol=1e-12)
    assert np.allclose(fs.a, a_ref[1:], atol=1e-12)


def test_filter_settles_to_constant_input():
    fs = design_butterworth(1.67, 1000.0)
    out = 0.0
    for _ in range(3000):
        fs, out = filter_accel(fs, 2700.0)
    assert out == pytest.approx(2700.0, rel=1e-6)


def test_filter_attenuates_high_frequency():
    fs = design_butterworth(1.67, 1000.0)
    peak = 0.0
    for i in range(3000):
        u = 1000.0 * math.sin(2.0 * math.pi * 50.0 * i / 1000.0)
        fs, out = filter_accel(fs, u)
        if i > 1000:
            peak = max(peak, abs(out))
    # 50 Hz is ~30x the cutoff: second order rolls off ~59 dB
    assert peak < 2.0
