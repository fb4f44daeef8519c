"""Simplified deterministic lateral plant.

A lumped mass at constant height rides on discrete footholds: between
support changes it obeys the inverted-pendulum dynamics plus any external
impact force. Acceleration is sensed by finite differencing the CoG velocity
(in mm/s^2, matching the telemetry convention) and smoothed by a
second-order low-pass Butterworth filter before any control decision.

Foothold updates arrive only at stance-pair transitions; the caller derives
those from the oscillator network's clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._kernels import kernels
from .errors import ConfigError, NonFiniteStateError
from .zmp import PendulumState


@dataclass(frozen=True)
class Disturbance:
    """Rectangular lateral force pulse: force (N) over [t_start, t_start+duration)."""

    force: float
    t_start: float
    duration: float

    def validate(self) -> "Disturbance":
        if not self.duration > 0.0:
            raise ConfigError(f"disturbance duration must be positive, got {self.duration}")
        if self.t_start < 0.0:
            raise ConfigError(f"disturbance start must be >= 0, got {self.t_start}")
        return self

    def active(self, t: float) -> bool:
        return self.t_start <= t < self.t_start + self.duration


def total_force(disturbances, t: float) -> float:
    """Sum of all disturbance forces active at time t."""
    return sum(d.force for d in disturbances if d.active(t))


@dataclass(frozen=True)
class PlantParams:
    """Plant tuning outside the robot geometry.

    stance_offset: lateral alternation of the effective support point as the
    diagonal stance pairs swap (m); the source of the baseline sway.
    passive_reach: foothold authority of plain (non-reflex) stance placement
    (m); sized so passive stance overlaps the reflex trigger threshold.
    half_period: stance half-cycle used by the irrecoverability bound (s).
    g: gravity (m/s^2).
    """

    stance_offset: float = 0.01
    passive_reach: float = 0.085
    half_period: float = 0.3
    g: float = 9.81

    def validate(self) -> "PlantParams":
        if self.stance_offset < 0.0:
            raise ConfigError("stance_offset must be >= 0")
        if not self.passive_reach > 0.0:
            raise ConfigError("passive_reach must be positive")
        if not self.half_period > 0.0:
            raise ConfigError("half_period must be positive")
        if not self.g > 0.0:
            raise ConfigError("g must be positive")
        return self


@dataclass(frozen=True)
class PlantState:
    """Lumped lateral state on the current foothold.

    phase: +1 while diagonal pair (LF, RH) supports, -1 for (RF, LH).
    roll_proxy: CoG offset angle arctan((x - support_x)/z_g), rad.
    fallen latches true and never resets within a run.
    """

    cog: PendulumState
    support_x: float
    phase: int = 1
    roll_proxy: float = 0.0
    fallen: bool = False


class FootholdUpdate(NamedTuple):
    """Support change applied at a stance-pair transition."""

    support_x: float
    phase: int


def recoverable_speed_bound(reach: float, q: float, half_period: float) -> float:
    """Largest |xdot| repeated clamped stepping can absorb.

    Fixed point of the per-step map when every placement saturates at
    `reach`: reach * q * coth(q * half_period / 2).
    """
    return reach * q / math.tanh(q * half_period / 2.0)


def step_plant(s: PlantState, u: FootholdUpdate | None, force: float, dt: float,
               q: float, mass: float, stance_halfwidth: float, z_g: float,
               params: PlantParams, available_reach: float) -> PlantState:
    """Advance the plant one RK4 tick.

    u, when given, moves the support point first (the caller supplies updates
    only at stance-pair transitions of the gait clock). fallen latches when
    the CoG has left the support band and is moving too fast for any
    reachable stepping pattern to stop it: |x - support| > stance_halfwidth
    with |xdot| above the repeated-stepping bound for available_reach.
    """
    if not dt > 0.0:
        raise ConfigError(f"dt must be positive, got {dt}")
    support = s.support_x
    phase = s.phase
    if u is not None:
        support = u.support_x
        phase = u.phase
    x, v = s.cog
    if not (math.isfinite(x) and math.isfinite(v) and math.isfinite(support)):
        raise NonFiniteStateError("non-finite plant state")
    x2, v2 = kernels.plant_rk4_step(x, v, support, q, force / mass, dt)
    if not (math.isfinite(x2) and math.isfinite(v2)):
        raise NonFiniteStateError("plant integration produced non-finite state")
    roll = math.atan2(x2 - support, z_g)
    fallen = s.fallen
    if not fallen and abs(x2 - support) > stance_halfwidth:
        v_star = recoverable_speed_bound(available_reach, q, params.half_period)
        if abs(v2) > v_star:
            fallen = True
    return PlantState(cog=PendulumState(x2, v2), support_x=support, phase=phase,
                      roll_proxy=roll, fallen=fallen)


def measured_lateral_accel(s_prev: PlantState, s_curr: PlantState, dt: float) -> float:
    """Finite-difference CoG acceleration between consecutive states, mm/s^2."""
    return (s_curr.cog.xdot - s_prev.cog.xdot) / dt * 1000.0


class FilterState(NamedTuple):
    """Second-order low-pass filter: coefficients plus direct-form-II taps."""

    b: tuple[float, float, float]
    a: tuple[float, float]
    w1: float
    w2: float
    cutoff_hz: float
    fs_hz: float


def design_butterworth(cutoff_hz: float, fs_hz: float) -> FilterState:
    """Second-order Butterworth low-pass via the bilinear transform.

    Unity DC gain by construction; -3 dB at cutoff_hz (prewarped).
    """
    if not 0.0 < cutoff_hz < fs_hz / 2.0:
        raise ConfigError(
            f"cutoff must be in (0, fs/2), got {cutoff_hz} at fs {fs_hz}")
    k = math.tan(math.pi * cutoff_hz / fs_hz)
    k2 = k * k
    norm = 1.0 + math.sqrt(2.0) * k + k2
    b0 = k2 / norm
    return FilterState(
        b=(b0, 2.0 * b0, b0),
        a=(2.0 * (k2 - 1.0) / norm, (1.0 - math.sqrt(2.0) * k + k2) / norm),
        w1=0.0, w2=0.0, cutoff_hz=cutoff_hz, fs_hz=fs_hz)


def filter_accel(fs: FilterState, sample: float) -> tuple[FilterState, float]:
    """One filter update; returns (advanced filter state, filtered sample)."""
    w = np.array([fs.w1, fs.w2], dtype=np.float64)
    coeffs = np.array([fs.b[0], fs.b[1], fs.b[2], fs.a[0], fs.a[1]], dtype=np.float64)
    out = kernels.biquad_step(w, coeffs, sample)
    return replace_taps(fs, float(w[0]), float(w[1])), float(out)


def replace_taps(fs: FilterState, w1: float, w2: float) -> FilterState:
    return fs._replace(w1=w1, w2=w2)


def filter_coeff_arrays(fs: FilterState) -> tuple[np.ndarray, np.ndarray]:
    """Mutable tap/coefficient arrays for kernel-level per-tick filtering."""
    w = np.array([fs.w1, fs.w2], dtype=np.float64)
    coeffs = np.array([fs.b[0], fs.b[1], fs.b[2], fs.a[0], fs.a[1]], dtype=np.float64)
    return w, coeffs
