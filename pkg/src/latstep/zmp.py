"""Lateral pressure-point computation and pendulum-model step planning.

The body is treated as a point mass at constant height z_g; its lateral
dynamics about a support point s follow xddot = q^2 (x - s), q = sqrt(g/z_g).
The closed-form transition matrix propagates that system exactly, and the
foothold selection places the next support at the capture point
x + xdot / q, the unique pivot that brings the mass to rest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DegenerateSupportError, NonFiniteStateError
from .gait import RobotGeometry, foot_to_slider

G_DEFAULT = 9.81


@dataclass(frozen=True)
class BodySegment:
    """One lumped mass element: position (x, z) and acceleration (ax, az)."""

    m: float
    x: float
    z: float
    ax: float = 0.0
    az: float = 0.0

    def validate(self) -> "BodySegment":
        if not self.m > 0.0:
            raise ConfigError(f"segment mass must be positive, got {self.m}")
        if self.z < 0.0:
            raise ConfigError(f"segment height must be >= 0, got {self.z}")
        return self


class PendulumState(NamedTuple):
    x: float
    xdot: float


@dataclass(frozen=True)
class StepPlan:
    """Planned support placement.

    foothold_x: absolute target pivot. offset: applied displacement from the
    current CoG (clamped). unclamped_offset: the capture-point demand before
    clamping. slider_targets: per-leg-kind slider amplitudes realizing the
    offset. steps_remaining_hint: rough count of steps the clamped mechanism
    needs for the full demand (informational only).
    """

    foothold_x: float
    offset: float
    unclamped_offset: float
    slider_targets: dict[str, float]
    clamped: bool
    steps_remaining_hint: int


def compute_zmp_x(segments, g: float = G_DEFAULT,
                  moment_term_includes_gravity: bool = False) -> float:
    """Lateral zero-moment point of a set of accelerating mass elements.

    Standard moment balance about the support plane. The legacy variant
    (moment_term_includes_gravity=True) reproduces a published transcription
    that adds g to the horizontal acceleration inside the height-moment term;
    it is dimensionally inconsistent and kept only for comparison.
    """
    if not segments:
        raise ConfigError("need at least one body segment")
    num = 0.0
    den = 0.0
    for seg in segments:
        w = seg.m * (seg.az + g)
        ax_term = (seg.ax + g) if moment_term_includes_gravity else seg.ax
        num += w * seg.x - seg.m * ax_term * seg.z
        den += w
    if den <= 0.0:
        raise DegenerateSupportError(
            f"support force balance degenerate (denominator {den:.3g})")
    return num / den


def transition_matrix(t: float, q: float) -> np.ndarray:
    """Closed-form 2x2 propagator of xddot = q^2 x over time t.

    Identity at t=0; satisfies the semigroup property T(t1+t2) = T(t1) T(t2)
    and det T = 1 (hyperbolic rotation).
    """
    if t < 0.0:
        raise ConfigError(f"propagation time must be >= 0, got {t}")
    if not q > 0.0:
        raise ConfigError(f"q must be positive, got {q}")
    c = math.cosh(q * t)
    s = math.sinh(q * t)
    return np.array([[c, s / q], [q * s, c]], dtype=np.float64)


def propagate_cog(d0: PendulumState, x_zmp: float, t: float, q: float) -> PendulumState:
    """Exact pendulum propagation about a fixed pivot x_zmp for time t."""
    c = math.cosh(q * t)
    s = math.sinh(q * t)
    if t < 0.0 or not q > 0.0:
        raise ConfigError("propagate_cog needs t >= 0 and q > 0")
    dx = d0.x - x_zmp
    return PendulumState(x=x_zmp + c * dx + (s / q) * d0.xdot,
                         xdot=q * s * dx + c * d0.xdot)


def max_foothold_offset(geom: RobotGeometry) -> float:
    """Largest lateral body-relative foothold displacement one step can set.

    Limited by the leg whose slider gain demands the most travel.
    """
    return min(geom.fore_ratio, geom.hind_ratio) * geom.max_slider


def plan_step(d: PendulumState, q: float, geom: RobotGeometry) -> StepPlan:
    """Capture-point foothold plan for the current pendulum state.

    The unclamped demand is xdot/q ahead of the CoG; mechanism travel clamps
    the applied offset, flagging multi-step recovery.
    """
    if not (math.isfinite(d.x) and math.isfinite(d.xdot)):
        raise NonFiniteStateError("pendulum state must be finite to plan a step")
    unclamped = d.xdot / q
    cap = max_foothold_offset(geom)
    clamped = abs(unclamped) > cap
    offset = max(-cap, min(cap, unclamped))
    sliders = {
        "fore": foot_to_slider(offset, "fore", geom).slider,
        "hind": foot_to_slider(offset, "hind", geom).slider,
    }
    if abs(unclamped) == 0.0:
        hint = 0
    else:
        hint = max(1, math.ceil(abs(unclamped) / cap - 1e-12))
    return StepPlan(foothold_x=d.x + offset, offset=offset,
                    unclamped_offset=unclamped, slider_targets=sliders,
                    clamped=clamped, steps_remaining_hint=hint)
