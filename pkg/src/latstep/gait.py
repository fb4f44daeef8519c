"""Oscillator-output to joint-command mapping.

Hip angles take the oscillator x variable directly as their phase signal.
Knee commands are the one-sided-clipped y variable, rescaled, so the knee
folds only during swing. Lateral slider commands map linearly to foot
displacement with different gains for fore and hind legs.

Leg order matches the oscillator order: LF, RF, RH, LH. Left legs sit at
-track_halfwidth from the body centerline, right legs at +track_halfwidth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from .errors import ConfigError, GeometryError

Leg = Literal["fore", "hind"]

# lateral side sign per leg index (LF, RF, RH, LH)
LEG_SIDE = (-1.0, 1.0, 1.0, -1.0)
# slider gain group per leg index
LEG_KIND: tuple[Leg, ...] = ("fore", "fore", "hind", "hind")
# diagonal support pairs by leg index
DIAGONAL_PAIRS = ((0, 2), (1, 3))


@dataclass(frozen=True)
class RobotGeometry:
    """Mechanical dimensions and mass properties.

    d: hip-to-ground effective leg length (m). l_h, l_k: thigh and shank
    segment lengths (m). theta, gamma: thigh and knee rest angles (rad).
    fore_ratio, hind_ratio: slider-to-foot lateral gains. z_g: CoG height (m).
    stance_halfwidth: lateral distance from the CoG ground projection to the
    support line (m). max_slider: slider travel limit (m). track_halfwidth:
    lateral distance from body centerline to each foot line (m).
    """

    d: float = 0.4
    l_h: float = 0.2
    l_k: float = 0.25
    theta: float = 0.3
    gamma: float = 0.2
    fore_ratio: float = 5.5
    hind_ratio: float = 6.08
    mass: float = 22.0
    z_g: float = 0.45
    stance_halfwidth: float = 0.15
    max_slider: float = 0.06
    track_halfwidth: float = 0.19

    def validate(self) -> "RobotGeometry":
        for name in ("d", "l_h", "l_k", "mass", "z_g", "stance_halfwidth",
                     "max_slider", "track_halfwidth", "fore_ratio", "hind_ratio"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"geometry field {name} must be positive")
        for name in ("theta", "gamma"):
            if not 0.0 < getattr(self, name) < math.pi / 2.0:
                raise ConfigError(f"geometry angle {name} must be in (0, pi/2)")
        return self

    def ratio(self, leg: Leg) -> float:
        if leg == "fore":
            return self.fore_ratio
        if leg == "hind":
            return self.hind_ratio
        raise ConfigError(f"unknown leg kind {leg!r}")


@dataclass(frozen=True)
class AmplitudeConfig:
    """Joint amplitude configuration.

    mu0: nominal squared oscillator amplitude. a_h_min: minimum hip amplitude
    (rad). a_h0: nominal hip amplitude of the longitudinal trot (rad).
    a_k0: nominal knee amplitude (rad). t_sw: swing duration (s).
    sign: +1 elbow-type legs, -1 knee-type legs.
    """

    mu0: float = 1.0
    a_h_min: float = 0.174
    a_h0: float = 0.18535
    a_k0: float = 0.3
    t_sw: float = 0.3
    sign: int = 1

    def validate(self) -> "AmplitudeConfig":
        if not self.mu0 > 0.0:
            raise ConfigError(f"mu0 must be positive, got {self.mu0}")
        if not self.a_h_min > 0.0:
            raise ConfigError(f"a_h_min must be positive, got {self.a_h_min}")
        if not self.t_sw > 0.0:
            raise ConfigError(f"t_sw must be positive, got {self.t_sw}")
        if self.a_k0 < 0.0:
            raise ConfigError(f"a_k0 must be >= 0, got {self.a_k0}")
        if self.sign not in (1, -1):
            raise ConfigError(f"sign must be +1 or -1, got {self.sign}")
        return self


@dataclass(frozen=True)
class JointCommand:
    """One leg's commanded joint set: hip (rad), knee (rad), slider (m)."""

    hip: float
    knee: float
    slider: float


class SliderResult(NamedTuple):
    slider: float
    clamped: bool


def hip_amplitude(v: float, period: float, geom: RobotGeometry) -> float:
    """Hip swing amplitude for forward speed v at the given stride period.

    Half the stride length, swung about the effective leg length d.
    """
    if v < 0.0:
        raise ConfigError(f"forward speed must be >= 0, got {v}")
    if not period > 0.0:
        raise ConfigError(f"stride period must be positive, got {period}")
    stride = v * period / 2.0
    return math.atan2(stride / 2.0, geom.d)


def adapt_mu(cfg: AmplitudeConfig) -> float:
    """Squared-amplitude adaptation enforcing the minimum hip amplitude.

    Scales mu0 up when the nominal hip amplitude falls below a_h_min, so the
    oscillator's own limit cycle carries at least the minimum swing.
    """
    if cfg.a_h0 <= 0.0:
        raise ConfigError(f"a_h0 must be positive, got {cfg.a_h0}")
    if cfg.a_h0 < cfg.a_h_min:
        return cfg.mu0 * (cfg.a_h_min / cfg.a_h0) ** 2
    return cfg.mu0


def min_lift_height(roll_accel: float, t_sw: float, l_c: float) -> float:
    """Foot clearance needed so body roll cannot cause early touchdown.

    roll_accel: measured roll angular acceleration (rad/s^2); negative values
    (body rolling away from the swing leg) clamp to zero. l_c: lateral lever
    arm from the support line to the swing foot (m).
    """
    if not t_sw > 0.0:
        raise ConfigError(f"t_sw must be positive, got {t_sw}")
    if l_c < 0.0:
        raise ConfigError(f"lever arm must be >= 0, got {l_c}")
    return 0.5 * max(roll_accel, 0.0) * t_sw * t_sw * l_c


def min_knee_amplitude(h_c: float, a_h: float, geom: RobotGeometry) -> float:
    """Smallest knee amplitude that lifts the foot by h_c at hip amplitude a_h."""
    arg = (geom.d * math.cos(a_h) - geom.l_h * math.cos(geom.theta) - h_c) / geom.l_k
    if not -1.0 <= arg <= 1.0:
        raise GeometryError(
            f"required lift {h_c:.4f} m is outside leg reach (arccos arg {arg:.4f})")
    return math.acos(arg) - geom.gamma


def knee_amplitude(h_c: float, a_h: float, geom: RobotGeometry,
                   cfg: AmplitudeConfig) -> float:
    """Final knee amplitude: the lift-height minimum or the nominal, whichever
    is larger."""
    return max(min_knee_amplitude(h_c, a_h, geom), cfg.a_k0)


def knee_signal(y: float, a_k: float, a_h: float, sign: int) -> float:
    """Knee phase signal: rescaled y during swing (y < 0), zero during stance."""
    if not a_h > 0.0:
        raise ConfigError(f"a_h must be positive, got {a_h}")
    if y < 0.0:
        return sign * (a_k / a_h) * y
    return 0.0


def slider_to_foot(x_l: float, leg: Leg, geom: RobotGeometry) -> float:
    """Lateral foot displacement produced by slider position x_l."""
    return geom.ratio(leg) * x_l


def foot_to_slider(foot: float, leg: Leg, geom: RobotGeometry) -> SliderResult:
    """Slider position required for a lateral foot displacement.

    Clamps to the mechanical travel limit; a clamped result signals that the
    commanded displacement needs more than one step.
    """
    slider = foot / geom.ratio(leg)
    if abs(slider) > geom.max_slider:
        return SliderResult(math.copysign(geom.max_slider, slider), True)
    return SliderResult(slider, False)


class LatchedValue:
    """Amplitude register with zero-crossing semantics.

    Requested updates go to a pending slot; flush() (called at the owning
    joint's phase-signal zero crossing) promotes the pending value. Keeps
    amplitude changes from deforming a half-swing already in progress.
    """

    __slots__ = ("value", "_pending")

    def __init__(self, value: float):
        self.value = float(value)
        self._pending: float | None = None

    def request(self, value: float) -> None:
        self._pending = float(value)

    @property
    def pending(self) -> float | None:
        return self._pending

    def flush(self) -> float:
        if self._pending is not None:
            self.value = self._pending
            self._pending = None
        return self.value


def lateral_foot_positions(sliders, geom: RobotGeometry) -> np.ndarray:
    """Commanded lateral foot positions (body frame) for the four legs."""
    out = np.empty(4)
    for i in range(4):
        out[i] = LEG_SIDE[i] * geom.track_halfwidth + slider_to_foot(
            float(sliders[i]), LEG_KIND[i], geom)
    return out


def diagonal_pairs_separated(sliders, geom: RobotGeometry) -> bool:
    """True when both diagonal pairs keep left foot strictly left of right foot."""
    pos = lateral_foot_positions(sliders, geom)
    for i, j in DIAGONAL_PAIRS:
        left, right = (i, j) if LEG_SIDE[i] < 0 else (j, i)
        if not pos[left] < pos[right]:
            return False
    return True
