"""Coupled-oscillator gait core.

Eight two-variable limit-cycle (Hopf) units: four drive the hips of a
trotting quadruped, four drive the laterally movable (LM) slider joints of
the same legs. The LM units are gated: they sit exactly at the origin until
the stepping reflex enables them, then a one-directional coupling from each
hip's y variable pulls them onto the hip's phase.

Unit order everywhere: 1-4 hips (LF, RF, RH, LH), 5-8 LM joints (same legs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._kernels import kernels
from .errors import (
    ConfigError,
    InsufficientDataError,
    NonFiniteStateError,
    PhaseUndefinedError,
)

N_UNITS = 8
N_HIPS = 4

# deterministic escape from the unstable origin: alternating signs seed the
# two diagonal pairs directly, since the all-equal seed is a symmetry the
# coupling preserves forever
HIP_SEED_X = (0.01, -0.01, 0.01, -0.01)


@dataclass(frozen=True)
class OscillatorParams:
    """Gains and timing of one oscillator unit (shared networkwide).

    a, b: convergence rates of x and y (1/s). mu: squared target amplitude.
    tau: steepness of the stance/swing frequency blend (1/rad).
    beta: duty ratio in (0, 1). omega_sw: swing-phase angular frequency (rad/s).
    """

    a: float = 9.0
    b: float = 9.0
    mu: float = 1.0
    tau: float = 50.0
    beta: float = 0.5
    omega_sw: float = math.pi / 0.3

    @property
    def omega_st(self) -> float:
        # stance frequency is always derived, never stored
        return (1.0 - self.beta) / self.beta * self.omega_sw

    @property
    def amplitude(self) -> float:
        return math.sqrt(self.mu)

    def validate(self) -> "OscillatorParams":
        if not (self.a > 0.0 and self.b > 0.0):
            raise ConfigError(f"oscillator gains must be positive, got a={self.a}, b={self.b}")
        if self.mu < 0.0:
            raise ConfigError(f"mu must be >= 0, got {self.mu}")
        if not self.tau > 0.0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if not 0.0 < self.beta < 1.0:
            raise ConfigError(f"beta must be in (0, 1), got {self.beta}")
        if not self.omega_sw > 0.0:
            raise ConfigError(f"omega_sw must be positive, got {self.omega_sw}")
        return self


@dataclass(frozen=True)
class OscillatorState:
    x: float
    y: float
    enabled: bool = True

    @property
    def r(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass(frozen=True)
class NetworkState:
    """Snapshot of all 8 units plus simulation time."""

    units: tuple[OscillatorState, ...]
    t: float = 0.0

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = np.array([u.x for u in self.units], dtype=np.float64)
        y = np.array([u.y for u in self.units], dtype=np.float64)
        en = np.array([1.0 if u.enabled else 0.0 for u in self.units], dtype=np.float64)
        return x, y, en

    @staticmethod
    def from_arrays(x: np.ndarray, y: np.ndarray, en: np.ndarray, t: float) -> "NetworkState":
        units = tuple(
            OscillatorState(float(x[i]), float(y[i]), bool(en[i] != 0.0))
            for i in range(len(x))
        )
        return NetworkState(units=units, t=t)


def initial_network(t: float = 0.0) -> NetworkState:
    """Fresh network: hips seeded off-origin, LM units disabled at (0, 0)."""
    hips = tuple(OscillatorState(sx, 0.0, True) for sx in HIP_SEED_X)
    lms = tuple(OscillatorState(0.0, 0.0, False) for _ in range(N_HIPS))
    return NetworkState(units=hips + lms, t=t)


def trot_matrix() -> np.ndarray:
    """4x4 hip coupling: diagonal pairs (1,3) and (2,4) in phase, pairs
    mutually in anti-phase, zero self-coupling."""
    return np.array(
        [
            [0.0, -1.0, 1.0, -1.0],
            [-1.0, 0.0, -1.0, 1.0],
            [1.0, -1.0, 0.0, -1.0],
            [-1.0, 1.0, -1.0, 0.0],
        ],
        dtype=np.float64,
    )


def gait_matrix(lam: float) -> np.ndarray:
    """8x8 block coupling [[K_t, 0], [lam*I, 0]].

    Hips couple through the trot matrix; each LM unit receives lam times its
    own hip's y and feeds nothing back (one-directional coupling).
    """
    if lam < 0.0:
        raise ConfigError(f"coupling gain must be >= 0, got {lam}")
    k = np.zeros((N_UNITS, N_UNITS), dtype=np.float64)
    k[:N_HIPS, :N_HIPS] = trot_matrix()
    k[N_HIPS:, :N_HIPS] = lam * np.eye(N_HIPS)
    return k


def validate_coupling(k: np.ndarray) -> np.ndarray:
    """Reject matrices outside the supported block structure."""
    k = np.asarray(k, dtype=np.float64)
    if k.shape != (N_UNITS, N_UNITS):
        raise ConfigError(f"coupling matrix must be 8x8, got {k.shape}")
    if np.any(np.diag(k) != 0.0):
        raise ConfigError("coupling matrix must have a zero diagonal")
    if np.any(k[:, N_HIPS:] != 0.0):
        raise ConfigError("LM units must not feed back into the network (right block zero)")
    return np.ascontiguousarray(k)


def instantaneous_frequency(params: OscillatorParams, y: float) -> float:
    """Duty-ratio frequency blend: smoothly selects the stance rate for y > 0
    and the swing rate for y < 0, equal mix at y = 0."""
    z = params.tau * y
    z = max(-60.0, min(60.0, z))
    if z >= 0.0:
        s = 1.0 / (1.0 + math.exp(-z))
    else:
        ez = math.exp(z)
        s = ez / (1.0 + ez)
    return params.omega_st * s + params.omega_sw * (1.0 - s)


def step_network(state: NetworkState, params: OscillatorParams,
                 k: np.ndarray, dt: float) -> NetworkState:
    """Advance all enabled units one fixed RK4 step of the coupled system.

    Disabled units stay bit-exactly at (0, 0) and contribute zero to every
    coupling sum. Deterministic: identical inputs give identical outputs.
    """
    if not dt > 0.0:
        raise ConfigError(f"dt must be positive, got {dt}")
    x, y, en = state.as_arrays()
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise NonFiniteStateError(f"non-finite oscillator state at t={state.t}")
    kernels.network_rk4_step(x, y, en, params.a, params.b, params.mu,
                             params.tau, params.omega_st, params.omega_sw,
                             validate_coupling(k), dt)
    return NetworkState.from_arrays(x, y, en, state.t + dt)


def enable_lm_units(state: NetworkState) -> NetworkState:
    """Gate the LM units on, starting exactly at the origin.

    The hip coupling provides the kick, so oscillation begins on the very
    next step after the trigger. Idempotent when already enabled.
    """
    units = list(state.units)
    for i in range(N_HIPS, N_UNITS):
        if not units[i].enabled:
            units[i] = OscillatorState(0.0, 0.0, True)
        else:
            units[i] = replace(units[i], enabled=True)
    return NetworkState(units=tuple(units), t=state.t)


def disable_lm_units(state: NetworkState) -> NetworkState:
    """Gate the LM units off and pin them back to the origin."""
    units = list(state.units)
    for i in range(N_HIPS, N_UNITS):
        units[i] = OscillatorState(0.0, 0.0, False)
    return NetworkState(units=tuple(units), t=state.t)


def wrap_angle(angle: float) -> float:
    """Wrap to (-pi, pi]."""
    return math.pi - (math.pi - angle) % (2.0 * math.pi)


def phase_of(unit: OscillatorState, mu: float = 1.0) -> float:
    """Phase angle atan2(y, x) wrapped to (-pi, pi].

    Needs the unit away from the origin: raises when r <= 0.1 sqrt(mu).
    """
    if not unit.enabled:
        raise PhaseUndefinedError("phase of a disabled unit is undefined")
    r = unit.r
    if r <= 0.1 * math.sqrt(mu):
        raise PhaseUndefinedError(
            f"unit too close to the origin for a phase (r={r:.3g})")
    return wrap_angle(math.atan2(unit.y, unit.x))


def duty_fraction(trace, min_cycles: int = 5) -> float:
    """Fraction of samples with y > 0 over an integer number of cycles.

    The trace must cover at least min_cycles full cycles at steady state;
    cycles are delimited by upward zero crossings of y.
    """
    y = np.asarray(trace, dtype=np.float64)
    if y.ndim != 1:
        raise ConfigError("duty_fraction expects a 1-d sample sequence")
    up = np.flatnonzero((y[:-1] <= 0.0) & (y[1:] > 0.0)) + 1
    if len(up) < min_cycles + 1:
        raise InsufficientDataError(
            f"need at least {min_cycles} full cycles, found {max(len(up) - 1, 0)}")
    seg = y[up[0]:up[-1]]
    return float(np.count_nonzero(seg > 0.0) / len(seg))


def simulate(state: NetworkState, params: OscillatorParams, k: np.ndarray,
             dt: float, n_ticks: int,
             record: bool = True) -> tuple[NetworkState, np.ndarray | None, np.ndarray | None]:
    """Run n_ticks steps through the kernel batch path.

    Returns (final state, x trace, y trace); traces are (n_ticks, 8) arrays
    of post-step values, or None when record=False.
    """
    params.validate()
    x, y, en = state.as_arrays()
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise NonFiniteStateError(f"non-finite oscillator state at t={state.t}")
    x_out = np.empty((n_ticks, len(x))) if record else None
    y_out = np.empty((n_ticks, len(y))) if record else None
    kernels.network_rk4_run(x, y, en, params.a, params.b, params.mu,
                            params.tau, params.omega_st, params.omega_sw,
                            validate_coupling(k), dt, n_ticks, x_out, y_out)
    final = NetworkState.from_arrays(x, y, en, state.t + n_ticks * dt)
    return final, x_out, y_out
