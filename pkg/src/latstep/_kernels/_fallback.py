"""Pure numpy/python implementations of the hot numeric kernels.

Selected automatically when the compiled extension is unavailable (or when
LATSTEP_FORCE_FALLBACK=1). Expressions mirror the compiled versions
operation-for-operation so both backends agree to round-off accumulation.
"""

from __future__ import annotations

import numpy as np

BACKEND = "fallback"


def _logistic(z: np.ndarray) -> np.ndarray:
    # overflow-safe logistic; branch keeps exp() argument non-positive
    z = np.clip(z, -60.0, 60.0)
    out = np.empty_like(z)
    pos = z >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _network_deriv(x, y, en, a, b, mu, tau, w_st, w_sw, K):
    r2 = x * x + y * y
    s = _logistic(tau * y)
    w = w_st * s + w_sw * (1.0 - s)
    dx = a * (mu - r2) * x - w * y
    dy = b * (mu - r2) * y + w * x + K.dot(y)
    # disabled units are pinned: zero derivative keeps them exactly at rest
    dx *= en
    dy *= en
    return dx, dy


def network_rk4_step(x, y, en, a, b, mu, tau, w_st, w_sw, K, dt):
    """Advance the coupled oscillator network one classical RK4 step in place.

    x, y: float64[n] state arrays (mutated). en: float64[n] 0/1 gate mask.
    K: float64[n, n] coupling matrix acting on y.
    """
    h2 = 0.5 * dt
    k1x, k1y = _network_deriv(x, y, en, a, b, mu, tau, w_st, w_sw, K)
    k2x, k2y = _network_deriv(x + h2 * k1x, y + h2 * k1y, en, a, b, mu, tau, w_st, w_sw, K)
    k3x, k3y = _network_deriv(x + h2 * k2x, y + h2 * k2y, en, a, b, mu, tau, w_st, w_sw, K)
    k4x, k4y = _network_deriv(x + dt * k3x, y + dt * k3y, en, a, b, mu, tau, w_st, w_sw, K)
    s6 = dt / 6.0
    x += s6 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    y += s6 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)


def network_rk4_run(x, y, en, a, b, mu, tau, w_st, w_sw, K, dt, n_ticks,
                    x_out=None, y_out=None):
    """Advance n_ticks steps; optionally record post-step states row by row."""
    for i in range(n_ticks):
        network_rk4_step(x, y, en, a, b, mu, tau, w_st, w_sw, K, dt)
        if x_out is not None:
            x_out[i, :] = x
        if y_out is not None:
            y_out[i, :] = y


def plant_rk4_step(x: float, v: float, s: float, q: float, f_over_m: float,
                   dt: float) -> tuple[float, float]:
    """One RK4 step of xddot = q^2 (x - s) + f_over_m. Returns (x', v')."""
    q2 = q * q
    k1x = v
    k1v = q2 * (x - s) + f_over_m
    k2x = v + 0.5 * dt * k1v
    k2v = q2 * (x + 0.5 * dt * k1x - s) + f_over_m
    k3x = v + 0.5 * dt * k2v
    k3v = q2 * (x + 0.5 * dt * k2x - s) + f_over_m
    k4x = v + dt * k3v
    k4v = q2 * (x + dt * k3x - s) + f_over_m
    s6 = dt / 6.0
    return (x + s6 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
            v + s6 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v))


def biquad_step(w, coeffs, sample: float) -> float:
    """Direct-form-II biquad update. w: float64[2] taps (mutated).

    coeffs: float64[5] = (b0, b1, b2, a1, a2) with a0 normalized to 1.
    """
    w0 = sample - coeffs[3] * w[0] - coeffs[4] * w[1]
    out = coeffs[0] * w0 + coeffs[1] * w[0] + coeffs[2] * w[1]
    w[1] = w[0]
    w[0] = w0
    return out
