"""Numerical kernel tests: backend agreement, integrator order, filter math."""

import math

import numpy as np
import pytest

from latstep._kernels import _fallback, kernels
from latstep.cpg import HIP_SEED_X, OscillatorParams, gait_matrix

try:
    from latstep._kernels import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled backend not built")


def _network_arrays():
    x = np.zeros(8)
    y = np.zeros(8)
    x[:4] = HIP_SEED_X
    en = np.array([1.0] * 4 + [0.0] * 4)
    return x, y, en


def _run_network(mod, n_ticks, enable_lm_at=None, dt=1e-3):
    p = OscillatorParams()
    x, y, en = _network_arrays()
    k = np.asarray(gait_matrix(4.0))
    if enable_lm_at is not None:
        mod.network_rk4_run(x, y, en, p.a, p.b, p.mu, p.tau,
                            p.omega_st, p.omega_sw, k, dt, enable_lm_at)
        x[4:] = 0.0
        y[4:] = 0.0
        en[4:] = 1.0
        n_ticks -= enable_lm_at
    mod.network_rk4_run(x, y, en, p.a, p.b, p.mu, p.tau,
                        p.omega_st, p.omega_sw, k, dt, n_ticks)
    return x, y


@needs_core
def test_backends_agree_on_network_trajectory():
    xa, ya = _run_network(_fallback, 3000, enable_lm_at=1500)
    xb, yb = _run_network(_core, 3000, enable_lm_at=1500)
    assert np.max(np.abs(xa - xb)) < 1e-9
    assert np.max(np.abs(ya - yb)) < 1e-9


@needs_core
def test_backends_agree_on_plant_trajectory():
    q = math.sqrt(9.81 / 0.45)
    xa, va = 0.05, -0.4
    xb, vb = 0.05, -0.4
    for i in range(1000):
        s = 0.02 if i < 500 else -0.03
        f = 10.0 if 200 <= i < 400 else 0.0
        xa, va = _fallback.plant_rk4_step(xa, va, s, q, f / 22.0, 1e-3)
        xb, vb = _core.plant_rk4_step(xb, vb, s, q, f / 22.0, 1e-3)
    assert abs(xa - xb) < 1e-12
    assert abs(va - vb) < 1e-12


@needs_core
def test_backends_agree_on_biquad():
    from latstep.plant import design_butterworth, filter_coeff_arrays

    fs = design_butterworth(1.67, 1000.0)
    wa, ca = filter_coeff_arrays(fs)
    wb, cb = filter_coeff_arrays(fs)
    for i in range(500):
        u = math.sin(0.07 * i) + 0.3
        oa = _fallback.biquad_step(wa, ca, u)
        ob = _core.biquad_step(wb, cb, u)
        assert abs(oa - ob) < 1e-12


def test_network_integrator_is_fourth_order():
    p = OscillatorParams()
    k = np.asarray(gait_matrix(4.0))

    def run(dt, n):
        x, y, en = _network_arrays()
        x[0], y[0] = 0.3, -0.2
        kernels.network_rk4_run(x, y, en, p.a, p.b, p.mu, p.tau,
                                p.omega_st, p.omega_sw, k, dt, n)
        return np.concatenate([x, y])

    horizon = 0.2
    ref = run(2.5e-5, int(horizon / 2.5e-5))
    e1 = np.max(np.abs(run(2e-3, int(horizon / 2e-3)) - ref))
    e2 = np.max(np.abs(run(1e-3, int(horizon / 1e-3)) - ref))
    order = math.log2(e1 / e2)
    assert 3.5 < order < 4.6


def test_plant_step_matches_closed_form():
    q = 4.3
    s = 0.02
    x0, v0 = 0.1, -0.3
    x, v = x0, v0
    dt = 1e-3
    for i in range(500):
        x, v = kernels.plant_rk4_step(x, v, s, q, 0.0, dt)
    t = 500 * dt
    c, sh = math.cosh(q * t), math.sinh(q * t)
    x_exact = s + (x0 - s) * c + (v0 / q) * sh
    v_exact = (x0 - s) * q * sh + v0 * c
    assert abs(x - x_exact) < 1e-8
    assert abs(v - v_exact) < 1e-8


def test_constant_force_shifts_equilibrium():
    # steady state of xddot = q^2 (x - s) + F/M is x = s - F/(M q^2)
    q = 4.0
    f_over_m = 2.0
    x, v = 0.0, 0.0
    s = 0.0
    x_eq = s - f_over_m / q**2
    # start at the equilibrium: should stay there
    x, v = x_eq, 0.0
    for _ in range(2000):
        x, v = kernels.plant_rk4_step(x, v, s, q, f_over_m, 1e-3)
    assert abs(x - x_eq) < 1e-9
    assert abs(v) < 1e-9


def test_disabled_units_stay_exactly_zero():
    x, y = _run_network(kernels, 3000)
    assert np.all(x[4:] == 0.0)
    assert np.all(y[4:] == 0.0)


def test_fallback_logistic_is_stable_at_extremes():
    lo = _fallback._logistic(-1e6)
    hi = _fallback._logistic(1e6)
    assert lo == 0.0 or 0.0 < lo < 1e-20
    assert hi == 1.0
    mid = _fallback._logistic(0.0)
    assert abs(mid - 0.5) < 1e-15


def test_biquad_matches_scipy_reference():
    signal = pytest.importorskip("scipy.signal")
    from latstep.plant import design_butterworth, filter_coeff_arrays

    fs = design_butterworth(1.67, 1000.0)
    rng = np.random.default_rng(42)
    u = rng.standard_normal(2000)
    w, coeffs = filter_coeff_arrays(fs)
    mine = np.array([kernels.biquad_step(w, coeffs, float(v)) for v in u])
    b = [fs.b[0], fs.b[1], fs.b[2]]
    a = [1.0, fs.a[0], fs.a[1]]
    theirs = signal.lfilter(b, a, u)
    assert np.max(np.abs(mine - theirs)) < 1e-10
