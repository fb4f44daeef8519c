# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels: coupled-oscillator RK4 stepping, lateral plant
RK4 stepping, and the biquad filter update. Mirrors _fallback.py exactly."""

from libc.math cimport exp

BACKEND = "compiled"

DEF MAXN = 16


cdef inline double _logi(double z) noexcept nogil:
    cdef double ez
    if z > 60.0:
        z = 60.0
    elif z < -60.0:
        z = -60.0
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    ez = exp(z)
    return ez / (1.0 + ez)


cdef void _deriv(int n, const double* x, const double* y, const double* en,
                 double a, double b, double mu, double tau,
                 double w_st, double w_sw, const double* K,
                 double* dx, double* dy) noexcept nogil:
    cdef int i, j
    cdef double r2, s, w, acc
    for i in range(n):
        if en[i] == 0.0:
            dx[i] = 0.0
            dy[i] = 0.0
            continue
        r2 = x[i] * x[i] + y[i] * y[i]
        s = _logi(tau * y[i])
        w = w_st * s + w_sw * (1.0 - s)
        acc = 0.0
        for j in range(n):
            acc += K[i * n + j] * y[j]
        dx[i] = a * (mu - r2) * x[i] - w * y[i]
        dy[i] = b * (mu - r2) * y[i] + w * x[i] + acc


cdef void _rk4(int n, double* x, double* y, const double* en,
               double a, double b, double mu, double tau,
               double w_st, double w_sw, const double* K, double dt) noexcept nogil:
    cdef double k1x[MAXN]
    cdef double k1y[MAXN]
    cdef double k2x[MAXN]
    cdef double k2y[MAXN]
    cdef double k3x[MAXN]
    cdef double k3y[MAXN]
    cdef double k4x[MAXN]
    cdef double k4y[MAXN]
    cdef double xt[MAXN]
    cdef double yt[MAXN]
    cdef double h2 = 0.5 * dt
    cdef double s6 = dt / 6.0
    cdef int i
    _deriv(n, x, y, en, a, b, mu, tau, w_st, w_sw, K, k1x, k1y)
    for i in range(n):
        xt[i] = x[i] + h2 * k1x[i]
        yt[i] = y[i] + h2 * k1y[i]
    _deriv(n, xt, yt, en, a, b, mu, tau, w_st, w_sw, K, k2x, k2y)
    for i in range(n):
        xt[i] = x[i] + h2 * k2x[i]
        yt[i] = y[i] + h2 * k2y[i]
    _deriv(n, xt, yt, en, a, b, mu, tau, w_st, w_sw, K, k3x, k3y)
    for i in range(n):
        xt[i] = x[i] + dt * k3x[i]
        yt[i] = y[i] + dt * k3y[i]
    _deriv(n, xt, yt, en, a, b, mu, tau, w_st, w_sw, K, k4x, k4y)
    for i in range(n):
        x[i] += s6 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i])
        y[i] += s6 * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i])


def network_rk4_step(double[::1] x, double[::1] y, double[::1] en,
                     double a, double b, double mu, double tau,
                     double w_st, double w_sw, double[:, ::1] K, double dt):
    """Advance the coupled oscillator network one classical RK4 step in place."""
    cdef int n = x.shape[0]
    if n > MAXN:
        raise ValueError("kernel supports at most 16 units")
    with nogil:
        _rk4(n, &x[0], &y[0], &en[0], a, b, mu, tau, w_st, w_sw, &K[0, 0], dt)


def network_rk4_run(double[::1] x, double[::1] y, double[::1] en,
                    double a, double b, double mu, double tau,
                    double w_st, double w_sw, double[:, ::1] K, double dt,
                    int n_ticks, x_out=None, y_out=None):
    """Advance n_ticks steps; optionally record post-step states row by row."""
    cdef int n = x.shape[0]
    if n > MAXN:
        raise ValueError("kernel supports at most 16 units")
    cdef double[:, ::1] xo = x_out if x_out is not None else None
    cdef double[:, ::1] yo = y_out if y_out is not None else None
    cdef bint rec_x = x_out is not None
    cdef bint rec_y = y_out is not None
    cdef int i, j
    with nogil:
        for i in range(n_ticks):
            _rk4(n, &x[0], &y[0], &en[0], a, b, mu, tau, w_st, w_sw, &K[0, 0], dt)
            if rec_x:
                for j in range(n):
                    xo[i, j] = x[j]
            if rec_y:
                for j in range(n):
                    yo[i, j] = y[j]


def plant_rk4_step(double x, double v, double s, double q, double f_over_m,
                   double dt):
    """One RK4 step of xddot = q^2 (x - s) + f_over_m. Returns (x', v')."""
    cdef double q2 = q * q
    cdef double k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v, s6
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


def biquad_step(double[::1] w, double[::1] coeffs, double sample):
    """Direct-form-II biquad update. w: float64[2] taps (mutated).

    coeffs: float64[5] = (b0, b1, b2, a1, a2) with a0 normalized to 1.
    """
    cdef double w0 = sample - coeffs[3] * w[0] - coeffs[4] * w[1]
    cdef double out = coeffs[0] * w0 + coeffs[1] * w[0] + coeffs[2] * w[1]
    w[1] = w[0]
    w[0] = w0
    return out
