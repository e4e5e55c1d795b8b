"""Compiled integration kernels for the closed loop.

The plant is a chain of first-order lags driven through a pure input delay;
the controller is an ideal parallel PID with a first-order derivative filter.
Integration is classical fixed-step RK4. The delayed plant input is read
from a ring buffer of controller-output history with linear interpolation;
the disturbance step is applied analytically so it is never smeared by the
interpolation.
"""

import math

import numpy as np
from numba import njit

STATUS_OK = 0  # settled inside the horizon
STATUS_CAP = 1  # hard cap reached without settling
STATUS_UNSTABLE = 2
STATUS_NONFINITE = 3


@njit(cache=True)
def _deriv(s, v, lags, nlag, inv_ti, td, n_filt, out):
    # s = [x_0 .. x_{nlag-1}, integral of e, derivative filter state]
    out[0] = (v - s[0]) / lags[0]
    for i in range(1, nlag):
        out[i] = (s[i - 1] - s[i]) / lags[i]
    e = -s[nlag - 1]
    out[nlag] = e
    if td > 0.0:
        out[nlag + 1] = (e - s[nlag + 1]) * n_filt / td
    else:
        out[nlag + 1] = 0.0


@njit(cache=True)
def _control(s, nlag, kr, inv_ti, td, n_filt):
    e = -s[nlag - 1]
    u = e + s[nlag] * inv_ti
    if td > 0.0:
        u += n_filt * (e - s[nlag + 1])
    return kr * u


@njit(cache=True)
def _delayed_input(hist, m, pos, delta_d):
    # plant input at fractional sample position ``pos`` (already shifted by the delay)
    if pos < 0.0:
        return 0.0
    i = int(math.floor(pos))
    f = pos - i
    u = hist[i % m]
    if f > 0.0:
        u = (1.0 - f) * u + f * hist[(i + 1) % m]
    return u + delta_d


@njit(cache=True)
def simulate_loop(lags, tau0, kr, inv_ti, td, n_filt, delta_d, dt,
                  n_max, settle_tol, settle_steps, blowup):
    """Integrate the disturbed loop from rest.

    Returns ``(x_out, status)`` where ``x_out`` holds the output of the last
    lag divided by ``delta_d`` (the gain-normalized deviation) at every step.
    """
    nlag = lags.shape[0]
    ns = nlag + 2
    s = np.zeros(ns)
    tmp = np.zeros(ns)
    k1 = np.zeros(ns)
    k2 = np.zeros(ns)
    k3 = np.zeros(ns)
    k4 = np.zeros(ns)
    out = np.zeros(n_max + 1)

    delayed = tau0 > 0.0
    d_steps = tau0 / dt
    m = int(d_steps) + 3
    hist = np.zeros(m)
    hist[0] = 0.0

    quiet = 0
    excited = False
    status = STATUS_CAP
    n_done = n_max
    half = 0.5 * dt
    for n in range(n_max):
        if delayed:
            v1 = _delayed_input(hist, m, n - d_steps, delta_d)
            v2 = _delayed_input(hist, m, n + 0.5 - d_steps, delta_d)
            v4 = _delayed_input(hist, m, n + 1.0 - d_steps, delta_d)
            _deriv(s, v1, lags, nlag, inv_ti, td, n_filt, k1)
            for j in range(ns):
                tmp[j] = s[j] + half * k1[j]
            _deriv(tmp, v2, lags, nlag, inv_ti, td, n_filt, k2)
            for j in range(ns):
                tmp[j] = s[j] + half * k2[j]
            _deriv(tmp, v2, lags, nlag, inv_ti, td, n_filt, k3)
            for j in range(ns):
                tmp[j] = s[j] + dt * k3[j]
            _deriv(tmp, v4, lags, nlag, inv_ti, td, n_filt, k4)
        else:
            v = _control(s, nlag, kr, inv_ti, td, n_filt) + delta_d
            _deriv(s, v, lags, nlag, inv_ti, td, n_filt, k1)
            for j in range(ns):
                tmp[j] = s[j] + half * k1[j]
            v = _control(tmp, nlag, kr, inv_ti, td, n_filt) + delta_d
            _deriv(tmp, v, lags, nlag, inv_ti, td, n_filt, k2)
            for j in range(ns):
                tmp[j] = s[j] + half * k2[j]
            v = _control(tmp, nlag, kr, inv_ti, td, n_filt) + delta_d
            _deriv(tmp, v, lags, nlag, inv_ti, td, n_filt, k3)
            for j in range(ns):
                tmp[j] = s[j] + dt * k3[j]
            v = _control(tmp, nlag, kr, inv_ti, td, n_filt) + delta_d
            _deriv(tmp, v, lags, nlag, inv_ti, td, n_filt, k4)
        for j in range(ns):
            s[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])

        r = s[nlag - 1] / delta_d
        out[n + 1] = r
        if delayed:
            hist[(n + 1) % m] = _control(s, nlag, kr, inv_ti, td, n_filt)
        if not math.isfinite(r):
            status = STATUS_NONFINITE
            n_done = n + 1
            break
        if abs(r) > blowup:
            status = STATUS_UNSTABLE
            n_done = n + 1
            break
        if abs(r) >= settle_tol:
            excited = True
            quiet = 0
        elif excited:
            quiet += 1
            if quiet >= settle_steps:
                status = STATUS_OK
                n_done = n + 1
                break
    return out[: n_done + 1], status
