"""Open-loop frequency response and gain/phase margins of the PID loop.

The phase is evaluated in closed form as a sum of continuous terms, so no
numerical unwrapping is needed.  The controller numerator
``1 + s (Ti + Tf) + s^2 Ti (Tf + Td)`` has a positive imaginary part for every
``w > 0``, which pins its angle to ``(0, pi)``; the delay contributes
``-w tau0`` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import NoCrossover
from .process import PidTuning, SopdtModel

POINTS_PER_DECADE = 100


@dataclass(frozen=True)
class MarginPair:
    Am: float  # math.inf when the phase never reaches -180 deg
    phi_m: float  # degrees
    omega_pc: float
    omega_gc: float

    def satisfies(self, am_min=2.5, phi_min=60.0, am_tol=0.01, phi_tol=0.1) -> bool:
        return self.Am >= am_min - am_tol and self.phi_m >= phi_min - phi_tol


def _controller(tuning: PidTuning, s):
    tf = tuning.Td / tuning.N
    c = 1.0 + tuning.Td * s / (1.0 + tf * s)
    if not math.isinf(tuning.Ti):
        c = c + 1.0 / (tuning.Ti * s)
    return tuning.kr * c


def chain_response(lags: Sequence[float], tau0: float, k: float, tuning: PidTuning, omega):
    """``C(jw) G(jw)`` for a lag-chain plant with input delay."""
    w = np.asarray(omega, dtype=float)
    s = 1j * w
    g = k * np.exp(-tau0 * s)
    for lag in lags:
        g = g / (lag * s + 1.0)
    return _controller(tuning, s) * g


def open_loop_response(model: SopdtModel, tuning: PidTuning, omega):
    """Complex open-loop frequency response ``L(jw)`` of the SOPDT loop."""
    return chain_response(model.lags, model.tau0, model.k, tuning, omega)


def chain_phase(lags: Sequence[float], tau0: float, tuning: PidTuning, omega):
    """Unwrapped open-loop phase in radians (continuous from ``w -> 0``)."""
    w = np.asarray(omega, dtype=float)
    tf = tuning.Td / tuning.N
    if math.isinf(tuning.Ti):
        ph = np.arctan(w * (tf + tuning.Td)) - np.arctan(w * tf)
    else:
        ti = tuning.Ti
        ph = (np.arctan2(w * (ti + tf), 1.0 - w * w * ti * (tf + tuning.Td))
              - 0.5 * np.pi - np.arctan(w * tf))
    for lag in lags:
        ph = ph - np.arctan(w * lag)
    return ph - w * tau0


def _log_mag(lags, tau0, k, tuning, w):
    return np.log(np.abs(chain_response(lags, tau0, abs(k), tuning, w)))


def _frequency_grid(lags, tau0, k, tuning):
    scale = max(lags) + tau0
    fast = min(list(lags) + ([tau0] if tau0 > 0 else []))
    lo = 1e-3 / scale
    # integral action makes |L| grow without bound as w -> 0
    for _ in range(30 if not math.isinf(tuning.Ti) else 0):
        if _log_mag(lags, tau0, k, tuning, lo) > 0:
            break
        lo /= 10.0
    hi = 1e3 / fast
    n = int(math.ceil(POINTS_PER_DECADE * math.log10(hi / lo))) + 1
    return np.logspace(math.log10(lo), math.log10(hi), n)


def _first_down_crossing(w, f, fun):
    """Smallest root of ``fun`` where the sampled ``f`` goes from > 0 to <= 0."""
    idx = np.flatnonzero((f[:-1] > 0) & (f[1:] <= 0))
    if idx.size == 0:
        return None
    i = idx[0]
    if f[i + 1] == 0:
        return float(w[i + 1])
    return brentq(fun, w[i], w[i + 1], xtol=1e-14 * w[i], rtol=1e-13, maxiter=200)


def phase_crossover(lags, tau0, k, tuning, grid=None):
    """First frequency where the unwrapped phase reaches -180 deg and the
    gain margin there; ``(inf, inf)`` if it never does on the grid."""
    w = _frequency_grid(lags, tau0, k, tuning) if grid is None else grid
    fun = lambda x: float(chain_phase(lags, tau0, tuning, x)) + np.pi
    w_pc = _first_down_crossing(w, chain_phase(lags, tau0, tuning, w) + np.pi, fun)
    if w_pc is None:
        return math.inf, math.inf
    return w_pc, float(1.0 / np.abs(chain_response(lags, tau0, abs(k), tuning, w_pc)))


def loop_margins(lags: Sequence[float], tau0: float, k: float, tuning: PidTuning) -> MarginPair:
    """First-crossover gain and phase margins of a lag-chain loop."""
    w = _frequency_grid(lags, tau0, k, tuning)
    lm = _log_mag(lags, tau0, k, tuning, w)
    if not lm[0] > 0:
        raise NoCrossover("|L| stays below 1 on the whole grid")
    fun = lambda x: float(_log_mag(lags, tau0, k, tuning, x))
    w_gc = _first_down_crossing(w, lm, fun)
    if w_gc is None:
        raise NoCrossover("|L| never drops to 1 on the grid")
    phi_m = 180.0 + math.degrees(float(chain_phase(lags, tau0, tuning, w_gc)))
    w_pc, am = phase_crossover(lags, tau0, k, tuning, grid=w)
    return MarginPair(Am=am, phi_m=phi_m, omega_pc=w_pc, omega_gc=w_gc)


def margins(model: SopdtModel, tuning: PidTuning) -> MarginPair:
    """Gain margin (ratio) and phase margin (degrees) of the SOPDT loop."""
    return loop_margins(model.lags, model.tau0, model.k, tuning)


def ultimate_gain(model: SopdtModel) -> float:
    """Largest proportional-only gain keeping the loop stable."""
    p_only = PidTuning(kr=1.0, Ti=math.inf, Td=0.0)
    w_pc, am = phase_crossover(model.lags, model.tau0, model.k, p_only)
    return am
