"""SOPDT process description and closed-loop load-disturbance simulation.

The loop is the classic disturbance-rejection arrangement: constant setpoint
(zero), a PID acting on ``e = sp - y`` and a load step ``delta_d`` entering at
the plant input, ahead of the transport delay.  Responses are returned in
normalized form ``r = (y - y_pre) / (k * delta_d)`` so they do not depend on
the process gain or on the disturbance amplitude.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import DomainError, NumericalFailure, Unstable

DESIGN_L1 = (0.1, 0.6)
DESIGN_L2 = (0.1, 1.0)

DEFAULT_N = 10.0
SETTLE_TOL = 1e-3
SETTLE_WINDOW = 5.0  # in units of tau1 + tau0
HORIZON_CAP = 200.0  # in units of tau1 + tau0
BLOWUP = 1000.0
DT_MIN, DT_MAX = 1e-3, 1e-2


@dataclass(frozen=True)
class NormalizedProcess:
    L1: float
    L2: float

    def in_design_range(self) -> bool:
        return (DESIGN_L1[0] - 1e-12 <= self.L1 <= DESIGN_L1[1] + 1e-12
                and DESIGN_L2[0] - 1e-12 <= self.L2 <= DESIGN_L2[1] + 1e-12)


@dataclass(frozen=True)
class SopdtModel:
    """``k * exp(-tau0 s) / ((tau1 s + 1)(tau2 s + 1))`` with ``tau1 >= tau2``."""

    k: float
    tau1: float
    tau2: float
    tau0: float

    def __post_init__(self):
        for name in ("k", "tau1", "tau2", "tau0"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.tau1 >= self.tau2 > 0):
            raise DomainError(f"need tau1 >= tau2 > 0, got tau1={self.tau1}, tau2={self.tau2}")
        if not self.tau0 > 0:
            raise DomainError(f"need tau0 > 0, got {self.tau0}")
        if self.k == 0 or not math.isfinite(self.k):
            raise DomainError(f"process gain must be finite and nonzero, got {self.k}")

    @property
    def lags(self) -> tuple[float, float]:
        return (self.tau1, self.tau2)

    @property
    def time_scale(self) -> float:
        return self.tau1 + self.tau0

    def normalize(self) -> NormalizedProcess:
        return normalize(self)


@dataclass(frozen=True)
class PidTuning:
    """Ideal parallel PID ``kr (1 + 1/(Ti s) + Td s / (1 + Td s / N))``.

    ``Ti = inf`` switches integral action off.
    """

    kr: float
    Ti: float
    Td: float
    N: float = DEFAULT_N

    def __post_init__(self):
        for name in ("kr", "Ti", "Td", "N"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.kr > 0 and self.Ti > 0 and self.Td >= 0 and self.N > 0):
            raise DomainError(f"invalid PID tuning {self}")

    def scaled(self, a_kr=1.0, a_ti=1.0, a_td=1.0) -> "PidTuning":
        return PidTuning(self.kr * a_kr, self.Ti * a_ti, self.Td * a_td, self.N)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.kr, self.Ti, self.Td)


@dataclass
class RejectionResponse:
    """Uniformly sampled normalized rejection trajectory, ``r[0]`` at the step instant."""

    dt: float
    r: np.ndarray
    delta_d: float = 1.0
    converged: bool = True
    gain: float = 1.0  # process gain k used to produce ``r``
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.dt = float(self.dt)
        self.r = np.asarray(self.r, dtype=float)

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.r.size) * self.dt

    @property
    def horizon(self) -> float:
        return (self.r.size - 1) * self.dt

    def __len__(self):
        return self.r.size


def normalize(model: SopdtModel) -> NormalizedProcess:
    """Map physical SOPDT parameters onto ``(L1, L2)``."""
    return NormalizedProcess(model.tau0 / (model.tau1 + model.tau0), model.tau2 / model.tau1)


def denormalize(p: NormalizedProcess) -> SopdtModel:
    """Canonical SOPDT with ``k = tau1 = 1`` for a normalized pair."""
    if not 0 < p.L1 < 1:
        raise DomainError(f"L1 must lie in (0, 1), got {p.L1}")
    if not 0 < p.L2 <= 1:
        raise DomainError(f"L2 must lie in (0, 1], got {p.L2}")
    return SopdtModel(k=1.0, tau1=1.0, tau2=p.L2, tau0=p.L1 / (1.0 - p.L1))


def default_dt(lags: Sequence[float], tau0: float, tuning: PidTuning | None = None) -> float:
    """Integration step: fastest mode / 50, clamped to ``[1e-3, 1e-2]``.

    The step is further limited so that it never exceeds the dead time (the
    delay line must reach strictly into the past) nor the derivative filter
    time constant (RK4 stability on that state).
    """
    fast = min(lags)
    if tau0 > 0:
        fast = min(fast, tau0)
    dt = min(max(fast / 50.0, DT_MIN), DT_MAX)
    if tau0 > 0:
        dt = min(dt, tau0)
    if tuning is not None and tuning.Td > 0:
        dt = min(dt, tuning.Td / tuning.N)
    return dt


def simulate_chain(lags: Sequence[float], tau0: float, k: float, tuning: PidTuning,
                   delta_d: float = 1.0, dt: float | None = None,
                   time_scale: float | None = None, horizon: float | None = None,
                   raise_on_failure: bool = True) -> RejectionResponse:
    """Closed-loop rejection for ``k exp(-tau0 s) / prod(1 + lag_i s)``.

    ``time_scale`` sets the settling window (5x) and the hard cap (200x); it
    defaults to ``max(lags) + tau0``.  A fixed ``horizon`` disables settling
    detection and integrates exactly that long.
    """
    lags_arr = np.asarray(lags, dtype=float)
    if lags_arr.ndim != 1 or lags_arr.size == 0 or np.any(lags_arr <= 0):
        raise DomainError("lags must be a non-empty sequence of positive time constants")
    if tau0 < 0:
        raise DomainError("dead time must be non-negative")
    if delta_d == 0:
        raise DomainError("disturbance amplitude must be nonzero")
    if dt is None:
        dt = default_dt(lags_arr, tau0, tuning)
    if dt <= 0:
        raise DomainError("dt must be positive")
    if 0 < tau0 < dt:
        raise DomainError(f"dt={dt} exceeds the dead time {tau0}")
    if time_scale is None:
        time_scale = float(lags_arr.max()) + tau0

    if horizon is None:
        n_max = int(math.ceil(HORIZON_CAP * time_scale / dt))
        settle_steps = int(math.ceil(SETTLE_WINDOW * time_scale / dt))
    else:
        n_max = int(round(horizon / dt))
        settle_steps = n_max + 1
    inv_ti = 0.0 if math.isinf(tuning.Ti) else 1.0 / tuning.Ti

    r, status = _kernels.simulate_loop(
        lags_arr, float(tau0), float(tuning.kr * k), inv_ti, float(tuning.Td),
        float(tuning.N), float(delta_d), float(dt), n_max, SETTLE_TOL, settle_steps, BLOWUP)
    resp = RejectionResponse(dt=dt, r=r, delta_d=delta_d, gain=k,
                             converged=status == _kernels.STATUS_OK)
    if raise_on_failure:
        if status == _kernels.STATUS_UNSTABLE:
            raise Unstable(f"|r| exceeded {BLOWUP} at t={resp.horizon:.4g}", resp)
        if status == _kernels.STATUS_NONFINITE:
            raise NumericalFailure(f"non-finite state at t={resp.horizon:.4g}", resp)
    return resp


def simulate_rejection(model: SopdtModel, tuning: PidTuning, delta_d: float = 1.0,
                       dt: float | None = None, horizon: float | None = None,
                       raise_on_failure: bool = True) -> RejectionResponse:
    """Normalized load-disturbance rejection of the SOPDT loop.

    Raises ``Unstable`` once ``|r|`` passes 1000 and ``NumericalFailure`` on a
    non-finite state; both carry the truncated trajectory in ``.response``.
    """
    return simulate_chain(model.lags, model.tau0, model.k, tuning, delta_d=delta_d, dt=dt,
                          time_scale=model.time_scale, horizon=horizon,
                          raise_on_failure=raise_on_failure)


def iae(resp: RejectionResponse) -> float:
    """Trapezoidal IAE of the physical control error ``|r| * |k delta_d|``."""
    if resp.r.size < 2:
        return 0.0
    return float(np.trapezoid(np.abs(resp.r), dx=resp.dt)) * abs(resp.gain * resp.delta_d)


def write_response_csv(resp: RejectionResponse, path) -> None:
    """Export ``t,r`` rows at full precision."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "r"])
        for i, v in enumerate(resp.r):
            w.writerow([repr(float(i * resp.dt)), repr(float(v))])


def read_response_csv(path, delta_d: float = 1.0, gain: float = 1.0) -> RejectionResponse:
    """Read a ``t,r`` (or ``t,y``) file written with a uniform sample period."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if len(header) != 2 or header[0] != "t":
        raise DomainError(f"{path}: expected a two-column header starting with 't'")
    data = np.array([[float(a), float(b)] for a, b in body])
    t, r = data[:, 0], data[:, 1]
    dt = float(t[1] - t[0])
    if not np.allclose(np.diff(t), dt, rtol=1e-6, atol=1e-12):
        raise DomainError(f"{path}: samples are not uniformly spaced")
    return RejectionResponse(dt=dt, r=r, delta_d=delta_d, gain=gain)
