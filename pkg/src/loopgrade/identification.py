"""SOPDT identification and the higher-order validation processes.

Two fitting paths are provided: an open-loop step record is matched against
the analytic SOPDT step response, and a closed-loop load-rejection record is
matched against a simulation of the candidate SOPDT behind the known PID.
Both minimize the sum of squared output errors with Nelder-Mead in the
logarithms of ``(|k|, tau1, tau2, tau0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.special import gammainc

from .errors import DomainError, FitDiverged, NotSettled, NumericalFailure
from .optimize import nelder_mead
from .process import (NormalizedProcess, PidTuning, RejectionResponse, SopdtModel, default_dt,
                      simulate_chain)

N_STARTS = 5
N_POLISH = 3
SIM_DT = 0.01  # closed-loop comparator step ceiling
JITTER = 2.0
FIT_XTOL = 1e-6
DEPARTURE = 0.02
DIVERGED = 0.1  # RMS residual relative to the step span
SETTLED = 0.01
PENALTY_COST = 1e30
LAG_SEPARATION = 1e-3  # relative gap below which partial fractions lose accuracy


@dataclass(frozen=True)
class HigherOrderProcess:
    """``G1 = 1/(1+s)^alpha`` or ``G2 = exp(-alpha s) / prod_{i=0..3}(1 + alpha^i s)``."""

    family: str
    alpha: float

    def __post_init__(self):
        if self.family not in ("G1", "G2"):
            raise DomainError(f"family must be G1 or G2, got {self.family!r}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if self.family == "G1" and abs(self.alpha - round(self.alpha)) > 1e-9:
            raise DomainError(f"G1 needs an integer lag count, got {self.alpha}")

    @property
    def lags(self) -> tuple:
        if self.family == "G1":
            return (1.0,) * int(round(self.alpha))
        return tuple(self.alpha ** i for i in range(4))

    @property
    def tau0(self) -> float:
        return 0.0 if self.family == "G1" else float(self.alpha)

    @property
    def time_scale(self) -> float:
        return sum(self.lags) + self.tau0


TABLE_I = {
    "P1": (HigherOrderProcess("G1", 3), (0.27, 1.0)),
    "P2": (HigherOrderProcess("G1", 4), (0.41, 1.0)),
    "P3": (HigherOrderProcess("G2", 0.25), (0.24, 0.28)),
    "P4": (HigherOrderProcess("G2", 0.3), (0.28, 0.33)),
    "P5": (HigherOrderProcess("G2", 0.4), (0.37, 0.5)),
    "P6": (HigherOrderProcess("G2", 0.5), (0.49, 1.0)),
    "P7": (HigherOrderProcess("G2", 0.6), (0.53, 1.0)),
}


@dataclass
class StepRecord:
    """Uniformly sampled open-loop output after an input step of ``u`` at t = 0."""

    dt: float
    y: np.ndarray
    u: float = 1.0

    def __post_init__(self):
        self.dt = float(self.dt)
        self.y = np.asarray(self.y, dtype=float)

    @property
    def t(self):
        return np.arange(self.y.size) * self.dt


@dataclass
class FitResult:
    model: SopdtModel
    residual: float  # RMS output error
    normalized: NormalizedProcess
    start_residuals: list = field(default_factory=list)


def _chain_matrices(lags):
    n = len(lags)
    A = np.zeros((n, n))
    b = np.zeros(n)
    for i, lag in enumerate(lags):
        A[i, i] = -1.0 / lag
        if i:
            A[i, i - 1] = 1.0 / lag
    b[0] = 1.0 / lags[0]
    return A, b


def _zoh(A, b, h):
    """State transition and constant-input gain over ``h`` (augmented exponential)."""
    n = A.shape[0]
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = A
    M[:n, n] = b
    E = expm(M * h)
    return E[:n, :n], E[:n, n]


def _unit_step_chain(lags, t):
    """Closed-form unit step response of ``prod 1/(1 + lag_i s)`` at times ``t``.

    Returns None when the lags are neither all equal nor well separated.
    """
    lags = np.sort(np.asarray(lags, dtype=float))[::-1]
    n = lags.size
    if np.all(lags == lags[0]):
        return gammainc(n, t / lags[0])
    if n > 1 and np.min(-np.diff(lags) / lags[:-1]) < LAG_SEPARATION:
        return None
    y = np.ones_like(t)
    for i, lag in enumerate(lags):
        others = np.delete(lags, i)
        y -= lag ** (n - 1) / np.prod(lag - others) * np.exp(-t / lag)
    y[t <= 0] = 0.0  # the residues cancel only to rounding
    return y


def step_response_chain(lags, tau0, k, u, dt, n):
    """Exact samples of a delayed lag-chain step response.

    Closed forms are used when available; they stay accurate when the lags
    span many decades, where the matrix exponential loses the slow modes.
    """
    s = np.maximum(np.arange(n) * dt - tau0, 0.0)
    y = _unit_step_chain(lags, s)
    if y is None:
        A, b = _chain_matrices(lags)
        y = np.zeros(n)
        k0 = int(math.ceil(tau0 / dt - 1e-12))
        if k0 < n:
            phi, gam = _zoh(A, b, dt)
            _, x = _zoh(A, b, k0 * dt - tau0)
            for i in range(k0, n):
                y[i] = x[-1]
                x = phi @ x + gam
    if not np.all(np.isfinite(y)):
        raise NumericalFailure("non-finite state in the lag-chain step response")
    return k * u * y


def simulate_higher_order(p: HigherOrderProcess, mode: str = "step", u: float = 1.0,
                          tuning: PidTuning | None = None, delta_d: float = 1.0,
                          dt: float | None = None, horizon: float | None = None):
    """Open-loop step (``StepRecord``) or closed-loop load rejection (``RejectionResponse``).

    The open-loop path is sampled exactly (zero-order-hold discretization of a
    constant input); the closed loop uses the PID loop integrator.
    """
    if mode == "step":
        if dt is None:
            dt = default_dt(p.lags, p.tau0)
        if horizon is None:
            horizon = 12.0 * p.time_scale
        n = int(round(horizon / dt)) + 1
        return StepRecord(dt, step_response_chain(p.lags, p.tau0, 1.0, u, dt, n), u)
    if mode == "closed":
        if tuning is None:
            raise DomainError("closed-loop simulation needs a PID tuning")
        return simulate_chain(p.lags, p.tau0, 1.0, tuning, delta_d=delta_d, dt=dt,
                              time_scale=p.time_scale, horizon=horizon)
    raise DomainError(f"mode must be 'step' or 'closed', got {mode!r}")


def sopdt_step(model: SopdtModel, t, u: float = 1.0) -> np.ndarray:
    """Analytic SOPDT step response."""
    t1, t2 = model.tau1, model.tau2
    s = np.maximum(np.asarray(t, dtype=float) - model.tau0, 0.0)
    if abs(t1 - t2) <= 1e-6 * t1:
        g = 1.0 - (1.0 + s / t1) * np.exp(-s / t1)
    else:
        g = 1.0 - (t1 * np.exp(-s / t1) - t2 * np.exp(-s / t2)) / (t1 - t2)
    return model.k * u * g


def _to_model(x, sign):
    k, a, b, d = np.exp(x)
    t1, t2 = max(a, b), min(a, b)
    return SopdtModel(sign * k, t1, t2, d)


def _multi_start(cost, x0, seed, extra=()):
    """Nelder-Mead from ``x0``, its jittered copies and ``extra`` starts, then
    restarts from the winner until a fresh simplex stops improving it."""
    rng = np.random.default_rng(seed)
    base = np.asarray(x0, dtype=float)
    starts = [base] + [base + rng.uniform(-math.log(JITTER), math.log(JITTER), 4)
                       for _ in range(N_STARTS - 1)]
    starts += [np.asarray(e, dtype=float) for e in extra]
    best, start_costs = None, []
    for s in starts:
        start_costs.append(cost(s))
        res = nelder_mead(cost, s, step=0.1, xtol=FIT_XTOL, max_iter=4000)
        if best is None or res.fun < best.fun:
            best = res
    for _ in range(N_POLISH):
        res = nelder_mead(cost, best.x, step=0.05, xtol=FIT_XTOL, max_iter=4000)
        if not res.fun < best.fun * (1 - 1e-9):
            break
        best = res
    return best, start_costs


def _check_settled(y, span):
    tail = y[int(0.9 * y.size):]
    if tail.size < 2 or np.ptp(tail) > SETTLED * abs(span):
        raise NotSettled("record does not reach steady state (last 10% still moving)")


def _finish(best, start_costs, n, span, sign):
    model = _to_model(best.x, sign)
    rms = math.sqrt(best.fun / n)
    if rms > DIVERGED * abs(span):
        raise FitDiverged(f"RMS residual {rms:.3g} exceeds {DIVERGED:.0%} of the span {abs(span):.3g}")
    return FitResult(model=model, residual=rms, normalized=model.normalize(),
                     start_residuals=[math.sqrt(c / n) for c in start_costs])


def fit_sopdt(record: StepRecord, u_amplitude: float | None = None, seed: int = 0,
              x0: SopdtModel | None = None) -> FitResult:
    """Fit an SOPDT to an open-loop step record."""
    u = record.u if u_amplitude is None else u_amplitude
    if u == 0:
        raise DomainError("step amplitude must be nonzero")
    y, t = record.y, record.t
    span = float(y[-1] - y[0])
    if span == 0:
        raise NotSettled("record shows no response")
    _check_settled(y, span)
    sign = 1.0 if span / u > 0 else -1.0
    if x0 is None:
        x0 = _graphical_guess(t, y - y[0], span, u)
    yy = y - y[0]

    def cost(x):
        m = _to_model(x, sign)
        e = sopdt_step(m, t, u) - yy
        return float(e @ e)

    best, starts = _multi_start(cost, np.log([abs(x0.k), x0.tau1, x0.tau2, x0.tau0]), seed)
    return _finish(best, starts, y.size, span, sign)


def _graphical_guess(t, y, span, u) -> SopdtModel:
    z = y / span
    dep = t[np.argmax(z > DEPARTURE)]
    t63 = t[np.argmax(z >= 0.632)]
    tau0 = max(dep, t[1])
    total = max(t63 - tau0, 2 * t[1])
    return SopdtModel(span / u, 2 * total / 3, total / 3, tau0)


def fit_sopdt_closed_loop(resp: RejectionResponse, tuning: PidTuning, delta_d: float | None = None,
                          seed: int = 0, x0: SopdtModel | None = None) -> FitResult:
    """Fit an SOPDT whose closed-loop load rejection under ``tuning`` matches ``resp``.

    The record is compared in physical units, ``y = r * gain * delta_d``.
    """
    dd = resp.delta_d if delta_d is None else delta_d
    if dd == 0:
        raise DomainError("disturbance amplitude must be nonzero")
    y = resp.r * resp.gain * resp.delta_d
    peak = float(y[np.argmax(np.abs(y))])
    if peak == 0:
        raise NotSettled("record shows no response")
    _check_settled(y - y[-1], peak)
    sign = 1.0 if peak / dd > 0 else -1.0
    # compare on every m-th sample so the comparator can integrate with a coarser step
    ceiling = SIM_DT if tuning.Td == 0 else min(SIM_DT, tuning.Td / tuning.N)
    m = max(1, int(ceiling / resp.dt + 1e-9))
    sim_dt = m * resp.dt
    ys = y[::m]
    n = ys.size
    horizon = (n - 1) * sim_dt

    t = resp.t
    z = y / peak
    dep = t[np.argmax(z > DEPARTURE)]
    t_pk = t[np.argmax(z)]
    total = max(t_pk - dep, 2 * sim_dt)
    guess = SopdtModel(sign * 1.5 * abs(peak / dd), 2 * total / 3, total / 3, max(dep, sim_dt))
    extra = []
    if x0 is None:
        x0 = guess
    else:
        extra.append(np.log([abs(guess.k), guess.tau1, guess.tau2, guess.tau0]))

    ts = np.arange(n) * sim_dt

    def cost(x):
        mdl = _to_model(x, sign)
        if mdl.tau0 < sim_dt:
            return PENALTY_COST
        # a step that divides the delay keeps the delay line off its
        # interpolation kinks, so the cost is smooth in tau0
        h = mdl.tau0 / math.ceil(mdl.tau0 / sim_dt - 1e-9)
        steps = int(math.ceil(horizon / h - 1e-9))
        sim = simulate_chain(mdl.lags, mdl.tau0, mdl.k, tuning, delta_d=dd, dt=h,
                             horizon=steps * h, raise_on_failure=False)
        if sim.r.size != steps + 1:
            return PENALTY_COST
        e = np.interp(ts, sim.t, sim.r) * mdl.k * dd - ys
        return float(e @ e)

    best, starts = _multi_start(cost, np.log([abs(x0.k), x0.tau1, x0.tau2, x0.tau0]), seed, extra)
    return _finish(best, starts, n, peak, sign)


def model_tuning(canonical: PidTuning, model: SopdtModel) -> PidTuning:
    """Map a tuning for the canonical process (``k = tau1 = 1``) onto ``model``."""
    return PidTuning(canonical.kr / model.k, canonical.Ti * model.tau1, canonical.Td * model.tau1,
                     canonical.N)


def canonical_response(resp: RejectionResponse, model: SopdtModel) -> RejectionResponse:
    """Express a physical rejection record on the canonical time and amplitude scale."""
    r = resp.r * resp.gain / model.k
    return RejectionResponse(dt=resp.dt / model.tau1, r=r, delta_d=resp.delta_d,
                             converged=resp.converged, gain=1.0, meta=dict(resp.meta))
