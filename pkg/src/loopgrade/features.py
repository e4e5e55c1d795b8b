"""Thirty control performance indices of a load-disturbance rejection response.

All indices are computed on the normalized response ``r(t)`` (first peak
positive).  Integrals use the trapezoidal rule on the uniform grid, slopes
use central differences (one-sided at the ends), and threshold crossing
instants are linearly interpolated between samples.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateResponse, NotSettled
from .process import RejectionResponse

FEATURE_NAMES = (
    "MaxPeak", "MaxPeakTime", "MinPeak", "MinPeakTime", "MinToMax", "MaxToMinTime",
    "SettlingTime", "IAE", "ISE", "ITAE", "IT2AE", "IAEPos", "IAENeg", "IAENegToPos",
    "DecayRatio", "DecayRatioTime", "PeakSettlingTime", "TimePos", "TimeNeg", "TimeNegToPos",
    "RisingTime", "FallingTime", "RisingToFallingTime", "25%DistRejected", "50%DistRejected",
    "75%DistRejected", "ZeroCrossingTime", "MaxDiff", "MinDiff", "DiffMaxToMin",
)
FEATURE_IDS = tuple(f"F{i}" for i in range(1, 31))
POPULAR_12 = ("F1", "F3", "F5", "F7", "F8", "F9", "F10", "F11", "F15", "F16", "F28", "F29")

SETTLING_BAND = 0.01
MIN_PEAK = 1e-6
PEAK_TOL = 1e-9  # relative to MaxPeak


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray  # shape (30,), ordered F1..F30

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (30,):
            raise ValueError(f"feature vector must have 30 entries, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    def __getitem__(self, key: str) -> float:
        return float(self.values[FEATURE_IDS.index(key)])

    def as_dict(self) -> dict:
        return dict(zip(FEATURE_IDS, self.values.tolist()))


def _ratio(num: float, den: float) -> float:
    return num / den if den != 0 else 0.0


def _last_exit(a: np.ndarray, thr: float, dt: float) -> float:
    """Last instant with ``a >= thr`` (interpolated onto the downward crossing)."""
    idx = np.flatnonzero(a >= thr)
    if idx.size == 0:
        return 0.0
    k = idx[-1]
    if k == a.size - 1:
        return k * dt
    return (k + (a[k] - thr) / (a[k] - a[k + 1])) * dt


def _down_crossing(r: np.ndarray, start: int, thr: float, dt: float):
    """First instant after sample ``start`` where ``r`` falls to ``thr``; None if never."""
    idx = np.flatnonzero(r[start + 1:] <= thr)
    if idx.size == 0:
        return None
    m = start + 1 + idx[0]
    a, b = r[m - 1], r[m]
    return (m - 1 + (a - thr) / (a - b)) * dt if a != b else m * dt


def local_maxima(r: np.ndarray, tol: float) -> np.ndarray:
    """Indices of local maxima, ignoring sample-to-sample changes within ``tol``.

    Plateaus (runs of changes inside the tolerance) count as one peak located at
    their highest sample.
    """
    d = np.diff(r)
    s = np.where(d > tol, 1, np.where(d < -tol, -1, 0))
    nz = np.flatnonzero(s)
    if nz.size < 2:
        return np.empty(0, dtype=int)
    ss = s[nz]
    ks = np.flatnonzero((ss[:-1] == 1) & (ss[1:] == -1))
    peaks = [nz[k] + 1 + int(np.argmax(r[nz[k] + 1: nz[k + 1] + 1])) for k in ks]
    return np.asarray(peaks, dtype=int)


def _rise_time(r: np.ndarray, i_pk: int, lo: float, hi: float, dt: float) -> float:
    below = np.flatnonzero(r[:i_pk] < lo)
    if below.size == 0:
        t_lo, k0 = 0.0, 0
    else:
        k = below[-1]
        t_lo = (k + (lo - r[k]) / (r[k + 1] - r[k])) * dt
        k0 = k + 1
    above = np.flatnonzero(r[k0:i_pk + 1] >= hi)
    m = k0 + above[0]
    if m > 0 and r[m - 1] < hi:
        t_hi = (m - 1 + (hi - r[m - 1]) / (r[m] - r[m - 1])) * dt
    else:
        t_hi = m * dt
    return max(t_hi - t_lo, 0.0)


def extract_features(resp: RejectionResponse, allow_unsettled: bool = False) -> FeatureVector:
    """Compute F1..F30 from a normalized rejection response.

    Conventions for shapes the index definitions do not cover: no undershoot
    gives ``F3 = F5 = 0``; no second positive peak gives ``F15 = F16 = 0``;
    no zero crossing gives ``F27`` = horizon; ratio indices with a zero
    denominator are 0.
    """
    if not resp.converged and not allow_unsettled:
        raise NotSettled("response did not settle; pass allow_unsettled=True to use the truncated horizon")
    r = resp.r
    dt = resp.dt
    n = r.size
    t = np.arange(n) * dt
    horizon = (n - 1) * dt
    absr = np.abs(r)

    i_pk = int(np.argmax(r))
    f1 = float(r[i_pk])
    if not f1 >= MIN_PEAK:
        raise DegenerateResponse(f"maximum peak {f1:.3g} below {MIN_PEAK}")
    f2 = i_pk * dt

    j = i_pk + int(np.argmin(r[i_pk:]))
    f3 = float(-r[j]) if r[j] < 0 else 0.0
    f4 = j * dt
    f5 = _ratio(f3, f1)
    f6 = f4 - f2

    f7 = _last_exit(absr, SETTLING_BAND, dt)
    f8 = float(np.trapezoid(absr, dx=dt))
    f9 = float(np.trapezoid(r * r, dx=dt))
    f10 = float(np.trapezoid(t * absr, dx=dt))
    f11 = float(np.trapezoid(t * t * absr, dx=dt))
    f12 = float(np.trapezoid(np.maximum(r, 0.0), dx=dt))
    f13 = float(np.trapezoid(np.maximum(-r, 0.0), dx=dt))
    f14 = _ratio(f13, f12)

    peaks = local_maxima(r, PEAK_TOL * f1)
    later = peaks[(peaks > i_pk) & (r[peaks] > 0)] if peaks.size else peaks
    if later.size:
        f15 = float(r[later[0]]) / f1
        f16 = later[0] * dt - f2
    else:
        f15 = f16 = 0.0

    f17 = max(f7 - f2, 0.0)
    f18 = float(np.count_nonzero(r > 0)) * dt
    f19 = float(np.count_nonzero(r < 0)) * dt
    f20 = _ratio(f19, f18)

    lo, hi = 0.05 * f1, 0.95 * f1
    f21 = _rise_time(r, i_pk, lo, hi, dt)
    t95 = _down_crossing(r, i_pk, hi, dt)
    if t95 is None:
        f22 = 0.0
    else:
        t5 = _down_crossing(r, i_pk, lo, dt)
        f22 = (horizon if t5 is None else t5) - t95
    f23 = _ratio(f21, f22)

    f24 = _last_exit(absr, 0.25 * f1, dt)
    f25 = _last_exit(absr, 0.50 * f1, dt)
    f26 = _last_exit(absr, 0.75 * f1, dt)
    tz = _down_crossing(r, i_pk, 0.0, dt)
    f27 = horizon if tz is None else tz

    slope = np.gradient(r, dt) if n > 1 else np.zeros(1)
    f28 = float(slope.max())
    f29 = float(abs(slope.min()))
    f30 = _ratio(f28, f29)

    return FeatureVector(np.array([
        f1, f2, f3, f4, f5, f6, f7, f8, f9, f10, f11, f12, f13, f14, f15,
        f16, f17, f18, f19, f20, f21, f22, f23, f24, f25, f26, f27, f28, f29, f30]))


def popular_subset(fv: FeatureVector) -> np.ndarray:
    """The twelve commonly used indices, in ``POPULAR_12`` order."""
    return np.array([fv[k] for k in POPULAR_12])


def feature_indices(names) -> list[int]:
    return [FEATURE_IDS.index(k) for k in names]


def write_features_csv(vectors, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FEATURE_IDS)
        for fv in vectors:
            w.writerow([repr(float(x)) for x in fv.values])


def read_features_csv(path) -> list[FeatureVector]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != FEATURE_IDS:
        raise ValueError(f"{path}: header does not match F1..F30")
    return [FeatureVector(np.array([float(x) for x in row])) for row in rows[1:]]
