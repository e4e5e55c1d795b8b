"""Labeled datasets of perturbed PID loops.

Every attempt draws a process uniformly from the design rectangle, takes the
interpolated reference tuning, multiplies each PID parameter by an
independent ``N(1, 0.15^2)`` factor and labels the result OK when both
margins stay within 10% of the reference margins and the rejection response
stays close to the reference response.  Attempt ``i`` uses the RNG stream
``(seed, i)`` and acceptance into the balanced dataset is decided in index
order, so the output never depends on how attempts are scheduled.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BudgetExceeded, DomainError, LoopgradeError, Unstable, ZeroReference
from .features import FEATURE_IDS, FeatureVector, extract_features
from .frequency import margins
from .process import (DESIGN_L1, DESIGN_L2, NormalizedProcess, PidTuning, RejectionResponse,
                      denormalize, simulate_rejection)
from .tuning import ReferenceEntry, ReferenceMesh, interpolate_tuning

MULT_STD = 0.15
MULT_FLOOR = 0.05
BAND = 0.1
E_DIST_MAX = 0.1
BUDGET_FACTOR = 50

OK, NOK = "OK", "NOK"
PROVENANCE = ("L1", "L2", "a1", "a2", "a3", "Am", "phim", "e_dist")
CSV_HEADER = FEATURE_IDS + ("label",) + PROVENANCE
DATASET_FORMAT = "loopgrade-dataset/1"
# independent RNG streams per dataset role
STREAM_TRAIN, STREAM_VALIDATION, STREAM_RAW = 0, 1, 2


@dataclass(frozen=True)
class LabeledSample:
    features: FeatureVector
    label: str
    L1: float
    L2: float
    a1: float
    a2: float
    a3: float
    Am: float
    phi_m: float
    e_dist: float
    Am_norm: float = math.nan
    phi_m_norm: float = math.nan

    @property
    def margins_in_band(self) -> bool:
        return abs(self.Am_norm) <= 1.0 and abs(self.phi_m_norm) <= 1.0

    def csv_row(self) -> list[str]:
        prov = (self.L1, self.L2, self.a1, self.a2, self.a3, self.Am, self.phi_m, self.e_dist)
        return [repr(float(x)) for x in self.features.values] + [self.label] + \
            [repr(float(x)) for x in prov]


def _multiplier(rng: np.random.Generator) -> float:
    while True:
        a = float(rng.normal(1.0, MULT_STD))
        if a > MULT_FLOOR:
            return a


def perturb_tuning(ref: PidTuning, rng: np.random.Generator):
    """Scale ``kr``, ``Ti`` and ``Td`` by independent positive normal factors.

    Draws at or below 0.05 are redrawn.  Returns ``(tuning, a1, a2, a3)``.
    """
    a1, a2, a3 = _multiplier(rng), _multiplier(rng), _multiplier(rng)
    return ref.scaled(a1, a2, a3), a1, a2, a3


def e_dist(ref: RejectionResponse, lab: RejectionResponse) -> float:
    """Normalized L1 distance of ``lab`` from ``ref``.

    ``lab`` is resampled onto the reference grid when the steps differ; the
    shorter trajectory is extended with zeros.
    """
    r_ref = ref.r
    r_lab = lab.r
    if not math.isclose(lab.dt, ref.dt, rel_tol=1e-12):
        n = int(math.floor(lab.horizon / ref.dt + 1e-9)) + 1
        r_lab = np.interp(np.arange(n) * ref.dt, lab.t, lab.r)
    n = max(r_ref.size, r_lab.size)
    a = np.zeros(n)
    b = np.zeros(n)
    a[:r_ref.size] = r_ref
    b[:r_lab.size] = r_lab
    den = float(np.trapezoid(np.abs(a), dx=ref.dt))
    if den < 1e-9:
        raise ZeroReference(f"reference area {den:.3g} is numerically zero")
    return float(np.trapezoid(np.abs(a - b), dx=ref.dt)) / den


def label_sample(entry: ReferenceEntry, candidate: PidTuning, multipliers=(1.0, 1.0, 1.0)) -> LabeledSample:
    """Simulate ``candidate`` on the entry's process and label it against the reference.

    Unstable candidates are labeled NOK with features of the truncated
    trajectory.  Non-finite runs and loops without a gain crossover raise a
    ``LoopgradeError`` so the caller can draw a replacement.
    """
    model = denormalize(entry.process)
    mp = margins(model, candidate)
    try:
        resp = simulate_rejection(model, candidate)
    except Unstable as exc:
        resp = exc.response
    return label_response(entry, resp, mp, multipliers)


def label_response(entry: ReferenceEntry, resp: RejectionResponse, mp, multipliers=(1.0, 1.0, 1.0)) -> LabeledSample:
    """Label a canonical-scale response with known margins ``mp`` against ``entry``."""
    fv = extract_features(resp, allow_unsettled=True)
    if not np.all(np.isfinite(fv.values)):
        raise DomainError("features of the candidate response are not finite")
    ed = e_dist(entry.response_ref, resp)
    ref = entry.margins
    am_norm = (mp.Am - ref.Am) / (BAND * ref.Am)
    ph_norm = (mp.phi_m - ref.phi_m) / (BAND * ref.phi_m)
    ok = abs(am_norm) <= 1.0 and abs(ph_norm) <= 1.0 and ed < E_DIST_MAX
    return LabeledSample(features=fv, label=OK if ok else NOK, L1=entry.process.L1,
                         L2=entry.process.L2, a1=multipliers[0], a2=multipliers[1],
                         a3=multipliers[2], Am=mp.Am, phi_m=mp.phi_m, e_dist=ed,
                         Am_norm=am_norm, phi_m_norm=ph_norm)


def draw_attempt(mesh: ReferenceMesh, seed: int, index: int, stream: int = STREAM_TRAIN):
    """Attempt ``index`` of ``(seed, stream)``: a labeled sample, or None if unusable."""
    rng = np.random.default_rng([seed, stream, index])
    # the full mesh spans the design rectangle; restricted meshes draw inside themselves
    p = NormalizedProcess(float(rng.uniform(max(DESIGN_L1[0], mesh.L1[0]), min(DESIGN_L1[1], mesh.L1[-1]))),
                          float(rng.uniform(max(DESIGN_L2[0], mesh.L2[0]), min(DESIGN_L2[1], mesh.L2[-1]))))
    try:
        entry = interpolate_tuning(mesh, p)
        cand, a1, a2, a3 = perturb_tuning(entry.tuning, rng)
        return label_sample(entry, cand, (a1, a2, a3))
    except LoopgradeError:
        return None


def relabel(mesh: ReferenceMesh, sample: LabeledSample) -> LabeledSample:
    """Recompute a sample from its provenance (process and multipliers)."""
    entry = interpolate_tuning(mesh, NormalizedProcess(sample.L1, sample.L2))
    cand = entry.tuning.scaled(sample.a1, sample.a2, sample.a3)
    return label_sample(entry, cand, (sample.a1, sample.a2, sample.a3))


_WORKER_MESH = None


def _init_worker(mesh):
    global _WORKER_MESH
    _WORKER_MESH = mesh


def _worker_attempt(args):
    return draw_attempt(_WORKER_MESH, *args)


def iter_attempts(mesh: ReferenceMesh, seed: int, start: int = 0, stop: int | None = None,
                  workers: int = 1, batch: int = 64, stream: int = STREAM_TRAIN):
    """Yield ``(index, sample_or_None)`` in index order."""
    i = start
    pool = ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(mesh,)) if workers > 1 else None
    try:
        while stop is None or i < stop:
            hi = i + batch if stop is None else min(i + batch, stop)
            if pool is None:
                results = [draw_attempt(mesh, seed, k, stream) for k in range(i, hi)]
            else:
                results = list(pool.map(_worker_attempt, [(seed, k, stream) for k in range(i, hi)],
                                        chunksize=max(1, batch // (4 * workers))))
            for k, s in zip(range(i, hi), results):
                yield k, s
            i = hi
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)


@dataclass
class RawStats:
    """Counts over every usable attempt, before class balancing."""

    attempts: int = 0
    unusable: int = 0
    ok: int = 0
    close: int = 0  # e_dist below the threshold
    close_in_band: int = 0  # ... and both margins inside their bands

    def add(self, s: LabeledSample | None):
        self.attempts += 1
        if s is None:
            self.unusable += 1
            return
        self.ok += s.label == OK
        if s.e_dist < E_DIST_MAX:
            self.close += 1
            self.close_in_band += s.margins_in_band

    @property
    def usable(self) -> int:
        return self.attempts - self.unusable

    @property
    def ok_fraction(self) -> float:
        return self.ok / self.usable if self.usable else math.nan

    @property
    def band_given_close(self) -> float:
        return self.close_in_band / self.close if self.close else math.nan

    def as_dict(self) -> dict:
        return {"attempts": self.attempts, "unusable": self.unusable, "ok": self.ok,
                "close": self.close, "close_in_band": self.close_in_band}


@dataclass
class Dataset:
    samples: list
    seed: int = 0
    mesh_version: str = ""
    stats: RawStats = field(default_factory=RawStats)
    stream: int = STREAM_TRAIN

    def __len__(self):
        return len(self.samples)

    @property
    def X(self) -> np.ndarray:
        return np.array([s.features.values for s in self.samples]).reshape(-1, len(FEATURE_IDS))

    @property
    def y(self) -> np.ndarray:
        """1 for OK, 0 for NOK."""
        return np.array([s.label == OK for s in self.samples], dtype=int)

    def counts(self) -> dict:
        n_ok = int(self.y.sum())
        return {OK: n_ok, NOK: len(self) - n_ok}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for s in self.samples:
            w.writerow(s.csv_row())
        return buf.getvalue()

    def digest(self) -> str:
        return hashlib.sha256(self.to_csv().encode()).hexdigest()

    def metadata(self) -> dict:
        return {"format": DATASET_FORMAT, "seed": self.seed, "stream": self.stream,
                "mesh_version": self.mesh_version,
                "counts": self.counts(), "raw": self.stats.as_dict(), "sha256": self.digest()}


def generate_dataset(mesh: ReferenceMesh, n_samples: int, seed: int = 0, workers: int = 1,
                     progress=None, stream: int = STREAM_TRAIN) -> Dataset:
    """Balanced dataset of ``n_samples`` (half OK, half NOK).

    Raises ``BudgetExceeded`` when a class quota is still open after
    ``50 * n_samples`` attempts.
    """
    if n_samples <= 0 or n_samples % 2:
        raise DomainError(f"n_samples must be a positive even count, got {n_samples}")
    quota = n_samples // 2
    have = {OK: 0, NOK: 0}
    samples = []
    stats = RawStats()
    budget = BUDGET_FACTOR * n_samples
    for _, s in iter_attempts(mesh, seed, 0, budget, workers=workers, stream=stream):
        stats.add(s)
        if s is not None and have[s.label] < quota:
            have[s.label] += 1
            samples.append(s)
            if progress:
                progress(len(samples), n_samples)
        if have[OK] == quota and have[NOK] == quota:
            break
    else:
        raise BudgetExceeded(f"after {budget} attempts: {have[OK]} OK, {have[NOK]} NOK "
                             f"of {quota} each")
    return Dataset(samples=samples, seed=seed, mesh_version=mesh.version, stats=stats, stream=stream)


def raw_statistics(mesh: ReferenceMesh, n_attempts: int, seed: int = 0, workers: int = 1,
                   stream: int = STREAM_RAW) -> RawStats:
    """Label statistics over ``n_attempts`` unbalanced draws."""
    stats = RawStats()
    for _, s in iter_attempts(mesh, seed, 0, n_attempts, workers=workers, stream=stream):
        stats.add(s)
    return stats


def _parse_row(row) -> LabeledSample:
    nf = len(FEATURE_IDS)
    fv = FeatureVector(np.array([float(x) for x in row[:nf]]))
    label = row[nf]
    if label not in (OK, NOK):
        raise DomainError(f"unknown label {label!r}")
    prov = [float(x) for x in row[nf + 1:]]
    return LabeledSample(fv, label, *prov)


def read_dataset(path) -> Dataset:
    """Load a dataset CSV and its ``.json`` sidecar when present."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != CSV_HEADER:
        raise DomainError(f"{path}: header does not match the dataset schema")
    samples = [_parse_row(r) for r in rows[1:]]
    meta_path = path.with_suffix(".json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    return Dataset(samples=samples, seed=meta.get("seed", 0), mesh_version=meta.get("mesh_version", ""),
                   stats=RawStats(**meta.get("raw", {})), stream=meta.get("stream", STREAM_TRAIN))


def write_dataset(ds: Dataset, path) -> Path:
    """Write ``path`` (CSV) and the metadata sidecar next to it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(ds.to_csv())
    path.with_suffix(".json").write_text(json.dumps(ds.metadata(), indent=1, sort_keys=True) + "\n")
    return path
