"""IAE-optimal reference PID tunings under gain/phase margin constraints.

Each normalized process gets the tuning minimizing the rejection IAE subject
to ``Am >= 2.5`` and ``phi_m >= 60 deg``.  A rectangular mesh of such
references is interpolated parameter-wise with tensor-product Catmull-Rom
splines to obtain references anywhere inside the design range.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import Infeasible, NoCrossover, OutOfRange, SimulationError
from .frequency import MarginPair, margins
from .optimize import nelder_mead
from .process import (NormalizedProcess, PidTuning, RejectionResponse, SopdtModel,
                      denormalize, iae, read_response_csv, simulate_rejection,
                      write_response_csv)

AM_MIN = 2.5
PHI_MIN = 60.0
AM_TOL = 0.01
PHI_TOL = 0.1
PENALTY = 1e4
UNSTABLE_COST = 1e6

N_RESTARTS = 4
RESTART_SPREAD = 3.0
SIMPLEX_STEP = 0.2
SIMPLEX_XTOL = 1e-3

MESH_FORMAT = "loopgrade-mesh/1"
GRID_L1 = tuple(round(0.1 * i, 10) for i in range(1, 7))
GRID_L2 = tuple(round(0.1 * i, 10) for i in range(1, 11))


@dataclass
class ReferenceEntry:
    process: NormalizedProcess
    tuning: PidTuning
    margins: MarginPair
    iae_ref: float
    response_ref: RejectionResponse


def heuristic_start(model: SopdtModel) -> PidTuning:
    t1, t2, t0 = model.tau1, model.tau2, model.tau0
    return PidTuning(kr=t1 / (abs(model.k) * (t0 + t2)), Ti=t1 + t2 / 2.0, Td=t1 * t2 / (t1 + t2))


def penalized_cost(model: SopdtModel, tuning: PidTuning) -> float:
    """IAE plus quadratic penalties on margin shortfall.

    Loops with ``Am < 1`` are unstable and are not simulated.
    """
    try:
        mp = margins(model, tuning)
    except NoCrossover:
        return UNSTABLE_COST
    pen = PENALTY * (max(0.0, AM_MIN - mp.Am) ** 2 + max(0.0, (PHI_MIN - mp.phi_m) / PHI_MIN) ** 2)
    if mp.Am <= 1.0:
        return UNSTABLE_COST + pen
    try:
        resp = simulate_rejection(model, tuning)
    except SimulationError:
        return UNSTABLE_COST + pen
    return iae(resp) + pen


def _search(model: SopdtModel, rng: np.random.Generator):
    start = np.log(heuristic_start(model).as_tuple())
    starts = [start] + [start + rng.uniform(-math.log(RESTART_SPREAD), math.log(RESTART_SPREAD), 3)
                        for _ in range(N_RESTARTS)]

    def cost(x):
        return penalized_cost(model, PidTuning(*np.exp(x)))

    best = None
    for x0 in starts:
        res = nelder_mead(cost, x0, step=SIMPLEX_STEP, xtol=SIMPLEX_XTOL)
        if best is None or res.fun < best.fun:
            best = res
    # one restart from the winner guards against a collapsed simplex
    polish = nelder_mead(cost, best.x, step=0.05, xtol=SIMPLEX_XTOL)
    if polish.fun < best.fun:
        best = polish
    return PidTuning(*np.exp(best.x))


def make_entry(p: NormalizedProcess, tuning: PidTuning) -> ReferenceEntry:
    """Simulate and analyse ``tuning`` on the canonical model of ``p``."""
    model = denormalize(p)
    mp = margins(model, tuning)
    resp = simulate_rejection(model, tuning)
    return ReferenceEntry(process=p, tuning=tuning, margins=mp, iae_ref=iae(resp), response_ref=resp)


def optimize_reference(p: NormalizedProcess, seed=0) -> ReferenceEntry:
    """Reference tuning for one normalized process.

    Raises ``Infeasible`` if the best point found violates the margin
    constraints beyond the numerical slack (0.01 on Am, 0.1 deg on phi_m).
    """
    if not p.in_design_range():
        raise OutOfRange(f"{p} lies outside the design range")
    rng = np.random.default_rng(seed)
    tuning = _search(denormalize(p), rng)
    try:
        entry = make_entry(p, tuning)
    except (NoCrossover, SimulationError) as exc:
        raise Infeasible(f"{p}: best tuning {tuning} is not analysable ({exc})") from exc
    if not entry.margins.satisfies(AM_MIN, PHI_MIN, AM_TOL, PHI_TOL) or not entry.response_ref.converged:
        raise Infeasible(f"{p}: no feasible tuning found (best {tuning}, {entry.margins})")
    return entry


def _catmull_rom_weights(t: float) -> np.ndarray:
    t2, t3 = t * t, t * t * t
    return 0.5 * np.array([-t3 + 2 * t2 - t, 3 * t3 - 5 * t2 + 2, -3 * t3 + 4 * t2 + t, t3 - t2])


def _pad_linear(v: np.ndarray) -> np.ndarray:
    # ghost nodes by linear extrapolation keep the spline interpolating at the border
    out = np.empty((v.shape[0] + 2, v.shape[1] + 2))
    out[1:-1, 1:-1] = v
    out[0, 1:-1] = 2 * v[0] - v[1]
    out[-1, 1:-1] = 2 * v[-1] - v[-2]
    out[:, 0] = 2 * out[:, 1] - out[:, 2]
    out[:, -1] = 2 * out[:, -2] - out[:, -3]
    return out


def _locate(axis: tuple, x: float):
    i = int(np.searchsorted(axis, x, side="right")) - 1
    i = min(max(i, 0), len(axis) - 2)
    return i, (x - axis[i]) / (axis[i + 1] - axis[i])


@dataclass
class ReferenceMesh:
    L1: tuple
    L2: tuple
    entries: dict  # (i, j) -> ReferenceEntry
    seed: int = 0
    version: str = MESH_FORMAT

    def __post_init__(self):
        if len(self.L1) < 2 or len(self.L2) < 2:
            raise ValueError("mesh needs at least two nodes per axis")
        missing = [(i, j) for i in range(len(self.L1)) for j in range(len(self.L2))
                   if (i, j) not in self.entries]
        if missing:
            raise ValueError(f"mesh is incomplete, missing nodes {missing}")
        self._padded = {name: _pad_linear(self.values(name)) for name in ("kr", "Ti", "Td")}

    def __len__(self):
        return len(self.entries)

    def values(self, name: str) -> np.ndarray:
        return np.array([[getattr(self.entries[i, j].tuning, name) for j in range(len(self.L2))]
                         for i in range(len(self.L1))])

    def contains(self, p: NormalizedProcess) -> bool:
        eps = 1e-12
        return (self.L1[0] - eps <= p.L1 <= self.L1[-1] + eps
                and self.L2[0] - eps <= p.L2 <= self.L2[-1] + eps)

    def node(self, p: NormalizedProcess):
        """The entry stored exactly at ``p``, or None."""
        try:
            return self.entries[self.L1.index(p.L1), self.L2.index(p.L2)]
        except ValueError:
            return None

    def tuning_at(self, p: NormalizedProcess) -> PidTuning:
        """Spline-interpolated ``(kr, Ti, Td)`` at ``p``."""
        if not self.contains(p):
            raise OutOfRange(f"{p} lies outside the mesh [{self.L1[0]}, {self.L1[-1]}] x "
                             f"[{self.L2[0]}, {self.L2[-1]}]")
        i, u = _locate(self.L1, p.L1)
        j, v = _locate(self.L2, p.L2)
        wu, wv = _catmull_rom_weights(u), _catmull_rom_weights(v)
        vals = [float(wu @ self._padded[name][i:i + 4, j:j + 4] @ wv) for name in ("kr", "Ti", "Td")]
        n_filt = self.entries[0, 0].tuning.N
        return PidTuning(*vals, N=n_filt)

    def to_json(self) -> str:
        nodes = []
        for (i, j), e in sorted(self.entries.items()):
            nodes.append({
                "i": i, "j": j, "L1": e.process.L1, "L2": e.process.L2,
                "kr": e.tuning.kr, "Ti": e.tuning.Ti, "Td": e.tuning.Td, "N": e.tuning.N,
                "Am": e.margins.Am, "phi_m": e.margins.phi_m,
                "omega_pc": e.margins.omega_pc, "omega_gc": e.margins.omega_gc,
                "iae": e.iae_ref, "dt": e.response_ref.dt,
                "response": _response_name(i, j),
            })
        doc = {"format": self.version, "seed": self.seed, "L1": list(self.L1),
               "L2": list(self.L2), "nodes": nodes}
        return json.dumps(doc, indent=1, sort_keys=True)


def _response_name(i, j):
    return f"ref_{i:02d}_{j:02d}.csv"


def _mesh_task(args):
    i, j, l1, l2, seed = args
    return (i, j), optimize_reference(NormalizedProcess(l1, l2), seed=(seed, i, j))


def build_mesh(seed=0, L1=GRID_L1, L2=GRID_L2, workers=None, progress=None) -> ReferenceMesh:
    """Optimize every grid node.  Node ``(i, j)`` uses the RNG stream
    ``(seed, i, j)`` so the mesh does not depend on execution order."""
    tasks = [(i, j, l1, l2, seed) for i, l1 in enumerate(L1) for j, l2 in enumerate(L2)]
    entries = {}
    if workers is None:
        workers = 1
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_mesh_task, tasks)
            for key, entry in results:
                entries[key] = entry
                if progress:
                    progress(entry)
    else:
        for task in tasks:
            key, entry = _mesh_task(task)
            entries[key] = entry
            if progress:
                progress(entry)
    return ReferenceMesh(L1=tuple(L1), L2=tuple(L2), entries=entries, seed=seed)


def interpolate_tuning(mesh: ReferenceMesh, p: NormalizedProcess) -> ReferenceEntry:
    """Reference entry at an arbitrary ``p`` inside the mesh.

    Grid nodes return the stored entry; elsewhere the tuning is interpolated and
    margins and response are recomputed by simulation.
    """
    stored = mesh.node(p)
    if stored is not None:
        return stored
    return make_entry(p, mesh.tuning_at(p))


def save_mesh(mesh: ReferenceMesh, path) -> Path:
    """Write the mesh JSON and its reference responses as sibling CSV files."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(mesh.to_json() + "\n")
    for (i, j), e in mesh.entries.items():
        write_response_csv(e.response_ref, path.parent / _response_name(i, j))
    return path


def load_mesh(path) -> ReferenceMesh:
    path = Path(path)
    doc = json.loads(path.read_text())
    if doc.get("format") != MESH_FORMAT:
        raise ValueError(f"{path}: unsupported mesh format {doc.get('format')!r}")
    entries = {}
    for nd in doc["nodes"]:
        resp = read_response_csv(path.parent / nd["response"])
        resp.dt = nd["dt"]  # keep the exact step, not the CSV difference
        entries[nd["i"], nd["j"]] = ReferenceEntry(
            process=NormalizedProcess(nd["L1"], nd["L2"]),
            tuning=PidTuning(nd["kr"], nd["Ti"], nd["Td"], nd["N"]),
            margins=MarginPair(nd["Am"], nd["phi_m"], nd["omega_pc"], nd["omega_gc"]),
            iae_ref=nd["iae"], response_ref=resp)
    return ReferenceMesh(L1=tuple(doc["L1"]), L2=tuple(doc["L2"]), entries=entries,
                         seed=doc["seed"], version=doc["format"])


def default_workers() -> int:
    return max(1, min(8, os.cpu_count() or 1))
