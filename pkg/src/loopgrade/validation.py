"""Fixed-process validation suites and the higher-order process bank.

The tuning banks are deterministic grids of multipliers applied to the
reference tuning.  Each case is labeled by the same rule used for the
training data (the "oracle") and by a trained classifier; a suite reports
both labels and their confusion matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classifiers import ClassifierModel, EvalReport, predict
from .datagen import LabeledSample, label_response, label_sample
from .errors import LoopgradeError, Unstable
from .frequency import loop_margins
from .identification import (TABLE_I, FitResult, HigherOrderProcess, canonical_response, fit_sopdt,
                             model_tuning, simulate_higher_order)
from .process import NormalizedProcess, RejectionResponse, denormalize, simulate_rejection
from .tuning import ReferenceMesh, interpolate_tuning

# 5 x 7 = 35 multiplier triples (a_kr, a_Ti, a_Td)
KR_GRID = (0.3, 0.8, 1.0, 1.25, 3.0)
TI_TD_PAIRS = ((1.0, 1.0), (0.95, 1.05), (1.05, 0.95), (0.3, 1.0), (3.0, 1.0), (1.0, 0.3), (1.0, 3.0))
# 5 x 4 = 20 triples for the higher-order processes
HO_KR_GRID = (0.5, 0.9, 1.0, 1.1, 2.0)
HO_TI_TD_PAIRS = ((1.0, 1.0), (0.7, 1.0), (1.4, 1.0), (1.0, 0.5))

SUITE_PROCESSES = (NormalizedProcess(0.4, 0.5), NormalizedProcess(0.3, 0.9))
BANK_NOTE = ("tuning bank generated from a fixed multiplier grid; it is not the "
             "handbook tuning set of the original study")


def tuning_bank() -> list[tuple]:
    return [(a1, a2, a3) for a1 in KR_GRID for a2, a3 in TI_TD_PAIRS]


def higher_order_bank() -> list[tuple]:
    return [(a1, a2, a3) for a1 in HO_KR_GRID for a2, a3 in HO_TI_TD_PAIRS]


@dataclass
class CaseResult:
    multipliers: tuple
    oracle: str | None
    predicted: str | None
    score: float | None
    sample: LabeledSample | None
    response: RejectionResponse | None
    unstable: bool = False
    error: str | None = None

    def as_dict(self) -> dict:
        s = self.sample
        return {"multipliers": list(self.multipliers), "oracle": self.oracle,
                "predicted": self.predicted, "score": self.score, "unstable": self.unstable,
                "error": self.error,
                "Am": None if s is None else s.Am, "phi_m": None if s is None else s.phi_m,
                "e_dist": None if s is None else s.e_dist}


@dataclass
class SuiteReport:
    name: str
    process: NormalizedProcess
    reference: RejectionResponse
    cases: list
    fit: FitResult | None = None
    expected: tuple | None = None
    notes: list = field(default_factory=list)

    @property
    def scored(self):
        return [c for c in self.cases if c.oracle is not None and c.predicted is not None]

    @property
    def report(self) -> EvalReport:
        y = [c.oracle == "OK" for c in self.scored]
        p = [c.predicted == "OK" for c in self.scored]
        return EvalReport.from_labels(np.array(y, dtype=int), np.array(p, dtype=int))

    def as_dict(self) -> dict:
        out = {"name": self.name, "L1": self.process.L1, "L2": self.process.L2,
               "report": self.report.as_dict(), "cases": [c.as_dict() for c in self.cases],
               "notes": self.notes}
        if self.fit is not None:
            m = self.fit.model
            out["fit"] = {"k": m.k, "tau1": m.tau1, "tau2": m.tau2, "tau0": m.tau0,
                          "residual": self.fit.residual, "L1": self.fit.normalized.L1,
                          "L2": self.fit.normalized.L2}
            out["expected"] = list(self.expected)
        return out


def _classify(model, sample):
    pr = predict(model, sample.features)
    return pr.label, pr.score


def run_fixed_suite(mesh: ReferenceMesh, model: ClassifierModel, p: NormalizedProcess,
                    bank=None) -> SuiteReport:
    """35-case suite on the SOPDT ``p`` with the reference tuning scaled by ``bank``."""
    entry = interpolate_tuning(mesh, p)
    plant = denormalize(p)
    cases = []
    for a in bank or tuning_bank():
        tun = entry.tuning.scaled(*a)
        try:
            sample = label_sample(entry, tun, a)
            try:
                resp = simulate_rejection(plant, tun)
                unstable = False
            except Unstable as exc:
                resp, unstable = exc.response, True
            label, score = _classify(model, sample)
            cases.append(CaseResult(a, sample.label, label, score, sample, resp, unstable))
        except LoopgradeError as exc:
            cases.append(CaseResult(a, None, None, None, None, None, error=str(exc)))
    return SuiteReport(name=f"SOPDT L1={p.L1:g} L2={p.L2:g}", process=p,
                       reference=entry.response_ref, cases=cases, notes=[BANK_NOTE])


def identify(proc: HigherOrderProcess, seed: int = 0) -> FitResult:
    """Open-loop step identification of a higher-order process."""
    return fit_sopdt(simulate_higher_order(proc), seed=seed)


def run_higher_order_suite(mesh: ReferenceMesh, model: ClassifierModel, name: str,
                           bank=None, seed: int = 0) -> SuiteReport:
    """Table I process ``name``: identify, tune from the mesh, assess the real loop."""
    proc, expected = TABLE_I[name]
    fit = identify(proc, seed)
    entry = interpolate_tuning(mesh, fit.normalized)
    cases = []
    for a in bank or higher_order_bank():
        tun = model_tuning(entry.tuning.scaled(*a), fit.model)
        try:
            mp = loop_margins(proc.lags, proc.tau0, 1.0, tun)
            unstable = False
            try:
                raw = simulate_higher_order(proc, "closed", tuning=tun)
            except Unstable as exc:
                raw, unstable = exc.response, True
            resp = canonical_response(raw, fit.model)
            sample = label_response(entry, resp, mp, a)
            label, score = _classify(model, sample)
            cases.append(CaseResult(a, sample.label, label, score, sample, resp, unstable))
        except LoopgradeError as exc:
            cases.append(CaseResult(a, None, None, None, None, None, error=str(exc)))
    return SuiteReport(name=f"{name} {proc.family} alpha={proc.alpha:g}", process=fit.normalized,
                       reference=entry.response_ref, cases=cases, fit=fit, expected=expected,
                       notes=[BANK_NOTE])


def table_i(seed: int = 0) -> dict:
    """Identified ``(L1, L2)`` for P1..P7 next to the tabulated values."""
    out = {}
    for name, (proc, expected) in TABLE_I.items():
        fit = identify(proc, seed)
        out[name] = {"family": proc.family, "alpha": proc.alpha, "expected": list(expected),
                     "L1": fit.normalized.L1, "L2": fit.normalized.L2, "residual": fit.residual}
    return out
