import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from loopgrade import datagen
from loopgrade.datagen import (CSV_HEADER, NOK, OK, Dataset, LabeledSample, e_dist, generate_dataset,
                               label_response, label_sample, perturb_tuning, read_dataset, relabel,
                               write_dataset)
from loopgrade.errors import BudgetExceeded, DomainError, ZeroReference
from loopgrade.features import FeatureVector
from loopgrade.frequency import margins
from loopgrade.process import NormalizedProcess, PidTuning, RejectionResponse, denormalize
from loopgrade.tuning import make_entry

P = NormalizedProcess(0.4, 0.5)
REF = PidTuning(0.75, 1.25, 0.3)  # well damped on P; stands in for a mesh entry


@pytest.fixture(scope="module")
def entry():
    return make_entry(P, REF)


def synthetic(fun, dt=0.001, horizon=20.0):
    t = np.arange(int(round(horizon / dt)) + 1) * dt
    return RejectionResponse(dt=dt, r=fun(t))


class ConstantRng:
    """Stand-in generator whose normal draws come from a fixed script."""

    def __init__(self, values):
        self.values = list(values)

    def normal(self, mean, std):
        return self.values.pop(0)


# -- perturbation -------------------------------------------------------------

def test_identity_multipliers_keep_the_tuning():
    tun, a1, a2, a3 = perturb_tuning(REF, ConstantRng([1.0, 1.0, 1.0]))
    assert tun == REF and (a1, a2, a3) == (1.0, 1.0, 1.0)


def test_small_draws_are_redrawn_not_clamped():
    tun, a1, a2, a3 = perturb_tuning(REF, ConstantRng([-0.3, 0.05, 0.7, 1.2, 0.01, 0.9]))
    assert (a1, a2, a3) == (0.7, 1.2, 0.9)
    assert tun.kr == REF.kr * 0.7


def test_multiplier_statistics():
    rng = np.random.default_rng(2024)
    a = np.array([datagen._multiplier(rng) for _ in range(100_000)])
    assert 0.998 <= a.mean() <= 1.002
    assert 0.148 <= a.std() <= 0.152
    assert a.min() > 0.05


def test_perturbation_is_reproducible():
    draws = [perturb_tuning(REF, np.random.default_rng(7)) for _ in range(2)]
    assert draws[0] == draws[1]


# -- e_dist -------------------------------------------------------------------

def test_e_dist_of_identical_responses():
    r = synthetic(lambda t: np.exp(-t) * np.sin(2 * t))
    assert e_dist(r, r) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 3.0))
def test_e_dist_under_amplitude_scaling(c):
    r = synthetic(lambda t: np.exp(-t) * np.sin(2 * t))
    assert e_dist(r, RejectionResponse(r.dt, c * r.r)) == pytest.approx(abs(1 - c), abs=1e-12)


def test_e_dist_ten_percent_scale():
    r = synthetic(lambda t: t * np.exp(-t))
    assert e_dist(r, RejectionResponse(r.dt, 1.1 * r.r)) == pytest.approx(0.1, abs=1e-6)


def test_e_dist_of_two_exponentials():
    ref = synthetic(lambda t: np.exp(-t))
    lab = synthetic(lambda t: np.exp(-2 * t))
    assert e_dist(ref, lab) == pytest.approx(0.5, abs=2e-3)


def test_e_dist_is_not_symmetric():
    ref = synthetic(lambda t: np.exp(-t))
    lab = synthetic(lambda t: np.exp(-2 * t))
    assert e_dist(lab, ref) == pytest.approx(1.0, abs=4e-3)


def test_e_dist_resamples_and_zero_extends():
    ref = synthetic(lambda t: np.exp(-t), dt=0.001, horizon=20.0)
    coarse = synthetic(lambda t: np.exp(-2 * t), dt=0.004, horizon=10.0)
    assert e_dist(ref, coarse) == pytest.approx(0.5, abs=3e-3)
    short = synthetic(lambda t: np.exp(-t), dt=0.001, horizon=10.0)
    # the missing tail of ref beyond t = 10 counts in full
    assert e_dist(ref, short) == pytest.approx(math.exp(-10), rel=0.02)


def test_e_dist_zero_reference():
    with pytest.raises(ZeroReference):
        e_dist(RejectionResponse(0.01, np.zeros(10)), synthetic(np.exp))


# -- labeling -----------------------------------------------------------------

def test_reference_labels_itself_ok(entry):
    s = label_sample(entry, REF)
    assert s.label == OK
    assert s.e_dist == 0.0
    assert s.Am_norm == 0.0 and s.phi_m_norm == 0.0


def test_doubled_gain_is_nok(entry):
    s = label_sample(entry, REF.scaled(2.0), (2.0, 1.0, 1.0))
    assert s.Am == pytest.approx(entry.margins.Am / 2, rel=1e-9)
    assert s.Am_norm < -1
    assert s.label == NOK


def test_e_dist_threshold_is_strict(entry):
    mp = entry.margins
    resp = entry.response_ref
    close = label_response(entry, RejectionResponse(resp.dt, 1.099 * resp.r), mp)
    far = label_response(entry, RejectionResponse(resp.dt, 1.101 * resp.r), mp)
    assert close.e_dist == pytest.approx(0.099, abs=1e-9) and close.label == OK
    assert far.label == NOK


def test_margin_band_edges(entry):
    resp = entry.response_ref
    ref = entry.margins
    inside = type(ref)(1.099 * ref.Am, 0.901 * ref.phi_m, ref.omega_pc, ref.omega_gc)
    outside = type(ref)(1.101 * ref.Am, ref.phi_m, ref.omega_pc, ref.omega_gc)
    a = label_response(entry, resp, inside)
    b = label_response(entry, resp, outside)
    assert a.label == OK and abs(a.Am_norm) <= 1 and abs(a.phi_m_norm) <= 1
    assert b.label == NOK and b.Am_norm > 1


def test_unstable_candidate_is_nok(entry):
    s = label_sample(entry, REF.scaled(5.0))
    assert s.label == NOK
    assert np.all(np.isfinite(s.features.values))


def test_margins_in_provenance_match_frequency_module(entry):
    tun = REF.scaled(1.05, 0.9, 1.1)
    s = label_sample(entry, tun, (1.05, 0.9, 1.1))
    mp = margins(denormalize(P), tun)
    assert (s.Am, s.phi_m) == (mp.Am, mp.phi_m)
    assert (s.a1, s.a2, s.a3) == (1.05, 0.9, 1.1)


# -- datasets -----------------------------------------------------------------

def _fake_sample(i, label):
    fv = FeatureVector(np.linspace(0, 1, 30) * (i + 1) / 7.0)
    return LabeledSample(fv, label, 0.1 + i / 100, 0.5, 1.0 + i / 3, 0.9, 1.1, 2.5, 60.0 + i / 9, 0.01 * i)


class FakeMesh:
    version = "fake"


def test_dataset_csv_round_trip_is_byte_identical(tmp_path):
    ds = Dataset([_fake_sample(i, OK if i % 2 else NOK) for i in range(10)], seed=3, mesh_version="m")
    p1 = write_dataset(ds, tmp_path / "a.csv")
    back = read_dataset(p1)
    p2 = write_dataset(back, tmp_path / "b.csv")
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.read_text().splitlines()[0] == ",".join(CSV_HEADER)
    assert back.seed == 3 and back.counts() == {OK: 5, NOK: 5}


def test_dataset_header_schema():
    assert CSV_HEADER[:30] == tuple(f"F{i}" for i in range(1, 31))
    assert CSV_HEADER[30:] == ("label", "L1", "L2", "a1", "a2", "a3", "Am", "phim", "e_dist")


def test_odd_sizes_are_rejected():
    with pytest.raises(DomainError):
        generate_dataset(None, 7)


def test_budget_is_enforced(monkeypatch):
    monkeypatch.setattr(datagen, "draw_attempt", lambda mesh, seed, i, stream: _fake_sample(0, NOK))
    with pytest.raises(BudgetExceeded):
        generate_dataset(object(), 4)


def test_balancing_follows_attempt_order(monkeypatch):
    # attempts are drawn in batches, so indices past the script still get a label
    labels = [NOK, NOK, NOK, OK, NOK, OK, OK]
    monkeypatch.setattr(datagen, "draw_attempt",
                        lambda mesh, seed, i, stream: None if i == 2 else _fake_sample(i, labels[i] if i < len(labels) else NOK))
    ds = generate_dataset(FakeMesh(), 4)
    assert [s.label for s in ds.samples] == [NOK, NOK, OK, OK]
    assert [round(100 * (s.L1 - 0.1)) for s in ds.samples] == [0, 1, 3, 5]
    assert ds.stats.attempts == 6 and ds.stats.unusable == 1


@pytest.mark.slow
def test_generated_dataset_is_balanced_deterministic_and_relabels(mesh):
    a = generate_dataset(mesh, 20, seed=11)
    b = generate_dataset(mesh, 20, seed=11, workers=2, stream=datagen.STREAM_TRAIN)
    assert a.counts() == {OK: 10, NOK: 10}
    assert a.to_csv() == b.to_csv()
    for s in a.samples[:6]:
        again = relabel(mesh, s)
        assert again.label == s.label
        np.testing.assert_array_equal(again.features.values, s.features.values)
    other = generate_dataset(mesh, 20, seed=11, stream=datagen.STREAM_VALIDATION)
    assert other.digest() != a.digest()


@pytest.mark.slow
def test_raw_ok_fraction_is_in_band():
    import _artifacts
    st_ = _artifacts.raw_stats()
    assert st_.attempts >= 10_000
    assert 0.2 <= st_.ok_fraction <= 0.8, f"raw OK fraction {st_.ok_fraction:.3f}"
