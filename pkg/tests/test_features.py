import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from loopgrade.errors import DegenerateResponse, NotSettled
from loopgrade.features import (FEATURE_IDS, FEATURE_NAMES, POPULAR_12, FeatureVector,
                                extract_features, local_maxima, popular_subset, read_features_csv,
                                write_features_csv)
from loopgrade.process import PidTuning, RejectionResponse, SopdtModel, simulate_rejection


def synthetic(fun, dt=0.001, horizon=40.0):
    t = np.arange(int(round(horizon / dt)) + 1) * dt
    return RejectionResponse(dt=dt, r=fun(t))


def damped(t):
    return np.exp(-0.2 * t) * np.sin(t)


def half_sine(t):
    return np.where(t <= np.pi, np.sin(t), 0.0)


def loop_response():
    return simulate_rejection(SopdtModel(1, 1, 0.5, 2 / 3), PidTuning(1.1, 1.2, 0.3))


# -- worked examples ----------------------------------------------------------

def test_damped_sinusoid():
    f = extract_features(synthetic(damped))
    t_star = math.atan(1 / 0.2)
    # oracle: dense evaluation of the closed form
    tt = np.linspace(0, 40, 4_000_001)
    dense = damped(tt)
    assert f["F1"] == pytest.approx(dense.max(), abs=1e-6)
    assert f["F2"] == pytest.approx(t_star, abs=5e-3)
    assert f["F15"] == pytest.approx(math.exp(-0.2 * 2 * math.pi), abs=5e-3)
    assert f["F16"] == pytest.approx(2 * math.pi, abs=1e-2)
    # the deepest undershoot comes half a period after the peak
    assert f["F4"] == pytest.approx(t_star + math.pi, abs=5e-3)
    assert f["F3"] == pytest.approx(-dense.min(), abs=1e-6)


def test_half_sine_pulse():
    f = extract_features(synthetic(half_sine, horizon=10.0))
    assert f["F1"] == pytest.approx(1.0, abs=1e-6)
    assert f["F2"] == pytest.approx(math.pi / 2, abs=1e-3)
    assert f["F3"] == 0.0 and f["F5"] == 0.0
    assert f["F8"] == pytest.approx(2.0, abs=2e-3)
    assert f["F9"] == pytest.approx(math.pi / 2, abs=2e-3)
    assert f["F18"] == pytest.approx(math.pi, abs=1e-2)
    assert f["F19"] == 0.0 and f["F20"] == 0.0
    # ITAE oracle: int_0^pi t sin t dt = pi
    assert f["F10"] == pytest.approx(math.pi, abs=2e-3)
    # rise 5% -> 95%: asin(0.95) - asin(0.05)
    assert f["F21"] == pytest.approx(math.asin(0.95) - math.asin(0.05), abs=2e-3)
    assert f["F22"] == pytest.approx(math.asin(0.95) - math.asin(0.05), abs=2e-3)
    assert f["F23"] == pytest.approx(1.0, abs=1e-3)
    # last exits of |r| >= c: pi - asin(c)
    for key, c in (("F24", 0.25), ("F25", 0.5), ("F26", 0.75)):
        assert f[key] == pytest.approx(math.pi - math.asin(c), abs=2e-3)
    assert f["F7"] == pytest.approx(math.pi - math.asin(0.01), abs=2e-3)


def test_decaying_exponential():
    f = extract_features(synthetic(lambda t: np.exp(-t), horizon=20.0))
    assert f["F1"] == 1.0 and f["F2"] == 0.0
    assert f["F3"] == 0.0 and f["F13"] == 0.0 and f["F14"] == 0.0
    assert f["F15"] == 0.0 and f["F16"] == 0.0
    assert f["F27"] == pytest.approx(20.0)
    assert f["F29"] == pytest.approx(1.0, abs=1e-2)
    assert f["F7"] == pytest.approx(math.log(100), abs=2e-3)
    assert f["F8"] == pytest.approx(1.0, abs=1e-3)
    # absent undershoot: F4 is the time of the global minimum (the horizon)
    assert f["F4"] == pytest.approx(20.0)


def test_zero_crossing_time():
    f = extract_features(synthetic(lambda t: np.sin(t) * np.exp(-t / 3)))
    assert f["F27"] == pytest.approx(math.pi, abs=1e-3)


# -- conventions --------------------------------------------------------------

def test_degenerate_response_is_rejected():
    with pytest.raises(DegenerateResponse):
        extract_features(synthetic(lambda t: 1e-8 * np.exp(-t)))
    with pytest.raises(DegenerateResponse):
        extract_features(synthetic(lambda t: -np.exp(-t)))


def test_unsettled_response_needs_opt_in():
    resp = synthetic(damped)
    resp.converged = False
    with pytest.raises(NotSettled):
        extract_features(resp)
    np.testing.assert_array_equal(extract_features(resp, allow_unsettled=True).values,
                                  extract_features(synthetic(damped)).values)


def test_plateau_counts_as_one_peak():
    r = np.array([0, 1, 2, 2, 2, 1, 0, 1.5, 1.5, 0.5, 0.0])
    np.testing.assert_array_equal(local_maxima(r, 1e-9), [2, 7])


def test_peaks_inside_tolerance_are_ignored():
    r = np.array([0.0, 1.0, 0.5, 0.5 + 1e-12, 0.5, 0.0])
    np.testing.assert_array_equal(local_maxima(r, 1e-9), [1])


def test_second_peak_must_be_positive():
    # the only later local maximum lies below zero
    f = extract_features(synthetic(lambda t: np.exp(-0.5 * t) * np.sin(t) - 0.05 * (t > 0), horizon=8.0))
    assert f["F15"] == 0.0 and f["F16"] == 0.0


def test_feature_order_is_frozen(tmp_path):
    assert FEATURE_IDS == tuple(f"F{i}" for i in range(1, 31))
    assert FEATURE_NAMES[:3] == ("MaxPeak", "MaxPeakTime", "MinPeak")
    assert FEATURE_NAMES[23:26] == ("25%DistRejected", "50%DistRejected", "75%DistRejected")
    assert FEATURE_NAMES[-1] == "DiffMaxToMin"
    fv = extract_features(loop_response())
    path = tmp_path / "f.csv"
    write_features_csv([fv, fv], path)
    assert path.read_text().splitlines()[0] == ",".join(FEATURE_IDS)
    back = read_features_csv(path)
    np.testing.assert_array_equal(back[1].values, fv.values)


def test_feature_vector_shape_is_checked():
    with pytest.raises(ValueError):
        FeatureVector(np.zeros(29))


# -- popular subset -----------------------------------------------------------

def test_popular_subset():
    assert len(POPULAR_12) == 12
    assert POPULAR_12 == ("F1", "F3", "F5", "F7", "F8", "F9", "F10", "F11", "F15", "F16", "F28", "F29")
    fv = extract_features(synthetic(half_sine, horizon=10.0))
    sub = popular_subset(fv)
    assert sub.shape == (12,)
    assert sub[0] == pytest.approx(1.0, abs=1e-6) and sub[1] == 0.0 and sub[2] == 0.0
    assert sub[4] == pytest.approx(2.0, abs=2e-3)
    np.testing.assert_array_equal(sub, [fv[k] for k in POPULAR_12])


# -- invariants ---------------------------------------------------------------

RATIOS = (("F5", "F3", "F1"), ("F14", "F13", "F12"), ("F20", "F19", "F18"),
          ("F23", "F21", "F22"), ("F30", "F28", "F29"))


def shapes():
    """Sums of up to three damped sinusoids."""
    term = st.tuples(st.floats(0.2, 2.0), st.floats(0.05, 1.5), st.floats(0.3, 3.0))
    return st.lists(term, min_size=1, max_size=3)


def build(terms, dt=0.01, horizon=60.0):
    t = np.arange(int(round(horizon / dt)) + 1) * dt
    r = sum(a * np.exp(-d * t) * np.sin(w * t) for a, d, w in terms)
    return RejectionResponse(dt=dt, r=r)


@settings(max_examples=60, deadline=None)
@given(shapes())
def test_ratio_identities(terms):
    resp = build(terms)
    if resp.r.max() < 1e-3:
        return
    f = extract_features(resp)
    for ratio, num, den in RATIOS:
        expect = f[num] / f[den] if f[den] != 0 else 0.0
        assert abs(f[ratio] - expect) <= 1e-9 * max(1.0, abs(expect))
    assert np.all(np.isfinite(f.values))
    times = ("F2", "F4", "F7", "F16", "F17", "F18", "F19", "F21", "F22", "F24", "F25", "F26", "F27")
    assert all(f[k] >= 0 for k in times)


def test_ratio_identities_on_a_loop_response():
    f = extract_features(loop_response())
    for ratio, num, den in RATIOS:
        assert f[ratio] == pytest.approx(f[num] / f[den], rel=1e-12)


AMPLITUDE_FREE = ("F5", "F14", "F15", "F20", "F23", "F30")


@settings(max_examples=30, deadline=None)
@given(shapes(), st.floats(0.05, 50.0))
def test_amplitude_invariance(terms, c):
    resp = build(terms)
    if resp.r.max() < 1e-3:
        return
    a = extract_features(resp)
    b = extract_features(RejectionResponse(dt=resp.dt, r=c * resp.r))
    for k in AMPLITUDE_FREE:
        assert b[k] == pytest.approx(a[k], rel=1e-9, abs=1e-12)


# feature -> power of the time-stretch factor
TIME_POWERS = {
    **{k: 1 for k in ("F2", "F4", "F6", "F7", "F16", "F17", "F18", "F19", "F21", "F22",
                      "F24", "F25", "F26", "F27", "F8", "F9", "F12", "F13")},
    "F10": 2, "F11": 3, "F28": -1, "F29": -1,
    **{k: 0 for k in ("F1", "F3", "F5", "F14", "F15", "F20", "F23", "F30")},
}


@pytest.mark.parametrize("a", [0.5, 3.0])
@pytest.mark.parametrize("make", [loop_response, lambda: synthetic(damped),
                                  lambda: synthetic(half_sine, horizon=10.0)])
def test_time_scaling_covariance(make, a):
    resp = make()
    # the same samples on a stretched time axis
    stretched = RejectionResponse(dt=a * resp.dt, r=resp.r.copy())
    f, g = extract_features(resp), extract_features(stretched)
    for k, p in TIME_POWERS.items():
        assert g[k] == pytest.approx(a ** p * f[k], rel=1e-9, abs=1e-12), k
