import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from loopgrade.datagen import e_dist
from loopgrade.errors import DomainError, FitDiverged, NotSettled
from loopgrade.identification import (TABLE_I, HigherOrderProcess, StepRecord, canonical_response,
                                      fit_sopdt, fit_sopdt_closed_loop, model_tuning,
                                      simulate_higher_order, sopdt_step, step_response_chain)
from loopgrade.process import PidTuning, SopdtModel, simulate_rejection
from loopgrade.tuning import interpolate_tuning

PLANT = SopdtModel(1.0, 1.0, 0.5, 2.0 / 3.0)
TUNING = PidTuning(0.75, 1.25, 0.3)


def params(m):
    return m.k, m.tau1, m.tau2, m.tau0


# -- higher-order processes ---------------------------------------------------

def test_repeated_lag_step_matches_closed_form():
    rec = simulate_higher_order(HigherOrderProcess("G1", 3), dt=0.01, horizon=30.0)
    t = rec.t
    oracle = 1 - np.exp(-t) * (1 + t + t ** 2 / 2)
    assert np.max(np.abs(rec.y - oracle)) < 1e-3
    assert rec.y[-1] == pytest.approx(1.0, abs=1e-6)


def test_delayed_chain_is_dead_then_monotone():
    rec = simulate_higher_order(HigherOrderProcess("G2", 0.25), dt=0.005)
    assert np.all(rec.y[rec.t < 0.25] == 0.0)
    assert np.all(np.diff(rec.y) >= -1e-12)
    assert rec.y[-1] == pytest.approx(1.0, abs=1e-6)


def test_vanishing_alpha_is_first_order():
    rec = simulate_higher_order(HigherOrderProcess("G2", 1e-6), dt=0.01, horizon=12.0)
    assert np.max(np.abs(rec.y - (1 - np.exp(-rec.t)))) < 1e-3


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 0.9), st.floats(0.1, 2.0))
def test_chain_samples_agree_with_sopdt_formula(ratio, tau0):
    # two distinct lags are an SOPDT, whose step has a closed form
    dt = 0.01
    y = step_response_chain((1.0, ratio), tau0, 1.7, 0.5, dt, 800)
    t = np.arange(800) * dt
    np.testing.assert_allclose(y, sopdt_step(SopdtModel(1.7, 1.0, ratio, tau0), t, 0.5), atol=1e-12)


def test_nearly_equal_lags_fall_back_to_the_matrix_exponential():
    t = np.arange(600) * 0.01
    y = step_response_chain((1.0, 1.0 + 1e-5), 0.0, 1.0, 1.0, 0.01, 600)
    assert np.max(np.abs(y - (1 - (1 + t) * np.exp(-t)))) < 1e-4


def test_process_validation():
    with pytest.raises(DomainError):
        HigherOrderProcess("G3", 1.0)
    with pytest.raises(DomainError):
        HigherOrderProcess("G2", 0.0)
    with pytest.raises(DomainError):
        HigherOrderProcess("G1", 2.5)
    assert HigherOrderProcess("G2", 0.5).lags == (1.0, 0.5, 0.25, 0.125)


def test_closed_loop_mode_needs_a_tuning():
    with pytest.raises(DomainError):
        simulate_higher_order(HigherOrderProcess("G1", 3), "closed")
    r = simulate_higher_order(HigherOrderProcess("G1", 3), "closed", tuning=PidTuning(0.5, 2.5, 0.6))
    assert r.converged and abs(r.r[-1]) < 1e-2


# -- open-loop fit ------------------------------------------------------------

def test_open_loop_self_recovery():
    t = np.arange(0, 15, 0.01)
    fit = fit_sopdt(StepRecord(0.01, sopdt_step(PLANT, t, 2.0), u=2.0))
    for got, want in zip(params(fit.model), params(PLANT)):
        assert got == pytest.approx(want, rel=0.01)
    assert fit.residual < 1e-4


def test_open_loop_fit_handles_negative_gain_and_offset():
    t = np.arange(0, 15, 0.01)
    y = 3.0 + sopdt_step(SopdtModel(-1.5, 1.0, 0.5, 2 / 3), t)
    fit = fit_sopdt(StepRecord(0.01, y))
    assert fit.model.k == pytest.approx(-1.5, rel=0.01)
    assert fit.normalized.L1 == pytest.approx(0.4, abs=0.005)


@pytest.mark.parametrize("name", list(TABLE_I))
def test_table_rows_are_recovered(name):
    proc, (l1, l2) = TABLE_I[name]
    fit = fit_sopdt(simulate_higher_order(proc))
    assert fit.normalized.L1 == pytest.approx(l1, abs=0.05)
    assert fit.normalized.L2 == pytest.approx(l2, abs=0.05)
    assert fit.normalized.in_design_range()
    # the returned point beats every start
    assert fit.residual <= min(fit.start_residuals)


def test_g1_fit_has_equal_lags():
    fit = fit_sopdt(simulate_higher_order(TABLE_I["P2"][0]))
    assert 0.92 <= fit.normalized.L2 <= 1.0


def test_unsettled_record_is_rejected():
    t = np.arange(0, 3, 0.01)
    with pytest.raises(NotSettled):
        fit_sopdt(StepRecord(0.01, 1 - np.exp(-t / 5)))
    with pytest.raises(NotSettled):
        fit_sopdt(StepRecord(0.01, np.zeros(100)))


def test_oscillatory_record_diverges():
    t = np.arange(0, 80, 0.01)
    with pytest.raises(FitDiverged):
        fit_sopdt(StepRecord(0.01, 1 - np.exp(-0.1 * t) * np.cos(3 * t)))


def test_zero_amplitude_is_rejected():
    with pytest.raises(DomainError):
        fit_sopdt(StepRecord(0.01, np.ones(10)), u_amplitude=0.0)


# -- closed-loop fit ----------------------------------------------------------

@pytest.fixture(scope="module")
def rejection():
    return simulate_rejection(PLANT, TUNING, delta_d=0.5)


def test_closed_loop_self_recovery(rejection):
    fit = fit_sopdt_closed_loop(rejection, TUNING)
    for got, want in zip(params(fit.model), params(PLANT)):
        assert got == pytest.approx(want, rel=0.02)
    assert fit.residual <= min(fit.start_residuals)


def test_closed_loop_fit_ignores_a_stretched_start(rejection):
    a = fit_sopdt_closed_loop(rejection, TUNING)
    b = fit_sopdt_closed_loop(rejection, TUNING, x0=SopdtModel(1.0, 2.0, 1.0, 4.0 / 3.0))
    for got, want in zip(params(b.model), params(a.model)):
        assert got == pytest.approx(want, rel=0.02)


def test_closed_loop_fit_of_a_higher_order_loop():
    proc, _ = TABLE_I["P5"]
    resp = simulate_higher_order(proc, "closed", tuning=TUNING)
    fit = fit_sopdt_closed_loop(resp, TUNING)
    assert fit.normalized.L1 == pytest.approx(0.37, abs=0.07)
    assert fit.normalized.L2 == pytest.approx(0.5, abs=0.07)


# -- mapping between canonical and physical scales ------------------------------

def test_model_tuning_and_canonical_response_commute():
    model = SopdtModel(2.5, 4.0, 2.0, 8.0 / 3.0)  # the canonical (0.4, 0.5) stretched by 4
    canon = PidTuning(0.8, 1.2, 0.3)
    physical = simulate_rejection(model, model_tuning(canon, model))
    back = canonical_response(physical, model)
    ref = simulate_rejection(PLANT, canon)
    assert back.dt == pytest.approx(physical.dt / 4)
    assert e_dist(ref, back) < 1e-3
    assert model_tuning(canon, model).kr == pytest.approx(0.8 / 2.5)


@pytest.mark.slow
@pytest.mark.parametrize("name", list(TABLE_I))
def test_identified_tuning_keeps_the_reference_shape(name, mesh):
    proc, _ = TABLE_I[name]
    fit = fit_sopdt(simulate_higher_order(proc))
    entry = interpolate_tuning(mesh, fit.normalized)
    raw = simulate_higher_order(proc, "closed", tuning=model_tuning(entry.tuning, fit.model))
    dist = e_dist(entry.response_ref, canonical_response(raw, fit.model))
    assert dist < (0.35 if proc.family == "G2" else 0.6)

