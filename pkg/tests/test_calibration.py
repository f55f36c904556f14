import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holee_barriers.calibration import (
    EmpiricalCurve,
    SearchConfig,
    calibrate,
    cubic_baseline,
    model_yields,
    reconstruct_drift,
    residual_spline,
    residual_yield,
    rmse,
)
from holee_barriers.drift import DriftCurve
from holee_barriers.errors import ValidationError
from holee_barriers.fixtures import JGB_PARAMS, JGB_RMSE_MODEL, JGB_RMSE_SHADOW, load_jgb
from holee_barriers.pricing import ModelBundle, YieldPoint, yield_curve

SYNTH = (0.004, 0.15, -0.1)
SYNTH_T = np.array([0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 30.0])


def _curve(params, maturities=SYNTH_T):
    ys = [p.yield_value for p in model_yields(params, maturities)]
    return EmpiricalCurve(maturities, np.array(ys), label="synthetic")


@pytest.fixture(scope="module")
def synthetic_fit():
    return calibrate(_curve(SYNTH))


def test_synthetic_round_trip(synthetic_fit):
    r = synthetic_fit
    assert np.allclose(r.params, SYNTH, atol=1e-5)
    assert r.rmse <= 1e-9
    assert r.sigma == pytest.approx(math.sqrt(2 * r.beta**3))
    assert r.ground_level > 0


def test_fit_never_worse_than_any_start(synthetic_fit):
    assert synthetic_fit.objective <= min(synthetic_fit.start_objectives)
    assert synthetic_fit.n_evaluations > 0


def test_calibration_is_deterministic():
    curve = _curve(SYNTH, SYNTH_T[::2])
    a = calibrate(curve, search=SearchConfig(max_iter=400))
    b = calibrate(curve, search=SearchConfig(max_iter=400))
    assert a.params == b.params and a.rmse == b.rmse


def test_start_grid():
    pts = np.array(SearchConfig().starts())
    assert pts.shape == (9, 3)
    np.testing.assert_allclose(pts[0], [0.005, 0.21, -0.15])
    assert len({tuple(p) for p in pts}) == 9


def test_admissibility_floor_is_respected():
    # a curve that wants a ground level near zero, fitted with a floor above it
    r = calibrate(_curve((0.0, 0.1, -0.1)), search=SearchConfig(r_min=0.01, max_iter=800))
    assert r.ground_level >= 0.01 - 1e-12
    assert r.r0 <= r.z
    assert r.rmse > 1e-6


def test_linear_drift_residuals(synthetic_fit):
    # a linear drift on top of the fitted model shows up as R_r = (nu/2) tau
    nu = 0.001
    z, beta, r0 = synthetic_fit.params
    from holee_barriers.spectral import ModelParams, build_semi_spectrum

    sp = build_semi_spectrum(ModelParams.from_beta(beta))
    drift = DriftCurve.piecewise_linear([0.0, 100.0], [r0, r0 + 100 * nu])
    ys = np.array([p.yield_value for p in yield_curve(z, 0.0, SYNTH_T, ModelBundle(sp, drift))])
    res = residual_yield(EmpiricalCurve(SYNTH_T, ys), synthetic_fit)
    np.testing.assert_allclose([p.yield_value for p in res], 0.5 * nu * SYNTH_T, atol=1e-12)
    rebuilt = reconstruct_drift(res)
    s = np.linspace(0.0, 30.0, 61)
    np.testing.assert_allclose(rebuilt.nu(s), nu, atol=1e-6)
    np.testing.assert_allclose(rebuilt.chi(s) - rebuilt.chi(0.0), nu * s, atol=1e-9)


def test_zero_residuals_give_zero_drift():
    res = [YieldPoint(float(m), 0.0) for m in SYNTH_T]
    d = reconstruct_drift(res, chi_t=-0.05)
    s = np.linspace(0.0, 40.0, 81)
    np.testing.assert_allclose(d.nu(s), 0.0, atol=1e-15)
    np.testing.assert_allclose(d.chi(s), -0.05, atol=1e-15)


def test_jgb_eta_round_trip(jgb):
    tab = load_jgb()
    curve = EmpiricalCurve(tab.maturities, tab["empirical"])
    ys = model_yields(JGB_PARAMS, tab.maturities)
    from holee_barriers.calibration import CalibrationResult

    res = CalibrationResult(*JGB_PARAMS, sigma=jgb["sigma"], rmse=0.0, model_yields=ys,
                            residual_yields=[], converged=True, n_restarts_used=0)
    resid = residual_yield(curve, res)
    spline = residual_spline(resid)
    eta_pts = np.array([p.yield_value * p.maturity for p in resid])
    np.testing.assert_allclose(spline(tab.maturities), eta_pts, atol=1e-12)
    # pricing with the rebuilt drift gives back the observed curve
    drift = reconstruct_drift(resid, chi_t=jgb["r0"])
    np.testing.assert_allclose(drift.eta(0.0, tab.maturities), eta_pts, atol=1e-12)
    back = yield_curve(jgb["z"], 0.0, tab.maturities, ModelBundle(jgb["spectrum"], drift))
    np.testing.assert_allclose([p.yield_value for p in back], tab["empirical"], atol=1e-10)


def test_published_model_yields_rmse():
    tab = load_jgb()
    a = [YieldPoint(float(m), float(y)) for m, y in zip(tab.maturities, tab["empirical"])]
    for key, published in (("model1", JGB_RMSE_SHADOW), ("model2", JGB_RMSE_MODEL)):
        b = [YieldPoint(float(m), float(y)) for m, y in zip(tab.maturities, tab[key])]
        assert rmse(a, b) == pytest.approx(published, abs=5e-6)


def test_rmse_examples():
    a = [YieldPoint(1.0, 0.01), YieldPoint(2.0, 0.02)]
    b = [YieldPoint(1.0, 0.01), YieldPoint(2.0, 0.022)]
    assert rmse(a, a) == 0.0
    assert rmse(a, b) == pytest.approx(0.002 / math.sqrt(2))
    with pytest.raises(ValidationError):
        rmse(a, [YieldPoint(1.0, 0.01), YieldPoint(3.0, 0.02)])


@given(st.lists(st.floats(-0.01, 0.01), min_size=4, max_size=4))
def test_cubic_reproduces_exact_cubic(coef):
    T = np.array([0.5, 1.0, 2.0, 4.0, 7.0, 10.0, 20.0, 30.0])
    y = np.polynomial.polynomial.polyval(T, np.array(coef) * [1, 1e-1, 1e-2, 1e-4])
    fit = cubic_baseline(EmpiricalCurve(T, y))
    assert fit.rmse <= 1e-12
    np.testing.assert_allclose(fit(T), y, atol=1e-12)


def test_cubic_jgb_baseline():
    tab = load_jgb()
    fit = cubic_baseline(EmpiricalCurve(tab.maturities, tab["empirical"]))
    assert fit.rmse == pytest.approx(6.60e-4, rel=0.02)


def test_curve_validation():
    with pytest.raises(ValidationError):
        EmpiricalCurve(np.array([1.0, 1.0]), np.array([0.01, 0.02]))
    with pytest.raises(ValidationError):
        EmpiricalCurve(np.array([1.0, 2.0]), np.array([0.01, np.nan]))
    with pytest.raises(ValidationError):
        calibrate(EmpiricalCurve(np.array([1.0, 2.0, 3.0]), np.array([0.01, 0.02, 0.03])))
    with pytest.raises(ValidationError):
        cubic_baseline(EmpiricalCurve(np.array([1.0, 2.0, 3.0, 4.0]), np.full(4, 0.01)))
    with pytest.raises(ValidationError):
        reconstruct_drift([YieldPoint(1.0, 0.0), YieldPoint(2.0, 0.0)])


def test_subset_drops_short_end():
    c = _curve(SYNTH).subset(1.0)
    assert c.maturities[0] == 1.0 and c.maturities.size == SYNTH_T.size - 1
