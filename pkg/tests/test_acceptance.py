"""Acceptance checks, one test per criterion.

Each test records a single PASS/FAIL line that is printed in the pytest
terminal summary, and then asserts the criterion at its stated tolerance.
Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import math
import time

import numpy as np
import pytest
from scipy import integrate

from holee_barriers import airy_kernel as ak
from holee_barriers.calibration import (
    CalibrationResult,
    EmpiricalCurve,
    calibrate,
    cubic_baseline,
    model_yields,
    reconstruct_drift,
    residual_yield,
    rmse,
)
from holee_barriers.errors import ValidationError
from holee_barriers.fixtures import (
    JGB_FILE,
    JGB_PARAMS,
    JGB_RMSE_CUBIC,
    LEVEL_TABLE,
    UST_ALL_PARAMS,
    UST_FILE,
    UST_LONG_PARAMS,
    UST_RMSE_ALL,
    UST_RMSE_CUBIC_ALL,
    UST_RMSE_CUBIC_LONG,
    UST_RMSE_LONG,
    load_jgb,
    load_ust,
    verify_fixture,
)
from holee_barriers.oracle import McConfig, PdeGrid, mc_price, pde_price, pde_price_robin
from holee_barriers.pricing import (
    ModelBundle,
    PricingConfig,
    bond_price_interval,
    bond_price_robin,
    bond_price_semi,
    semi_terms,
    sum_series,
    yield_curve,
)
from holee_barriers.spectral import (
    ModelParams,
    build_interval_spectrum,
    build_robin_spectrum,
    build_semi_spectrum,
)
from oracles import averaged_sum

ORACLE_MATURITIES = (1.0, 5.0, 10.0, 30.0)


@pytest.fixture(scope="module", autouse=True)
def pinned_fixtures():
    # refuse to judge anything against edited market data
    for name in (JGB_FILE, UST_FILE):
        try:
            verify_fixture(name)
        except ValidationError as exc:
            pytest.exit(f"acceptance aborted: {exc}", returncode=3)


@pytest.fixture
def report(request):
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def emit(number, ok, detail):
        lines.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        print(lines[-1])

    return emit


ACCEPTANCE_KEY = pytest.StashKey[list]()


def _jgb_curve():
    tab = load_jgb()
    return tab, EmpiricalCurve(tab.maturities, tab["empirical"], tab.valuation_date, "jgb")


def _ust_curve():
    tab = load_ust()
    return tab, EmpiricalCurve(tab.maturities, tab["empirical"], tab.valuation_date, "ust")


def test_criterion_1_level_table(report):
    start = time.perf_counter()
    worst = 0.0
    for col, (_, beta, r0) in enumerate((JGB_PARAMS, UST_ALL_PARAMS, UST_LONG_PARAMS)):
        chi = 100 * build_semi_spectrum(ModelParams.from_beta(beta), 10).chi_levels(r0)
        worst = max(worst, float(np.max(np.abs(chi - LEVEL_TABLE[:, col]))))
    elapsed = time.perf_counter() - start
    ok = worst <= 0.05 and elapsed < 1.0
    report(1, ok, f"max |chi_n - table| = {worst:.4f} pp (tol 0.05), {elapsed:.2f} s (limit 1 s)")
    assert ok


def test_criterion_2_jgb_curve(report):
    tab, _ = _jgb_curve()
    start = time.perf_counter()
    ys = np.array([p.yield_value for p in model_yields(JGB_PARAMS, tab.maturities, PricingConfig(n_levels=300))])
    elapsed = time.perf_counter() - start
    gap_bp = 1e4 * np.abs(ys - tab["model2"])
    k = int(np.argmax(gap_bp))
    n_bad = int(np.count_nonzero(gap_bp > 0.5))
    ok = n_bad == 0 and elapsed < 5.0
    report(2, ok, f"max gap {gap_bp[k]:.2f} bp at T={tab.maturities[k]:.3f}y, {n_bad}/13 points over 0.5 bp, "
                  f"{elapsed:.2f} s (limit 5 s)")
    assert ok


def test_criterion_3_jgb_calibration(report):
    _, curve = _jgb_curve()
    start = time.perf_counter()
    fit = calibrate(curve)
    cubic = cubic_baseline(curve)
    elapsed = time.perf_counter() - start
    ok = fit.rmse <= 6.1e-4 and fit.rmse < cubic.rmse and elapsed < 60.0
    report(3, ok, f"rmse {fit.rmse:.4e} (need <= 6.1e-4 and < cubic {cubic.rmse:.4e}, published cubic "
                  f"{JGB_RMSE_CUBIC:.2e}), params z={fit.z:.6g} beta={fit.beta:.6g} r0={fit.r0:.6g}, "
                  f"{elapsed:.1f} s (limit 60 s)")
    assert ok


def test_criterion_4_ust_calibrations(report):
    _, curve = _ust_curve()
    start = time.perf_counter()
    fit_all = calibrate(curve)
    long_curve = curve.subset(1.0)
    fit_long = calibrate(long_curve)
    cub_all = cubic_baseline(curve)
    cub_long = cubic_baseline(long_curve)
    elapsed = time.perf_counter() - start

    # "attains within 10%": no worse than 1.1 x published; a lower RMSE also attains it
    fits_ok = fit_all.rmse <= 1.1 * UST_RMSE_ALL and fit_long.rmse <= 1.1 * UST_RMSE_LONG
    two_sided = (abs(fit_all.rmse / UST_RMSE_ALL - 1) <= 0.1, abs(fit_long.rmse / UST_RMSE_LONG - 1) <= 0.1)
    cubic_ok = (abs(cub_all.rmse / UST_RMSE_CUBIC_ALL - 1) <= 0.02
                and abs(cub_long.rmse / UST_RMSE_CUBIC_LONG - 1) <= 0.02)
    ok = fits_ok and cubic_ok and elapsed < 120.0
    report(4, ok, f"[read as rmse <= 1.1 x published] all-T rmse {fit_all.rmse:.4e} vs {UST_RMSE_ALL:.2e}, "
                  f"T>=1 rmse {fit_long.rmse:.4e} vs {UST_RMSE_LONG:.2e} (within-10% two-sided: {two_sided}); cubic {cub_all.rmse:.4e} / "
                  f"{cub_long.rmse:.4e} vs {UST_RMSE_CUBIC_ALL:.2e} / {UST_RMSE_CUBIC_LONG:.2e}; "
                  f"{elapsed:.1f} s (limit 120 s)")
    assert ok


def test_criterion_5_oracles(report, jgb):
    z, sigma, drift, sp = jgb["z"], jgb["sigma"], jgb["drift"], jgb["spectrum"]
    start = time.perf_counter()
    pde_gap, mc_sigmas = 0.0, 0.0
    for T in ORACLE_MATURITIES:
        ref = bond_price_semi(z, 0.0, T, sp, drift)
        pde_gap = max(pde_gap, abs(pde_price(z, 0.0, T, sigma, drift, PdeGrid()) / ref - 1))
        mc = mc_price(z, 0.0, T, sigma, drift, McConfig(n_paths=1_000_000, seed=2024))
        mc_sigmas = max(mc_sigmas, abs(mc.price - ref) / mc.std_error)
    elapsed = time.perf_counter() - start
    ok = pde_gap <= 1e-4 and mc_sigmas <= 3.0 and elapsed < 300.0
    report(5, ok, f"max PDE rel gap {pde_gap:.2e} (tol 1e-4), max MC gap {mc_sigmas:.2f} SE (tol 3) "
                  f"over T={ORACLE_MATURITIES}, {elapsed:.0f} s (limit 300 s)")
    assert ok


def test_criterion_6_robin_reduction(report, jgb):
    z, r0, p = jgb["z"], jgb["r0"], jgb["params"]
    neumann = build_robin_spectrum(p, 0.0, r0, 300)
    red_gap = max(abs(bond_price_robin(z, 0.0, T, neumann) / bond_price_semi(z, 0.0, T, jgb["spectrum"], jgb["drift"]) - 1)
                  for T in ORACLE_MATURITIES)
    nu = -0.002
    robin = build_robin_spectrum(p, nu, r0, 300)
    pde_gap = max(abs(bond_price_robin(z, 0.0, T, robin) / pde_price_robin(z, T, p.sigma, nu, r0) - 1)
                  for T in ORACLE_MATURITIES)
    ok = red_gap <= 1e-8 and pde_gap <= 1e-4
    report(6, ok, f"nu=0 vs half line {red_gap:.1e} (tol 1e-8); nu=-0.002 vs PDE {pde_gap:.1e} (tol 1e-4)")
    assert ok


def test_criterion_7_special_functions(report):
    checks = {}
    y = np.linspace(-50.0, 10.0, 601)
    a, ap, b, bp = ak.airy_arrays(y)
    checks["wronskian"] = float(np.max(np.abs(a * bp - ap * b - 1 / math.pi))) <= 1e-10 * np.max(np.abs(b * ap) + 1)
    xi, zeta = ak.ai_prime_zeros(300), ak.ai_zeros(300)
    checks["zero residuals"] = (np.max(np.abs(ak.ai_prime(xi)) / np.abs(xi) ** 0.25) <= 1e-12
                               and np.max(np.abs(ak.ai(zeta)) * np.abs(zeta) ** 0.25) <= 1e-12)
    checks["int Ai = 1/3"] = abs(ak.ai_integral_from(0.0) - 1 / 3) <= 1e-10
    lap = [abs(ak.laplace_ai(g) - integrate.quad(lambda w: math.exp(g * w) * ak.ai(w), 0.0, 60.0,
                                                 epsabs=1e-13, epsrel=1e-13, limit=200)[0])
           for g in (-3.0, -1.0, 0.5, 1.0, 2.5)]
    checks["laplace"] = max(lap) <= 1e-9
    u = 15.0
    phase = 2.0 / 3.0 * u**1.5 + math.pi / 4
    ai_lead = math.sin(phase) / (math.sqrt(math.pi) * u**0.25)
    gi_lead = u**0.25 * math.sin(phase) / math.sqrt(math.pi)
    checks["asymptotics"] = (abs(ak.ai(-u) / ai_lead - 1) <= 0.01
                             and abs(ak.scorer_gi_prime(-u) / gi_lead - 1) <= 0.01)
    n = np.arange(1, 100_001)
    terms = (-1.0) ** (n + 1) * np.sqrt(2.0 / (3.0 * n))
    lib = sum_series(terms, np.abs(np.append(terms[1:], 0.0)), 1e-300).value
    checks["sum u_n"] = abs(lib - 0.494) <= 1e-2 and abs(averaged_sum(list(terms)) - 0.494) <= 1e-2
    ok = all(checks.values())
    report(7, ok, ", ".join(f"{k}: {'ok' if v else 'FAIL'}" for k, v in checks.items())
                  + f"; sum u_n = {lib:.6f}")
    assert ok


def test_criterion_8_structure(report, jgb):
    checks = {}
    p = jgb["params"]
    box = build_interval_spectrum(p, 40.0 / p.alpha)
    semi = build_semi_spectrum(p, 10)
    price_gap = max(abs(bond_price_interval(jgb["z"], 0.0, T, box, jgb["drift"])
                        / bond_price_semi(jgb["z"], 0.0, T, jgb["spectrum"], jgb["drift"]) - 1)
                    for T in ORACLE_MATURITIES)
    checks["box -> half line"] = float(np.max(np.abs(box.e[:10] - semi.e))) <= 1e-6 and price_gap <= 1e-6

    small = build_interval_spectrum(p, 5.0 / p.alpha)
    xs = np.linspace(0.0, small.L, 4001)
    k = min(10, small.n_levels)
    psi = small.phi(xs, np.arange(k)) * small.norm[:k, None]
    gram = integrate.simpson(psi[:, None, :] * psi[None, :, :], x=xs, axis=-1)
    checks["orthonormality"] = float(np.max(np.abs(gram - np.eye(k)))) <= 1e-8

    tau = 0.5
    v = semi_terms(jgb["r0"], 0.0, tau, jgb["spectrum"], jgb["drift"])
    n = np.arange(1, v.size + 1)
    sel = n >= 50
    slope = -np.polyfit(n[sel] ** (2 / 3), np.log(np.abs(v[sel])) + 0.5 * np.log(n[sel]), 1)[0]
    predicted = jgb["beta"] * tau * (1.5 * math.pi) ** (2 / 3)
    checks["tail slope"] = abs(slope / predicted - 1) <= 0.05

    tab, curve = _jgb_curve()
    fitted = model_yields(JGB_PARAMS, tab.maturities)
    res = CalibrationResult(*JGB_PARAMS, sigma=p.sigma, rmse=rmse(fitted, curve.points), model_yields=fitted,
                            residual_yields=[], converged=True, n_restarts_used=0)
    drift = reconstruct_drift(residual_yield(curve, res), 0.0, jgb["r0"])
    back = yield_curve(jgb["z"], 0.0, tab.maturities, ModelBundle(jgb["spectrum"], drift))
    round_trip = float(np.max(np.abs([q.yield_value - y for q, y in zip(back, curve.yields)])))
    checks["round trip"] = round_trip <= 1e-10

    ok = all(checks.values())
    report(8, ok, ", ".join(f"{k}: {'ok' if v else 'FAIL'}" for k, v in checks.items())
                  + f"; slope ratio {slope / predicted:.4f}, reprice gap {round_trip:.1e}")
    assert ok
