"""Fitting (z, beta, r0) to an observed zero curve under zero drift.

The fit is a multi-start Nelder-Mead search on the unweighted RMSE of
decimal yields.  Whatever the fit leaves unexplained is attributed to the
drift: the residual yield R_e - R_m times the maturity is ``eta(t, T)``,
and a clamped cubic spline through those values gives back ``chi(s)``.
"""
from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline, PPoly
from scipy.optimize import minimize

from .drift import DriftCurve
from .errors import CalibrationError, HoLeeError, ValidationError
from .pricing import ModelBundle, PricingConfig, YieldPoint, yield_curve
from .spectral import ModelParams, build_semi_spectrum

XI1 = 1.0187929716474710  # |first zero of Ai'|
PROJECTION_SLACK = 1e-4


@dataclass(frozen=True)
class EmpiricalCurve:
    """Observed zero yields (decimal) at maturities in years from ``t = 0``."""

    maturities: np.ndarray
    yields: np.ndarray
    valuation_date: Optional[dt.date] = None
    label: str = ""

    def __post_init__(self):
        m = np.asarray(self.maturities, dtype=float)
        y = np.asarray(self.yields, dtype=float)
        if m.ndim != 1 or m.shape != y.shape or m.size == 0:
            raise ValidationError("maturities and yields must be equal-length 1-D sequences")
        if np.any(m <= 0) or np.any(np.diff(m) <= 0):
            raise ValidationError("maturities must be positive and strictly increasing")
        if not np.all(np.isfinite(y)):
            raise ValidationError("yields must be finite")
        object.__setattr__(self, "maturities", m)
        object.__setattr__(self, "yields", y)

    @classmethod
    def from_points(cls, points: Sequence[YieldPoint], **kw):
        return cls(np.array([p.maturity for p in points]), np.array([p.yield_value for p in points]), **kw)

    @property
    def points(self):
        return [YieldPoint(float(m), float(y)) for m, y in zip(self.maturities, self.yields)]

    def subset(self, min_maturity):
        keep = self.maturities >= min_maturity
        return EmpiricalCurve(self.maturities[keep], self.yields[keep], self.valuation_date, self.label)


@dataclass(frozen=True)
class SearchConfig:
    """Start grid, admissibility floor and tolerances for :func:`calibrate`.

    The nine starts are the box centre plus the eight corners of the inner
    half-box (quarter points on each axis).
    """

    z_range: tuple = (-0.01, 0.02)
    beta_range: tuple = (0.02, 0.4)
    r0_range: tuple = (-0.3, 0.0)
    r_min: float = 0.0
    penalty: float = 1e6
    tolerance: float = 1e-10
    max_iter: int = 4000
    min_maturity: float = 0.0
    max_restarts: int = 3

    def starts(self):
        lo = np.array([self.z_range[0], self.beta_range[0], self.r0_range[0]])
        hi = np.array([self.z_range[1], self.beta_range[1], self.r0_range[1]])
        mid = 0.5 * (lo + hi)
        quarter = 0.25 * (hi - lo)
        pts = [mid]
        for sz in (-1, 1):
            for sb in (-1, 1):
                for sr in (-1, 1):
                    pts.append(mid + quarter * np.array([sz, sb, sr]))
        return pts


@dataclass(frozen=True)
class CalibrationResult:
    z: float
    beta: float
    r0: float
    sigma: float
    rmse: float
    model_yields: list
    residual_yields: list
    converged: bool
    n_restarts_used: int
    objective: float = float("nan")
    n_evaluations: int = 0
    start_objectives: tuple = field(default=(), repr=False)

    @property
    def params(self):
        return (self.z, self.beta, self.r0)

    @property
    def ground_level(self):
        """Lowest short-rate mode ``r0 + beta |xi_1|``."""
        return self.r0 + self.beta * XI1


def rmse(a, b):
    """Root-mean-square difference of two yield lists on identical maturities."""
    ma = np.array([p.maturity for p in a])
    mb = np.array([p.maturity for p in b])
    if ma.shape != mb.shape or not np.allclose(ma, mb, rtol=1e-12, atol=1e-12):
        raise ValidationError("rmse: maturity mismatch")
    d = np.array([p.yield_value for p in a]) - np.array([p.yield_value for p in b])
    return float(math.sqrt(np.mean(d * d)))


def model_yields(params, maturities, cfg=PricingConfig()):
    """Zero-drift half-line yields for ``params = (z, beta, r0)``."""
    z, beta, r0 = (float(v) for v in params)
    spectrum = build_semi_spectrum(ModelParams.from_beta(beta), cfg.n_levels)
    model = ModelBundle(spectrum, DriftCurve.constant(r0), cfg)
    return yield_curve(z, 0.0, maturities, model)


def _violation(params, r_min):
    z, beta, r0 = params
    return max(0.0, r_min - (r0 + beta * XI1)) + max(0.0, r0 - z)


def _objective(params, curve, cfg, search):
    z, beta, r0 = params
    if not beta > 0:
        return 1.0 + abs(beta)
    viol = _violation(params, search.r_min)
    if r0 > z:
        # start point below the barrier: pricing undefined, penalty only
        return 1.0 + search.penalty * viol * viol
    try:
        ys = model_yields(params, curve.maturities, cfg)
    except HoLeeError:
        return 1.0
    vals = np.array([p.yield_value for p in ys])
    if not np.all(np.isfinite(vals)):
        return 1.0
    d = vals - curve.yields
    return math.sqrt(np.mean(d * d)) + search.penalty * viol * viol


def calibrate(curve: EmpiricalCurve, cfg=PricingConfig(), search=SearchConfig()):
    """Deterministic multi-start Nelder-Mead fit of (z, beta, r0)."""
    if search.min_maturity > 0:
        curve = curve.subset(search.min_maturity)
    if curve.maturities.size < 4:
        raise ValidationError("calibration needs at least 4 maturities")
    opts = dict(xatol=search.tolerance, fatol=search.tolerance, maxiter=search.max_iter,
                maxfev=2 * search.max_iter)
    args = (curve, cfg, search)
    best = None
    start_obj = []
    n_eval = 0
    for x0 in search.starts():
        start_obj.append(_objective(x0, *args))
        res = minimize(_objective, x0, args=args, method="Nelder-Mead", options=opts)
        n_eval += res.nfev
        key = (res.fun, tuple(res.x))
        if best is None or key < (best.fun, tuple(best.x)):
            best = res
    restarts = 0
    while restarts < search.max_restarts:
        res = minimize(_objective, best.x, args=args, method="Nelder-Mead", options=opts)
        n_eval += res.nfev
        restarts += 1
        improved = res.fun < best.fun - search.tolerance
        if res.fun <= best.fun:
            best = res
        if not improved:
            break
    z, beta, r0 = (float(v) for v in best.x)
    if _violation(best.x, search.r_min) > PROJECTION_SLACK or not beta > 0:
        raise CalibrationError("no admissible optimum found", best=best)
    # the quadratic penalty leaves a violation of order grad / penalty; project it away
    r0 = max(r0, search.r_min - beta * XI1)
    z = max(z, r0)
    fitted = model_yields((z, beta, r0), curve.maturities, cfg)
    err = rmse(fitted, curve.points)
    resid = [YieldPoint(p.maturity, y - p.yield_value) for p, y in zip(fitted, curve.yields)]
    return CalibrationResult(
        z=z, beta=beta, r0=r0, sigma=math.sqrt(2.0 * beta**3), rmse=err,
        model_yields=fitted, residual_yields=resid, converged=bool(best.success),
        n_restarts_used=restarts, objective=float(best.fun), n_evaluations=n_eval,
        start_objectives=tuple(start_obj),
    )


def residual_yield(curve: EmpiricalCurve, result: CalibrationResult):
    """``R_r = R_e - R_m`` per maturity."""
    m_model = np.array([p.maturity for p in result.model_yields])
    if m_model.shape != curve.maturities.shape or not np.allclose(m_model, curve.maturities):
        raise ValidationError("result was calibrated on different maturities")
    return [YieldPoint(float(m), float(y - p.yield_value))
            for m, y, p in zip(curve.maturities, curve.yields, result.model_yields)]


def residual_spline(residuals, t=0.0):
    """Cubic spline of ``eta(t, s) = R_r (s - t)`` with ``eta = eta' = 0`` at ``s = t``."""
    if len(residuals) < 3:
        raise ValidationError("drift reconstruction needs at least 3 maturities")
    tau = np.array([p.maturity for p in residuals], dtype=float)
    r = np.array([p.yield_value for p in residuals], dtype=float)
    s = np.concatenate([[t], t + tau])
    eta = np.concatenate([[0.0], r * tau])
    return CubicSpline(s, eta, bc_type=((1, 0.0), "not-a-knot"))


def reconstruct_drift(residuals, t=0.0, chi_t=0.0):
    """Drift curve ``chi(s) = d/ds eta(t, s) + chi(t)`` implied by residual yields.

    The eta spline is clamped to zero slope at ``s = t`` since
    ``eta(t, s) = int_t^s [chi - chi(t)]`` has zero derivative there.
    """
    spline = residual_spline(residuals, t)
    d = spline.derivative()
    c = d.c.copy()
    c[-1] += chi_t
    return DriftCurve(PPoly(c, d.x))


@dataclass(frozen=True)
class CubicFit:
    coefficients: np.ndarray  # ascending powers of T
    model_yields: list
    rmse: float

    def __call__(self, maturities):
        return np.polynomial.polynomial.polyval(np.asarray(maturities, dtype=float), self.coefficients)


def cubic_baseline(curve: EmpiricalCurve):
    """Ordinary least squares of yield on ``{1, T, T^2, T^3}``."""
    if curve.maturities.size < 5:
        raise ValidationError("cubic baseline needs at least 5 points")
    X = np.vander(curve.maturities, 4, increasing=True)
    coef, _, rank, _ = np.linalg.lstsq(X, curve.yields, rcond=None)
    if rank < 4:
        raise ValidationError("cubic baseline design matrix is rank deficient")
    fitted = [YieldPoint(float(m), float(y)) for m, y in zip(curve.maturities, X @ coef)]
    return CubicFit(coef, fitted, rmse(fitted, curve.points))
