"""Zero-coupon bond prices from the eigenfunction series.

All three geometries share one summation routine: terms are accumulated
until an alternating-tail estimate falls below ``tail_tolerance`` times the
partial sum, or until the level cap is hit.  When the cap is hit the last
two partial sums are averaged, which removes the leading error of an
alternating tail, and the achieved tail estimate is reported.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import airy_kernel as ak
from .drift import DriftCurve
from .errors import DomainError, HoLeeError, NumericalError, ValidationError
from .spectral import (
    IntervalSpectrum,
    RobinSpectrum,
    SemiSpectrum,
    build_semi_spectrum,
)

SEMI = "semi"
INTERVAL = "interval"
ROBIN = "robin"
MODELS = (SEMI, INTERVAL, ROBIN)

# decay constant of the half-line series: gamma(t,T) = beta (T-t) (3 pi/2)^{2/3}
SERIES_DECAY = (1.5 * math.pi) ** (2.0 / 3.0)


@dataclass(frozen=True)
class PricingConfig:
    n_levels: int = 300
    tail_tolerance: float = 1e-12
    model: str = SEMI
    max_levels: int = 2000
    short_maturity: float = 0.1

    def __post_init__(self):
        if int(self.n_levels) < 1:
            raise ValidationError("n_levels must be >= 1")
        if not (0.0 < self.tail_tolerance <= 1e-6):
            raise ValidationError("tail_tolerance must lie in (0, 1e-6]")
        if self.model not in MODELS:
            raise ValidationError(f"model must be one of {MODELS}")
        if self.max_levels < self.n_levels:
            raise ValidationError("max_levels must be >= n_levels")


@dataclass(frozen=True)
class YieldPoint:
    """Continuously compounded yield in decimal per year (0.02 = 2%)."""

    maturity: float
    yield_value: float
    error: Optional[str] = None

    def __post_init__(self):
        if not self.maturity > 0:
            raise ValidationError(f"maturity must be positive, got {self.maturity!r}")


@dataclass(frozen=True)
class SeriesPrice:
    """A truncated series value with its truncation diagnostics."""

    value: float
    n_terms: int
    tail_bound: float
    converged: bool
    averaged: bool


def leibniz_envelope(n, tau, beta):
    """Asymptotic size ``|u_n| exp(-gamma(t,T) n^{2/3})`` of the n-th half-line term."""
    n = np.asarray(n, dtype=float)
    return np.sqrt(2.0 / (3.0 * n)) * np.exp(-beta * tau * SERIES_DECAY * n ** (2.0 / 3.0))


def sum_series(terms, bounds, tol):
    """Truncate ``terms`` at the first index whose tail ``bounds`` is below ``tol|S|``.

    ``bounds[k]`` estimates the magnitude of everything after term ``k``.
    """
    terms = np.asarray(terms, dtype=float)
    partial = np.cumsum(terms)
    ok = np.asarray(bounds) < tol * np.abs(partial)
    hits = np.flatnonzero(ok)
    if hits.size:
        k = int(hits[0])
        return SeriesPrice(float(partial[k]), k + 1, float(bounds[k]), True, False)
    n = len(terms)
    if n >= 2:
        value = 0.5 * (partial[-1] + partial[-2])
    else:
        value = partial[-1]
    return SeriesPrice(float(value), n, float(bounds[-1]), False, n >= 2)


def _tau(t, T):
    t = float(t)
    T = float(T)
    if not (math.isfinite(t) and math.isfinite(T)):
        raise ValidationError("t and T must be finite")
    if T < t:
        raise ValidationError(f"maturity {T} precedes valuation time {t}")
    return T - t


def _level_count(cfg, tau, n_available):
    n = min(cfg.n_levels, n_available)
    if 0.0 < tau < cfg.short_maturity:
        n = cfg.max_levels
    return n


# ---------------------------------------------------------------------------
# half line


def semi_series_many(z, t, maturities, spectrum: SemiSpectrum, drift: DriftCurve, cfg=PricingConfig()):
    """Half-line prices at several maturity dates ``T``; Ai is evaluated once."""
    Ts = np.atleast_1d(np.asarray(maturities, dtype=float))
    taus = [_tau(t, T) for T in Ts]
    chi_t = float(drift.chi(t))
    beta = spectrum.params.beta
    arg0 = (z - chi_t) / beta  # alpha * x
    if not arg0 >= 0:
        raise DomainError(f"z={z} lies below the barrier chi(t)={chi_t}")
    n_max = max(_level_count(cfg, tau, spectrum.n_levels) for tau in taus)
    if n_max > spectrum.n_levels:
        spectrum = build_semi_spectrum(spectrum.params, n_max)
    e_all = spectrum.e[:n_max]
    weights = spectrum.bond_coef[:n_max] * ak.ai(arg0 - e_all)
    e_after = np.append(e_all[1:], e_all[-1] + math.pi / math.sqrt(e_all[-1]))
    u_after = np.sqrt(2.0 / (3.0 * np.arange(2, n_max + 2, dtype=float)))
    damp = np.exp(-np.asarray(drift.eta(t, Ts), dtype=float))
    out = []
    for tau, d in zip(taus, damp):
        n = _level_count(cfg, tau, spectrum.n_levels)
        terms = weights[:n] * np.exp(-(chi_t + beta * e_all[:n]) * tau)
        # tail after term k: envelope |u_{k+1}| with the exact next level in the exponent
        bounds = u_after[:n] * np.exp(-(chi_t + beta * e_after[:n]) * tau)
        s = sum_series(terms, bounds, cfg.tail_tolerance)
        out.append(SeriesPrice(s.value * d, s.n_terms, s.tail_bound * d, s.converged, s.averaged))
    return out


def semi_series(z, t, T, spectrum: SemiSpectrum, drift: DriftCurve, cfg=PricingConfig()):
    """Half-line price with truncation diagnostics."""
    return semi_series_many(z, t, [T], spectrum, drift, cfg)[0]


def bond_price_semi(z, t, T, spectrum, drift, cfg=PricingConfig()):
    return semi_series(z, t, T, spectrum, drift, cfg).value


def semi_terms(z, t, T, spectrum, drift, n=None):
    """Raw series terms ``v_n`` (without ``exp(-eta)``), for diagnostics."""
    tau = _tau(t, T)
    chi_t = float(drift.chi(t))
    beta = spectrum.params.beta
    n = spectrum.n_levels if n is None else n
    e = spectrum.e[:n]
    return spectrum.bond_coef[:n] * ak.ai((z - chi_t) / beta - e) * np.exp(-(chi_t + beta * e) * tau)


# ---------------------------------------------------------------------------
# interval


def interval_series(z, t, T, spectrum: IntervalSpectrum, drift: DriftCurve, cfg=PricingConfig()):
    tau = _tau(t, T)
    chi_t = float(drift.chi(t))
    sigma = spectrum.params.sigma
    x = (z - chi_t) / sigma
    if x < 0 or x > spectrum.L * (1 + 1e-12):
        raise DomainError(f"x={x} outside [0, L={spectrum.L}]")
    x = min(x, spectrum.L)
    n = spectrum.n_levels if cfg.n_levels >= spectrum.n_levels else cfg.n_levels
    if 0.0 < tau < cfg.short_maturity:
        n = spectrum.n_levels
    chi_n = chi_t + spectrum.energies[:n]
    phi = spectrum.phi(np.array([x]), np.arange(n))[:, 0]
    terms = spectrum.b[:n] * phi * np.exp(-chi_n * tau)
    mag = np.abs(terms)
    bounds = np.append(mag[1:], 0.0) + np.append(mag[2:], [0.0, 0.0])
    bounds[-1] = mag[-1]
    s = sum_series(terms, bounds, cfg.tail_tolerance)
    damp = math.exp(-float(drift.eta(t, T)))
    return SeriesPrice(s.value * damp, s.n_terms, s.tail_bound * damp, s.converged, s.averaged)


def bond_price_interval(z, t, T, spectrum, drift, cfg=PricingConfig()):
    return interval_series(z, t, T, spectrum, drift, cfg).value


# ---------------------------------------------------------------------------
# Robin (barrier on the short rate, constant drift)


def robin_series(z, t, T, spectrum: RobinSpectrum, cfg=PricingConfig()):
    """Price with the barrier on the short rate itself (constant drift).

    For ``gamma_r > 0`` the expanded function ``exp(gamma_r y)`` is not square
    integrable and the coefficients grow like ``exp(gamma_r e_n)``; the series
    then converges only for ``beta (T - t) > gamma_r``, i.e. ``T - t > nu / sigma^2``.
    """
    tau = _tau(t, T)
    if z < spectrum.r_star:
        raise DomainError(f"z={z} below the reflecting barrier r*={spectrum.r_star}")
    beta = spectrum.params.beta
    g = spectrum.gamma_r
    if g > 0 and beta * tau <= g:
        raise NumericalError(
            f"eigen-series diverges for T - t <= nu/sigma^2 = {g / beta:.6g} (positive drift)"
        )
    y = z / beta
    n = min(cfg.n_levels, spectrum.n_levels)
    e = spectrum.e[:n]
    lam = spectrum.lambdas[:n]
    terms = spectrum.d[:n] * ak.ai(y - e) * np.exp(-lam * tau - g * y)
    e_next = np.append(e[1:], e[-1] + math.pi / math.sqrt(max(e[-1] - spectrum.y_star, 1.0)))
    lam_next = beta * (g * g + e_next)
    # d_n ~ exp(gamma e_n) for gamma > 0 and ~ exp(gamma y*) for gamma < 0
    grow = g * e_next + g**3 / 3.0 if g > 0 else np.full(n, g * spectrum.y_star)
    u_next = np.sqrt(2.0 / (3.0 * np.arange(2, n + 2, dtype=float)))
    bounds = u_next * np.exp(grow - g * y - lam_next * tau)
    return sum_series(terms, bounds, cfg.tail_tolerance)


def bond_price_robin(z, t, T, spectrum, cfg=PricingConfig()):
    return robin_series(z, t, T, spectrum, cfg).value


# ---------------------------------------------------------------------------
# model bundle and yields


@dataclass(frozen=True)
class ModelBundle:
    """A spectrum plus drift and truncation policy, priced through one interface."""

    spectrum: object
    drift: Optional[DriftCurve] = None
    cfg: PricingConfig = PricingConfig()

    def series(self, z, t, T):
        sp = self.spectrum
        if isinstance(sp, SemiSpectrum):
            return semi_series(z, t, T, sp, self.drift, self.cfg)
        if isinstance(sp, IntervalSpectrum):
            return interval_series(z, t, T, sp, self.drift, self.cfg)
        if isinstance(sp, RobinSpectrum):
            return robin_series(z, t, T, sp, self.cfg)
        raise ValidationError(f"unsupported spectrum type {type(sp).__name__}")

    def price(self, z, t, T):
        return self.series(z, t, T).value

    def series_many(self, z, t, maturities):
        if isinstance(self.spectrum, SemiSpectrum):
            return semi_series_many(z, t, maturities, self.spectrum, self.drift, self.cfg)
        return [self.series(z, t, T) for T in maturities]


def bond_yield(price, tau):
    if not price > 0:
        raise HoLeeError(f"non-positive bond price {price!r}")
    return -math.log(price) / tau


def yield_curve(z, t, maturities, model: ModelBundle):
    """Yields ``-ln P / (T - t)`` at each maturity (in years after ``t``).

    A pricing failure at one maturity is recorded on that point as ``error``
    with a NaN yield; the remaining points are still computed.
    """
    mats = np.asarray(maturities, dtype=float)
    if np.any(mats <= 0):
        raise ValidationError("maturities must be positive")
    if np.any(np.diff(mats) < 0):
        raise ValidationError("maturities must be sorted")
    try:
        prices = [p.value for p in model.series_many(z, t, t + mats)]
    except HoLeeError:
        prices = None
    out = []
    for k, m in enumerate(mats):
        try:
            p = model.price(z, t, t + m) if prices is None else prices[k]
            out.append(YieldPoint(float(m), bond_yield(p, m)))
        except HoLeeError as exc:
            out.append(YieldPoint(float(m), float("nan"), str(exc)))
    return out


def asymptotic_yield(spectrum, drift: DriftCurve, t):
    """Long-maturity limit ``chi_*(t) + chi(t) + E_1``."""
    if isinstance(spectrum, RobinSpectrum):
        return float(spectrum.lambdas[0])
    e1 = float(spectrum.energies[0])
    return drift.chi_star(t) + float(drift.chi(t)) + e1
