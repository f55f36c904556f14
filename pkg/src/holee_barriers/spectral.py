"""Eigensystems of the linear-potential Schrodinger operator with reflecting walls.

Three geometries are covered:

* half line ``x >= 0`` with a Neumann wall at 0 (:class:`SemiSpectrum`),
* interval ``0 <= x <= L`` with Neumann walls at both ends
  (:class:`IntervalSpectrum`),
* constant drift with the reflecting barrier on the short rate itself,
  which turns into a Robin condition (:class:`RobinSpectrum`).

Levels are dimensionless: the physical energy of level ``n`` is
``beta * e_n``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import airy_kernel as ak
from .errors import BracketError, NumericalError, ValidationError

DEFAULT_LEVELS = 300


@dataclass(frozen=True)
class ModelParams:
    """Volatility and its derived Airy scales.

    ``alpha = (2 sigma)^{1/3}`` converts Brownian units into Airy arguments
    and ``beta = sigma / alpha = (sigma^2/2)^{1/3}`` converts dimensionless
    levels into rates.
    """

    sigma: float
    alpha: float = field(init=False)
    beta: float = field(init=False)

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValidationError(f"sigma must be positive and finite, got {self.sigma!r}")
        alpha = (2.0 * self.sigma) ** (1.0 / 3.0)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", self.sigma / alpha)

    @classmethod
    def from_beta(cls, beta):
        if not beta > 0:
            raise ValidationError(f"beta must be positive, got {beta!r}")
        return cls(math.sqrt(2.0 * beta**3))


# ---------------------------------------------------------------------------
# half line


@functools.lru_cache(maxsize=8)
def _semi_level_table(n_levels):
    xi = ak.ai_prime_zeros(n_levels)
    ai_xi = ak.ai(xi)
    tail = ak.ai_integrals_from(xi)  # int_{xi_n}^inf Ai
    gi_prime = tail / (math.pi * ai_xi)
    # pi Gi'(xi) / (|xi| Ai(xi)) written through the tail integral
    bond_coef = tail / (np.abs(xi) * ai_xi**2)
    for arr in (ai_xi, tail, gi_prime, bond_coef):
        arr.setflags(write=False)
    return xi, ai_xi, tail, gi_prime, bond_coef


@dataclass(frozen=True)
class SemiSpectrum:
    """Levels of the half-line model.

    ``bond_coef[n]`` is the zero-coupon coefficient multiplying
    ``Ai((z - chi_n)/beta) exp(-chi_n (T - t))``; it equals ``c_n a_n``.
    """

    params: ModelParams
    xi: np.ndarray
    ai_xi: np.ndarray
    gi_prime_xi: np.ndarray
    tail_integral: np.ndarray
    bond_coef: np.ndarray

    @property
    def n_levels(self):
        return len(self.xi)

    @property
    def e(self):
        return -self.xi

    @property
    def energies(self):
        return self.params.beta * self.e

    @property
    def norm_inv_sq(self):
        """``a_n^{-2} = -xi_n Ai(xi_n)^2 / alpha``."""
        return -self.xi * self.ai_xi**2 / self.params.alpha

    @property
    def norm(self):
        return 1.0 / np.sqrt(self.norm_inv_sq)

    @property
    def claim_coef(self):
        """``c_n`` for the unit claim: ``(1/alpha) a_n int_{xi_n}^inf Ai``."""
        return self.norm * self.tail_integral / self.params.alpha

    def chi_levels(self, chi_t):
        return chi_t + self.energies

    def eigenfunction(self, n, x):
        """Normalised ``psi_n(x) = a_n Ai(alpha x - e_n)`` (``n`` is 1-based)."""
        k = n - 1
        return self.norm[k] * ak.ai(self.params.alpha * np.asarray(x, float) - self.e[k])

    def claim_coefficients(self, payoff, x_max=None):
        """``c_n = int_0^inf psi_n(x) Y(x) dx`` for a general symmetric claim.

        Library hook; bond pricing uses the closed-form coefficients.
        """
        from scipy import integrate

        if x_max is None:
            x_max = (self.e[-1] + 40.0) / self.params.alpha
        out = np.empty(self.n_levels)
        for k in range(self.n_levels):
            out[k] = integrate.quad(
                lambda x: self.eigenfunction(k + 1, x) * payoff(x), 0.0, x_max, limit=500
            )[0]
        return out


def build_semi_spectrum(sigma, n_levels=DEFAULT_LEVELS):
    """Half-line spectrum: ``e_n = -xi_n`` with closed-form coefficients."""
    params = sigma if isinstance(sigma, ModelParams) else ModelParams(float(sigma))
    n_levels = int(n_levels)
    if n_levels < 1:
        raise ValidationError("n_levels must be >= 1")
    xi, ai_xi, tail, gi, coef = _semi_level_table(n_levels)
    return SemiSpectrum(params, xi, ai_xi, gi, tail, coef)


# ---------------------------------------------------------------------------
# interval


def _wkb_phase(e, aL):
    e = np.asarray(e, dtype=float)
    return (2.0 / 3.0) * (np.maximum(e, 0.0) ** 1.5 - np.maximum(e - aL, 0.0) ** 1.5)


def _neumann_mismatch(e, aL):
    """Cross-multiplied ``Q(L,e) - Q(0,e)`` without poles, scaled by ``exp(-zeta_L)``.

    Returns the mismatch divided by the norms of the two derivative vectors,
    i.e. the sine of the angle between ``(Ai', Bi')`` at both walls.
    """
    e = np.asarray(e, dtype=float)
    y0 = -e
    yL = aL - e
    _, a0, _, b0 = ak.airy_arrays(y0)
    _, aLp, _, bLp = ak.airy_scaled(yL)
    zeta = ak.airy_phase_scale(yL)
    aLp = aLp * np.exp(-2.0 * zeta)
    num = a0 * bLp - aLp * b0
    return num / (np.hypot(a0, b0) * np.hypot(aLp, bLp))


@dataclass(frozen=True)
class IntervalSpectrum:
    """Levels of the two-wall model on ``[0, L]``.

    ``q`` holds the Bi admixture used to evaluate ``phi_n``; it is
    ``Q(L, e_n)`` when ``alpha L > e_n`` (the growing-Bi side) and
    ``Q(0, e_n)`` otherwise.  For ``use_right`` levels the ratio is stored
    scaled by ``exp(2 zeta_L)``.
    """

    params: ModelParams
    L: float
    e: np.ndarray
    q: np.ndarray
    use_right: np.ndarray
    phi0: np.ndarray
    phiL: np.ndarray
    norm_inv_sq: np.ndarray
    b: np.ndarray
    residual: np.ndarray

    @property
    def n_levels(self):
        return len(self.e)

    @property
    def aL(self):
        return self.params.alpha * self.L

    @property
    def energies(self):
        return self.params.beta * self.e

    @property
    def norm(self):
        return 1.0 / np.sqrt(self.norm_inv_sq)

    @property
    def q0(self):
        """``Q(0, e_n)`` recomputed directly (may be inaccurate near Ai' zeros)."""
        _, a0, _, b0 = ak.airy_arrays(-self.e)
        return a0 / b0

    def chi_levels(self, chi_t):
        return chi_t + self.energies

    def phi(self, x, levels=None):
        """``phi_n(x)`` for all (or selected, 0-based) levels; shape ``(n, len(x))``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx = np.arange(self.n_levels) if levels is None else np.atleast_1d(levels)
        return _phi(self.aL, self.params.alpha, self.e[idx], self.q[idx], self.use_right[idx], x)

    def eigenfunction(self, n, x):
        k = n - 1
        return self.norm[k] * self.phi(x, [k])[0]

    def phi_derivative(self, x, levels=None):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx = np.arange(self.n_levels) if levels is None else np.atleast_1d(levels)
        e, q, right = self.e[idx], self.q[idx], self.use_right[idx]
        y = self.params.alpha * x[None, :] - e[:, None]
        eai, eaip, ebi, ebip = ak.airy_scaled(y)
        zy = ak.airy_phase_scale(y)
        zL = ak.airy_phase_scale(self.aL - e)[:, None]
        bip_term = np.where(
            right[:, None], q[:, None] * ebip * np.exp(zy - 2.0 * zL), q[:, None] * ebip * np.exp(zy)
        )
        return self.params.alpha * (eaip * np.exp(-zy) - bip_term)


def _phi(aL, alpha, e, q, right, x):
    y = alpha * x[None, :] - e[:, None]
    eai, _, ebi, _ = ak.airy_scaled(y)
    zy = ak.airy_phase_scale(y)
    zL = ak.airy_phase_scale(aL - e)[:, None]
    bi_term = np.where(
        right[:, None], q[:, None] * ebi * np.exp(zy - 2.0 * zL), q[:, None] * ebi * np.exp(zy)
    )
    return eai * np.exp(-zy) - bi_term


def _scan_interval_roots(aL, n_levels=None, e_cap=None):
    """Bracket the Neumann-Neumann levels by a sign scan of the mismatch."""
    if n_levels is not None:
        # invert the WKB count with margin
        target = math.pi * (n_levels + 2.0)
        hi = (1.5 * target) ** (2.0 / 3.0)
        while _wkb_phase(hi, aL) < target:
            hi *= 1.5
        e_cap = hi
    roots = []
    lo = 0.0
    chunk = 2000
    while True:
        h_top = min(0.1, 0.5 * math.pi / math.sqrt(max(e_cap, 1e-3)))
        grid = lo + h_top * np.arange(chunk + 1)
        grid = grid[grid <= e_cap + h_top]
        f = _neumann_mismatch(grid, aL)
        sign_change = np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)
        for i in sign_change:
            a, b = grid[i], grid[i + 1]
            r = optimize.brentq(lambda e: float(_neumann_mismatch(e, aL)), a, b, xtol=1e-15, rtol=1e-15, maxiter=200)
            roots.append(r)
        exact = np.flatnonzero(f == 0.0)
        roots.extend(grid[exact].tolist())
        lo = grid[-1]
        if lo >= e_cap:
            break
        if n_levels is not None and len(roots) >= n_levels:
            break
    roots = np.array(sorted(set(roots)))
    if e_cap is not None and n_levels is None:
        roots = roots[roots <= e_cap]
    if n_levels is not None:
        if len(roots) < n_levels:
            raise BracketError(f"found only {len(roots)} of {n_levels} interval levels")
        roots = roots[:n_levels]
    return roots


def _check_level_count(e, aL):
    if len(e) == 0:
        raise BracketError("no interval levels found")
    if np.any(e <= 0):
        raise NumericalError("non-positive interval level found")
    if np.any(np.diff(e) <= 0):
        raise NumericalError("interval levels not strictly increasing")
    # expected count from the WKB phase; Neumann walls add between 1/2 and 1
    expected = _wkb_phase(e[-1], aL) / math.pi + 0.75
    if abs(len(e) - expected) > 1.5:
        raise BracketError(f"level count {len(e)} inconsistent with WKB estimate {expected:.2f}")
    mid = 0.5 * (e[1:] + e[:-1])
    dphase = np.sqrt(mid) - np.sqrt(np.maximum(mid - aL, 0.0))
    predicted = math.pi / dphase
    if np.any(np.diff(e) > 2.0 * predicted + 0.5):
        raise BracketError("gap in interval level spacing suggests a missed root")


def build_interval_spectrum(sigma, L, n_levels=None):
    """Two-wall spectrum on ``[0, L]``.

    With ``n_levels=None`` every level with ``e_n <= |xi_300|`` is kept,
    matching the half-line resolution.
    """
    params = sigma if isinstance(sigma, ModelParams) else ModelParams(float(sigma))
    L = float(L)
    if not (L > 0 and math.isfinite(L)):
        raise ValidationError(f"L must be positive, got {L!r}")
    aL = params.alpha * L
    if aL > 100.0:
        raise ValidationError(f"alpha*L = {aL:.1f} too large; Bi overflows near the far wall")
    if n_levels is None:
        e = _scan_interval_roots(aL, e_cap=float(abs(ak.ai_prime_zeros(DEFAULT_LEVELS)[-1])))
    else:
        if int(n_levels) < 1:
            raise ValidationError("n_levels must be >= 1")
        e = _scan_interval_roots(aL, n_levels=int(n_levels))
    _check_level_count(e, aL)

    right = (aL - e) > 0.0
    _, a0, _, b0 = ak.airy_arrays(-e)
    _, eaLp, _, ebLp = ak.airy_scaled(aL - e)
    q_left = a0 / b0
    q_right_scaled = eaLp / ebLp  # Q(L,e) * exp(2 zeta_L)
    q = np.where(right, q_right_scaled, q_left)
    zeros = np.zeros(1)
    phi0 = _phi(aL, params.alpha, e, q, right, zeros)[:, 0]
    phiL = _phi(aL, params.alpha, e, q, right, np.array([L]))[:, 0]
    denom = e * phi0**2 + (aL - e) * phiL**2
    if np.any(denom <= 0):
        raise NumericalError("non-positive interval normalisation")
    gi0 = ak.scorer_gi_prime_many(-e)
    giL = ak.scorer_gi_prime_many(aL - e)
    b = math.pi * (phi0 * gi0 - phiL * giL) / denom
    residual = np.abs(_neumann_mismatch(e, aL))
    if np.any(residual > 1e-10):
        raise NumericalError(f"interval level residual {residual.max():.2e} exceeds 1e-10")
    return IntervalSpectrum(
        params=params,
        L=L,
        e=e,
        q=q,
        use_right=right,
        phi0=phi0,
        phiL=phiL,
        norm_inv_sq=denom / params.alpha,
        b=b,
        residual=residual,
    )


# ---------------------------------------------------------------------------
# Robin boundary (barrier on the short rate, constant drift)


def _robin_fn(s, gamma):
    # Ai'(s) - gamma Ai(s), scaled by exp(zeta) for s > 0 (sign preserving)
    eai, eaip, _, _ = ak.airy_scaled(s)
    return eaip - gamma * eai


def _robin_roots(gamma, n_levels):
    xi = ak.ai_prime_zeros(n_levels)
    if gamma == 0.0:
        return xi.copy()
    zeta = ak.ai_zeros(n_levels)
    roots = np.empty(n_levels)
    for k in range(n_levels):
        if gamma > 0:
            a, b = zeta[k], xi[k]
        else:
            a = xi[k]
            if k > 0:
                b = zeta[k - 1]
            else:
                b = max(1.0, gamma**2 + 2.0)
                while _robin_fn(b, gamma) * _robin_fn(a, gamma) > 0:
                    b *= 2.0
                    if b > 150.0:
                        raise BracketError(f"cannot bracket lowest Robin level for gamma={gamma}")
        fa, fb = float(_robin_fn(a, gamma)), float(_robin_fn(b, gamma))
        if fa * fb > 0:
            raise BracketError(f"Robin level {k + 1} not bracketed by Neumann/Dirichlet zeros")
        roots[k] = optimize.brentq(lambda s: float(_robin_fn(s, gamma)), a, b, xtol=1e-15, rtol=1e-15, maxiter=200)
    return roots


@dataclass(frozen=True)
class RobinSpectrum:
    """Constant-drift levels with the reflecting barrier on the short rate.

    ``gamma_r = nu / (2 sigma^4)^{1/3}`` and ``y_star = r_star / beta``; the
    decay rates are ``lambda_n = beta (gamma_r^2 + e_n)``.
    """

    params: ModelParams
    nu: float
    r_star: float
    gamma_r: float
    y_star: float
    e: np.ndarray
    d: np.ndarray
    residual: np.ndarray

    @property
    def n_levels(self):
        return len(self.e)

    @property
    def lambdas(self):
        return self.params.beta * (self.gamma_r**2 + self.e)


def build_robin_spectrum(sigma, nu, r_star, n_levels=DEFAULT_LEVELS):
    params = sigma if isinstance(sigma, ModelParams) else ModelParams(float(sigma))
    n_levels = int(n_levels)
    if n_levels < 1:
        raise ValidationError("n_levels must be >= 1")
    nu = float(nu)
    r_star = float(r_star)
    gamma = nu / (2.0 * params.sigma**4) ** (1.0 / 3.0)
    y_star = r_star / params.beta
    s = _robin_roots(gamma, n_levels)
    e = y_star - s
    ai_s = ak.ai(s)
    # int_s^inf Ai(w)^2 dw = (gamma^2 - s) Ai(s)^2 under the Robin condition
    gap = gamma**2 - s
    if np.any(np.abs(gap) < 1e-12):
        raise NumericalError(
            "degenerate Robin normalisation (removable singularity); perturb gamma slightly"
        )
    numer = ak.exp_weighted_ai_from_many(gamma, s) if gamma != 0.0 else ak.ai_integrals_from(s)
    d = np.exp(gamma * e) * numer / (gap * ai_s**2)
    eai, eaip, _, _ = ak.airy_scaled(s)
    residual = np.abs(eaip - gamma * eai) / np.hypot(eaip, eai)
    if np.any(residual > 1e-10):
        raise NumericalError(f"Robin level residual {residual.max():.2e} exceeds 1e-10")
    return RobinSpectrum(params, nu, r_star, gamma, y_star, e, d, residual)
