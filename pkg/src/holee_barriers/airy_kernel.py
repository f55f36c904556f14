"""Airy and Scorer function kernel.

Point values of Ai, Bi and their derivatives come from the AMOS-based
routines in :mod:`scipy.special`.  Everything the pricing series needs on
top of that (zeros of Ai and Ai', integrals of Ai and Bi, the Scorer
derivative Gi', exponentially weighted Airy integrals) is built here.

Oscillatory integrals over the negative axis are split into half-wave
panels ``(2/3)|w|^{3/2} = k*pi/2`` and each panel is integrated with
adaptive Gauss-Kronrod (QUADPACK via :func:`scipy.integrate.quad`).
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import AiryRangeError, BracketError, DomainError, NumericalError

#: Largest magnitude of a negative argument accepted by the kernel.
MAX_NEGATIVE_ARG = 1000.0
#: Largest positive argument accepted by :func:`airy_eval` (Ai underflows
#: well before this; Bi overflows near y = 104.8 and is rejected).
MAX_POSITIVE_ARG = 200.0

QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-13
# Panel tolerance that is considered a quadrature failure.
_QUAD_FAIL = 1e-10


@dataclass(frozen=True)
class AiryValues:
    y: float
    ai: float
    ai_prime: float
    bi: float
    bi_prime: float

    @property
    def wronskian(self):
        return self.ai * self.bi_prime - self.ai_prime * self.bi


@dataclass(frozen=True)
class AiryZeroTable:
    """First ``count`` zeros of Ai' (``xi``) and Ai (``zeta``), both decreasing."""

    xi: np.ndarray
    zeta: np.ndarray

    @property
    def count(self):
        return len(self.xi)


def _check_range(y):
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise AiryRangeError("Airy argument must be finite")
    if np.any(y < -MAX_NEGATIVE_ARG) or np.any(y > MAX_POSITIVE_ARG):
        raise AiryRangeError(
            f"Airy argument outside [{-MAX_NEGATIVE_ARG}, {MAX_POSITIVE_ARG}]"
        )
    return y


def airy_eval(y):
    """Ai, Ai', Bi, Bi' at a single real point.

    Raises :class:`AiryRangeError` when Bi or Bi' is not representable in
    double precision (``y`` above roughly 104.8).
    """
    y = float(_check_range(y))
    ai, aip, bi, bip = special.airy(y)
    if not (np.isfinite(bi) and np.isfinite(bip)):
        raise AiryRangeError(f"Bi({y}) overflows double precision")
    return AiryValues(y=y, ai=float(ai), ai_prime=float(aip), bi=float(bi), bi_prime=float(bip))


def airy_arrays(y):
    """Vectorised ``(ai, ai', bi, bi')``; raises if any Bi value overflows."""
    y = _check_range(y)
    ai, aip, bi, bip = special.airy(y)
    if not (np.all(np.isfinite(bi)) and np.all(np.isfinite(bip))):
        raise AiryRangeError("Bi overflows double precision for some arguments")
    return ai, aip, bi, bip


def ai(y):
    """Ai only; safe for large positive arguments (underflows to 0)."""
    y = _check_range(y)
    return special.airy(y)[0]


def ai_prime(y):
    y = _check_range(y)
    return special.airy(y)[1]


def airy_scaled(y):
    """Exponentially scaled Airy functions for real ``y``.

    For ``y > 0`` returns ``Ai*exp(zeta), Ai'*exp(zeta), Bi*exp(-zeta),
    Bi'*exp(-zeta)`` with ``zeta = (2/3) y^{3/2}``; unscaled for ``y <= 0``.
    """
    y = _check_range(y)
    plain = special.airy(np.minimum(y, 0.0))
    # airye's Ai branch is NaN on the negative real axis
    scaled = special.airye(np.maximum(y, 0.0))
    pos = y > 0.0
    return tuple(np.where(pos, s, p) for s, p in zip(scaled, plain))


def airy_phase_scale(y):
    """``zeta = (2/3) y^{3/2}`` for ``y > 0`` and 0 otherwise."""
    y = np.asarray(y, dtype=float)
    return np.where(y > 0.0, (2.0 / 3.0) * np.abs(y) ** 1.5, 0.0)


# ---------------------------------------------------------------------------
# zeros


def _asymptotic_zero(t, derivative):
    # Leading term plus first correction of the large-n expansion.
    t = np.asarray(t, dtype=float)
    c = -7.0 / 48.0 if derivative else 5.0 / 48.0
    return -(t ** (2.0 / 3.0)) * (1.0 + c / t**2)


def leading_xi_asymptotic(n):
    """Leading large-n behaviour ``-((3 pi/8)(4n-3))^{2/3}`` of the Ai' zeros."""
    n = np.asarray(n, dtype=float)
    return -((3.0 * np.pi / 8.0) * (4.0 * n - 3.0)) ** (2.0 / 3.0)


def _refine_zeros(f, df, lo, hi, x0, tol=1e-15, maxiter=200):
    """Vectorised safeguarded Newton; bisection when Newton leaves the bracket."""
    flo, fhi = f(lo), f(hi)
    bad = np.sign(flo) * np.sign(fhi) > 0
    if np.any(bad):
        idx = np.flatnonzero(bad)[0]
        raise BracketError(
            f"no sign change in [{lo[idx]}, {hi[idx]}] (zero index {idx + 1})"
        )
    lo, hi, x = lo.copy(), hi.copy(), x0.copy()
    # orient so that f(lo) < 0 < f(hi)
    swap = flo > 0
    lo[swap], hi[swap] = hi[swap], lo[swap].copy()
    for _ in range(maxiter):
        fx = f(x)
        neg = fx < 0
        lo = np.where(neg, x, lo)
        hi = np.where(neg, hi, x)
        d = df(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = x - fx / d
        a, b = np.minimum(lo, hi), np.maximum(lo, hi)
        outside = ~np.isfinite(xn) | (xn <= a) | (xn >= b)
        xn = np.where(outside, 0.5 * (lo + hi), xn)
        step = np.abs(xn - x)
        x = xn
        if np.all(step <= tol * np.maximum(1.0, np.abs(x))):
            break
    return x


@functools.lru_cache(maxsize=32)
def _zeros(kind, n_max):
    n = np.arange(1, n_max + 1, dtype=float)
    if kind == "ai_prime":
        guess = _asymptotic_zero(3.0 * np.pi / 8.0 * (4.0 * n - 3.0), True)
        f = lambda x: special.airy(x)[1]  # noqa: E731
        df = lambda x: x * special.airy(x)[0]  # noqa: E731
    else:
        guess = _asymptotic_zero(3.0 * np.pi / 8.0 * (4.0 * n - 1.0), False)
        f = lambda x: special.airy(x)[0]  # noqa: E731
        df = lambda x: special.airy(x)[1]  # noqa: E731
    if guess[-1] < -MAX_NEGATIVE_ARG:
        raise AiryRangeError(f"{n_max} zeros exceed the supported argument range")
    half = 0.35 * np.pi / np.sqrt(np.abs(guess))
    if kind == "ai_prime":
        # the first zero sits close to the origin; keep the bracket negative
        half[0] = 0.3
    z = _refine_zeros(f, df, guess - half, guess + half, guess)
    z.setflags(write=False)
    return z


def ai_prime_zeros(n_max):
    """First ``n_max`` zeros of Ai' (``0 > xi_1 > xi_2 > ...``)."""
    n_max = int(n_max)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    return _zeros("ai_prime", n_max)


def ai_zeros(n_max):
    """First ``n_max`` zeros of Ai (``0 > zeta_1 > zeta_2 > ...``)."""
    n_max = int(n_max)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    return _zeros("ai", n_max)


def zero_table(n_max):
    return AiryZeroTable(xi=ai_prime_zeros(n_max), zeta=ai_zeros(n_max))


# ---------------------------------------------------------------------------
# quadrature helpers


def _quad(f, a, b):
    val, err, *rest = integrate.quad(
        f, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200, full_output=1
    )
    if err > _QUAD_FAIL * max(1.0, abs(val)):
        raise NumericalError(f"quadrature on [{a}, {b}] did not converge (err={err:.2e})")
    return val


def _half_wave_points(a, b):
    """Breakpoints in [a, b] (b <= 0 part) at half-periods of the Airy phase."""
    lo = min(a, b)
    if lo >= 0.0:
        return [a, b]
    phase = (2.0 / 3.0) * abs(lo) ** 1.5
    k = np.arange(1, int(phase / (0.5 * np.pi)) + 1)
    w = -((1.5 * 0.5 * np.pi * k) ** (2.0 / 3.0))
    inner = [p for p in w if min(a, b) < p < max(a, b)]
    pts = sorted({a, b, *inner})
    return pts if a <= b else pts[::-1]


def _panel_integral(f, a, b):
    """Integral of ``f`` over [a, b] split into Airy half-wave panels."""
    if a == b:
        return 0.0
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -1.0
    pts = _half_wave_points(a, b)
    return sign * math.fsum(_quad(f, p, q) for p, q in zip(pts[:-1], pts[1:]))


def _ai_scalar(w):
    return special.airy(w)[0]


def _bi_scalar(w):
    return special.airy(w)[2]


def _decay_cutoff(y, decades=42.0):
    # point beyond y where Ai has decayed by exp(-decades)
    y0 = max(y, 0.0)
    return (y0**1.5 + 1.5 * decades) ** (2.0 / 3.0)


def airy_a_integral(y):
    """``A(y) = int_y^0 Ai(w) dw`` (negative when ``y > 0``)."""
    return _panel_integral(_ai_scalar, y, 0.0)


def airy_b_integral(y):
    """``B(y) = int_y^0 Bi(w) dw``."""
    if y > 0:
        airy_eval(y)  # range check
    return _panel_integral(_bi_scalar, y, 0.0)


def ai_integral_from(y):
    """``int_y^inf Ai(w) dw``.

    For ``y >= 0`` the integral runs to a cutoff where Ai has decayed by
    ``e^{-42}``; the remaining tail is added from the leading asymptotic
    ``Ai(Y)/sqrt(Y)``.  For ``y < 0`` it is ``1/3 + A(y)``.
    """
    y = float(_check_range(y))
    if y < 0.0:
        return 1.0 / 3.0 + airy_a_integral(y)
    if y > 105.0:
        return 0.0
    cut = _decay_cutoff(y)
    tail = float(special.airy(cut)[0]) / math.sqrt(cut)
    return _quad(_ai_scalar, y, cut) + tail


def _cumulative_from(f, points, first):
    """``int_p^inf f`` for every p, accumulating panels between sorted points."""
    pts = np.asarray(points, dtype=float)
    order = np.argsort(pts)[::-1]  # descending
    out = np.empty_like(pts)
    prev = None
    acc = 0.0
    for i in order:
        p = pts[i]
        acc = first(p) if prev is None else acc + _panel_integral(f, p, prev)
        out[i] = acc
        prev = p
    return out


def ai_integrals_from(points):
    """Vectorised :func:`ai_integral_from` by cumulative panel integration.

    Efficient for long sorted tables such as the zeros of Ai'.
    """
    return _cumulative_from(_ai_scalar, points, ai_integral_from)


def bi_integral_on(y):
    """``int_0^y Bi(w) dw`` for either sign of ``y``."""
    y = float(_check_range(y))
    if y > 0.0:
        airy_eval(y)
        return _quad(_bi_scalar, 0.0, y)
    return -airy_b_integral(y)


def scorer_gi_prime(y):
    """Derivative of the Scorer function Gi at a real point.

    For ``y <= 0`` uses the Wronskian closed form built from
    ``A(y) = int_y^0 Ai`` and ``B(y) = int_y^0 Bi``; for ``y > 0`` a
    rotated-contour integral with exponentially damped integrand.
    """
    y = float(_check_range(y))
    if y > 0.0:
        return _gi_prime_positive(y)
    v = airy_eval(y)
    w = v.wronskian
    if abs(w - 1.0 / math.pi) > 1e-8:
        raise NumericalError(f"Wronskian {w!r} deviates from 1/pi at y={y}")
    num = (1.0 / 3.0 + airy_a_integral(y)) * v.bi_prime - airy_b_integral(y) * v.ai_prime
    return num / (math.pi * w)


def _gi_prime_positive(x):
    # Gi'(x) = (1/pi) int_0^inf s exp(-s^3/3 - x s/2) sin(pi/6 - sqrt(3) x s / 2) ds
    r3 = math.sqrt(3.0) / 2.0

    def f(s):
        return s * math.exp(-(s**3) / 3.0 - 0.5 * x * s) * math.sin(math.pi / 6.0 - r3 * x * s)

    upper = (3.0 * 45.0) ** (1.0 / 3.0)
    return _quad(f, 0.0, upper) / math.pi


def scorer_gi_prime_many(points):
    """Vectorised Gi' using cumulative Ai/Bi integrals over sorted points."""
    pts = np.asarray(points, dtype=float)
    out = np.empty_like(pts)
    neg = pts <= 0.0
    for i in np.flatnonzero(~neg):
        out[i] = _gi_prime_positive(pts[i])
    idx = np.flatnonzero(neg)
    if idx.size:
        order = idx[np.argsort(pts[idx])[::-1]]  # from 0 downwards
        a_acc = b_acc = 0.0
        prev = 0.0
        for i in order:
            p = pts[i]
            a_acc += _panel_integral(_ai_scalar, p, prev)
            b_acc += _panel_integral(_bi_scalar, p, prev)
            prev = p
            v = airy_eval(p)
            w = v.wronskian
            if abs(w - 1.0 / math.pi) > 1e-8:
                raise NumericalError(f"Wronskian {w!r} deviates from 1/pi at y={p}")
            out[i] = ((1.0 / 3.0 + a_acc) * v.bi_prime - b_acc * v.ai_prime) / (math.pi * w)
    return out


# ---------------------------------------------------------------------------
# exponentially weighted integrals


def laplace_ai(gamma, rtol=1e-14, max_terms=20000):
    """``int_0^inf exp(gamma w) Ai(w) dw`` from its Mellin-transform series.

    ``(1/3) sum_n (gamma/3^{1/3})^n / Gamma(n/3 + 1)``; terms are summed in
    log space until the certified tail bound drops below ``rtol`` times the
    partial sum.  Cancellation beyond ~5 digits raises :class:`AiryRangeError`.
    """
    g = float(gamma)
    if not math.isfinite(g):
        raise AiryRangeError("gamma must be finite")
    x = g / 3.0 ** (1.0 / 3.0)
    if x == 0.0:
        return 1.0 / 3.0
    logx = math.log(abs(x))
    terms = []
    biggest = 0.0
    for n in range(max_terms):
        t = math.exp(n * logx - math.lgamma(n / 3.0 + 1.0))
        if x < 0 and n % 2 == 1:
            t = -t
        terms.append(t)
        biggest = max(biggest, abs(t))
        # past the peak, each residue class mod 3 decays with ratio r
        r = abs(x) ** 3 / (n / 3.0 + 1.0)
        if n >= 3 and r < 0.5:
            s = math.fsum(terms)
            tail = 3.0 * max(abs(v) for v in terms[-3:]) * r / (1.0 - r)
            if tail <= rtol * abs(s):
                if biggest * 1e-16 > 1e-9 * abs(s):
                    raise AiryRangeError(f"series cancellation too severe at gamma={g}")
                return s / 3.0
    raise AiryRangeError(f"Laplace series did not converge at gamma={g}")


def laplace_ai_closed_form(gamma):
    """Closed form of :func:`laplace_ai` via confluent hypergeometric functions."""
    g = float(gamma)
    arg = -(g**3) / 3.0
    t1 = special.hyp1f1(1.0 / 3.0, 4.0 / 3.0, arg) * g / (3.0 ** (4.0 / 3.0) * special.gamma(4.0 / 3.0))
    t2 = special.hyp1f1(2.0 / 3.0, 5.0 / 3.0, arg) * g**2 / (3.0 ** (5.0 / 3.0) * special.gamma(5.0 / 3.0))
    return math.exp(g**3 / 3.0) * (1.0 / 3.0 + t1 + t2)


def exp_weighted_ai(gamma, y):
    """``I(gamma, y) = int_{-y}^0 exp(gamma w) Ai(w) dw`` for ``y >= 0``."""
    y = float(y)
    if y < 0:
        raise DomainError("y must be non-negative")
    g = float(gamma)
    _check_range(-y)
    return _panel_integral(lambda w: math.exp(g * w) * special.airy(w)[0], -y, 0.0)


def exp_weighted_ai_from(gamma, s):
    """``int_s^inf exp(gamma w) Ai(w) dw`` for any real ``s``."""
    s = float(s)
    g = float(gamma)
    if s <= 0.0:
        return exp_weighted_ai(g, -s) + laplace_ai(g)
    return laplace_ai(g) - _quad(lambda w: math.exp(g * w) * special.airy(w)[0], 0.0, s)


def exp_weighted_ai_from_many(gamma, points):
    """Vectorised :func:`exp_weighted_ai_from`."""
    g = float(gamma)
    return _cumulative_from(
        lambda w: math.exp(g * w) * special.airy(w)[0],
        points,
        lambda p: exp_weighted_ai_from(g, p),
    )
