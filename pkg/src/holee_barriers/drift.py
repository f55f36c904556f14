"""Deterministic drift component of the short rate.

``chi(t) = r0 + int_0^t nu(s) ds`` is stored as a piecewise polynomial so
that ``eta(t, T) = int_t^T [chi(s) - chi(t)] ds`` is integrated exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PPoly

from .errors import AdmissibilityError, ValidationError

CONSTANT = "constant"
POLYNOMIAL = "polynomial"


@dataclass(frozen=True)
class DriftCurve:
    """Piecewise-polynomial ``chi(t)`` on ``[knots[0], knots[-1]]``.

    Beyond the last knot ``chi`` is either held at its terminal value
    (``extrapolation="constant"``, the default, which keeps the asymptotic
    yield finite) or continued with the last polynomial piece.
    """

    chi_poly: PPoly
    extrapolation: str = CONSTANT

    def __post_init__(self):
        if self.extrapolation not in (CONSTANT, POLYNOMIAL):
            raise ValidationError(f"unknown extrapolation {self.extrapolation!r}")
        object.__setattr__(self, "_antideriv", self.chi_poly.antiderivative())

    # -- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, r0, horizon=1.0):
        return cls(PPoly(np.array([[float(r0)]]), np.array([0.0, float(horizon)])), CONSTANT)

    @classmethod
    def linear(cls, r0, nu, horizon=1.0):
        """Constant drift ``nu``: ``chi(t) = r0 + nu t`` for all t (unbounded)."""
        c = np.array([[float(nu)], [float(r0)]])
        return cls(PPoly(c, np.array([0.0, float(horizon)])), POLYNOMIAL)

    @classmethod
    def piecewise_linear(cls, knots, values, extrapolation=CONSTANT):
        knots = np.asarray(knots, dtype=float)
        values = np.asarray(values, dtype=float)
        if knots.ndim != 1 or knots.size < 2 or np.any(np.diff(knots) <= 0):
            raise ValidationError("knots must be strictly increasing with at least 2 points")
        slopes = np.diff(values) / np.diff(knots)
        c = np.vstack([slopes, values[:-1]])
        return cls(PPoly(c, knots), extrapolation)

    # -- evaluation -------------------------------------------------------

    @property
    def knots(self):
        return self.chi_poly.x

    @property
    def r0(self):
        return self.chi(self.knots[0])

    @property
    def t_end(self):
        return float(self.knots[-1])

    @property
    def bounded(self):
        """True when ``chi`` has a finite limit at infinity."""
        if self.extrapolation == CONSTANT:
            return True
        return bool(np.all(self.chi_poly.c[:-1, -1] == 0.0))

    def _check_t(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.knots[0]):
            raise ValidationError(f"time before drift start {self.knots[0]}")
        return t

    def chi(self, t):
        t = self._check_t(t)
        if self.extrapolation == POLYNOMIAL:
            return self.chi_poly(t)
        end = self.t_end
        return np.where(t <= end, self.chi_poly(np.minimum(t, end)), self.chi_poly(end))

    def nu(self, t):
        t = self._check_t(t)
        d = self.chi_poly.derivative()
        if self.extrapolation == POLYNOMIAL:
            return d(t)
        return np.where(t <= self.t_end, d(np.minimum(t, self.t_end)), 0.0)

    def integral(self, t):
        """``int_{knots[0]}^t chi(s) ds``."""
        t = self._check_t(t)
        F = self._antideriv
        if self.extrapolation == POLYNOMIAL:
            return F(t)
        end = self.t_end
        inside = F(np.minimum(t, end))
        return np.where(t <= end, inside, F(end) + self.chi_poly(end) * (t - end))

    def eta(self, t, T):
        """``eta(t, T) = int_t^T [chi(s) - chi(t)] ds``."""
        return eta(self, t, T)

    def chi_star(self, t):
        """``lim_{T->inf} eta(t, T) / (T - t)``."""
        if not self.bounded:
            raise AdmissibilityError(
                "chi(s) diverges as s -> infinity (nonzero constant drift): the asymptotic "
                "yield is infinite, so constant negative drift is not allowed"
            )
        if self.extrapolation == CONSTANT:
            limit = float(self.chi_poly(self.t_end))
        else:
            limit = float(self.chi_poly.c[-1, -1])
        return limit - float(self.chi(t))


def eta(drift, t, T):
    """Exact ``eta(t, T)`` for a :class:`DriftCurve`; broadcasts over ``T``."""
    T = np.asarray(T, dtype=float)
    t = float(t)
    if np.any(T < t):
        raise ValidationError("maturity before valuation time (T < t)")
    return drift.integral(T) - drift.integral(t) - drift.chi(t) * (T - t)


def zero_drift(r0):
    return DriftCurve.constant(r0)


def is_zero_drift(drift):
    return bool(np.all(drift.chi_poly.c[:-1] == 0.0)) and math.isclose(
        float(np.min(drift.chi_poly.c[-1])), float(np.max(drift.chi_poly.c[-1]))
    )
