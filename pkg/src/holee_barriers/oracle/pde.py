"""Finite-difference bond prices with Neumann (reflecting) boundaries.

The pricing equation in ``x = (r - chi(t)) / sigma`` is

    d psi / d tau = 1/2 psi_xx - (sigma x + chi(T - tau)) psi,   psi(x, 0) = 1,

with ``psi_x = 0`` at both ends of the grid.  Ends are handled with ghost
points, so the scheme stays second order up to the boundary.  Time stepping
is a theta blend (0.5 is Crank-Nicolson); each step is one banded solve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import solve_banded

from ..drift import DriftCurve
from ..errors import DomainError, ValidationError

SEMI = "semi"
INTERVAL = "interval"


@dataclass(frozen=True)
class PdeGrid:
    n_x: int = 2000
    n_t: int = 2000
    x_max: Optional[float] = None
    theta: float = 0.5
    x_min: float = 0.0

    def __post_init__(self):
        if self.n_x < 3 or self.n_t < 1:
            raise ValidationError("need n_x >= 3 and n_t >= 1")
        if not 0.5 <= self.theta <= 1.0:
            raise ValidationError("theta must lie in [0.5, 1] for stability")
        if self.x_max is not None and not self.x_max > self.x_min:
            raise ValidationError("x_max must exceed x_min")


def _neumann_laplacian(n, h):
    """Tridiagonal second difference with ghost-point Neumann ends (banded form)."""
    lower = np.full(n, 1.0 / h**2)
    diag = np.full(n, -2.0 / h**2)
    upper = np.full(n, 1.0 / h**2)
    upper[1] = 2.0 / h**2   # row 0: (2 psi_1 - 2 psi_0) / h^2
    lower[-2] = 2.0 / h**2  # row n-1: (2 psi_{n-2} - 2 psi_{n-1}) / h^2
    return lower, diag, upper


def _apply(lower, diag, upper, v):
    out = diag * v
    out[:-1] += upper[1:] * v[1:]
    out[1:] += lower[:-1] * v[:-1]
    return out


def solve_backward(grid_x, diffusion, advection, potential, tau, n_t, theta=0.5):
    """March ``v_tau = D v_xx + a v_x - U(x, tau) v`` from ``v = 1`` to ``tau``.

    ``potential(x, s)`` is evaluated at the mid time of each step; the
    advection term uses central differences and is zero at the Neumann ends.
    """
    n = grid_x.size
    h = grid_x[1] - grid_x[0]
    lo, di, up = _neumann_laplacian(n, h)
    lo, di, up = diffusion * lo, diffusion * di, diffusion * up
    if advection:
        c = advection / (2.0 * h)
        up = up.copy()
        lo = lo.copy()
        up[2:] += c
        lo[:-2] -= c
    v = np.ones(n)
    dt = tau / n_t
    ab = np.zeros((3, n))
    for k in range(n_t):
        U = potential(grid_x, (k + 0.5) * dt)
        rhs = v + (1.0 - theta) * dt * (_apply(lo, di, up, v) - U * v)
        ab[0, 1:] = -theta * dt * up[1:]
        ab[1] = 1.0 - theta * dt * (di - U)
        ab[2, :-1] = -theta * dt * lo[:-1]
        v = solve_banded((1, 1), ab, rhs, overwrite_b=True, check_finite=False)
    return v


def _interp(grid_x, v, x):
    """Cubic Lagrange interpolation of grid values at ``x``."""
    h = grid_x[1] - grid_x[0]
    k = int(np.clip(np.floor((x - grid_x[0]) / h) - 1, 0, grid_x.size - 4))
    xs = grid_x[k:k + 4]
    ys = v[k:k + 4]
    total = 0.0
    for i in range(4):
        w = 1.0
        for j in range(4):
            if j != i:
                w *= (x - xs[j]) / (xs[i] - xs[j])
        total += w * ys[i]
    return float(total)


def pde_price(z, t, T, sigma, drift: DriftCurve, grid=PdeGrid(), model=SEMI, L=None):
    """Bond price by finite differences in ``x`` for the half-line or interval model."""
    if T < t:
        raise ValidationError("T must not precede t")
    tau = T - t
    x = (z - float(drift.chi(t))) / sigma
    if model == INTERVAL:
        if L is None:
            raise ValidationError("interval model needs L")
        x_max = float(L)
    elif model == SEMI:
        x_max = grid.x_max if grid.x_max is not None else x + 6.0 * math.sqrt(max(tau, 1e-12)) + 1.0
    else:
        raise ValidationError(f"unknown model {model!r}")
    if x < grid.x_min - 1e-12 or x > x_max + 1e-12:
        raise DomainError(f"x={x} outside the grid [{grid.x_min}, {x_max}]")
    if tau == 0.0:
        return 1.0
    xs = np.linspace(grid.x_min, x_max, grid.n_x)

    def potential(xg, s):
        return sigma * xg + float(drift.chi(T - s))

    v = solve_backward(xs, 0.5, 0.0, potential, tau, grid.n_t, grid.theta)
    return _interp(xs, v, x)


def pde_price_robin(z, tau, sigma, nu, r_star, n_z=2000, n_t=2000, z_max=None, theta=0.5):
    """Price under ``dr = nu dt + sigma dW`` with ``v_z = 0`` at ``r = r_star``.

    Solves ``v_tau = 1/2 sigma^2 v_zz + nu v_z - z v`` on ``[r_star, z_max]``
    with a far-field Neumann end.
    """
    if z < r_star:
        raise DomainError(f"z={z} below r_star={r_star}")
    if z_max is None:
        z_max = max(z, r_star) + 6.0 * sigma * math.sqrt(max(tau, 1e-12)) + abs(nu) * tau + 0.5
    if tau == 0.0:
        return 1.0
    zs = np.linspace(r_star, z_max, n_z)
    v = solve_backward(zs, 0.5 * sigma**2, nu, lambda zg, s: zg, tau, n_t, theta)
    return _interp(zs, v, z)
