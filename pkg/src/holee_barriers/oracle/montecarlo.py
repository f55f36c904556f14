"""Monte Carlo bond prices over folded Brownian paths.

A Brownian motion reflected at 0 has the law of ``|W|``; reflected at 0
and ``L`` it has the law of ``h(W)``, the triangle wave of period ``2L``.
Paths are simulated without barriers and folded, so the estimator does not
depend on any discrete reflection rule.  Step-wise folding
(``X_{k+1} = fold(X_k + dW)``) is also available; it has the same law on
the time grid and is used to test the equivalence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..drift import DriftCurve
from ..errors import DomainError, ValidationError

SEMI = "semi"
INTERVAL = "interval"
FOLD = "fold"
STEPWISE = "stepwise"


@dataclass(frozen=True)
class McConfig:
    n_paths: int = 1_000_000
    steps_per_year: int = 250
    seed: int = 12345
    antithetic: bool = True
    chunk: int = 50_000

    def __post_init__(self):
        if self.n_paths < 100:
            raise ValidationError("n_paths must be >= 100")
        if self.steps_per_year < 1 or self.chunk < 2:
            raise ValidationError("steps_per_year >= 1 and chunk >= 2 required")


@dataclass(frozen=True)
class McResult:
    price: float
    std_error: float
    n_samples: int


def triangle_wave(x, L):
    """``h(x)``: |x| folded into ``[0, L]`` with period ``2L``."""
    return L - np.abs(np.mod(x, 2.0 * L) - L)


def _fold(model, L):
    if model == SEMI:
        return np.abs
    if model == INTERVAL:
        if L is None or not L > 0:
            raise ValidationError("interval model needs L > 0")
        return lambda x: triangle_wave(x, L)
    raise ValidationError(f"unknown model {model!r}")


def mc_price(z, t, T, sigma, drift: DriftCurve, mc=McConfig(), model=SEMI, L=None, path=FOLD):
    """Sample mean and standard error of ``exp(-int_t^T r ds)``, trapezoid in time."""
    if T < t:
        raise ValidationError("T must not precede t")
    fold = _fold(model, L)
    x0 = (z - float(drift.chi(t))) / sigma
    if x0 < 0 or (model == INTERVAL and x0 > L):
        raise DomainError(f"start x0={x0} outside the domain")
    tau = T - t
    n_steps = max(1, int(math.ceil(tau * mc.steps_per_year)))
    dt = tau / n_steps
    times = t + dt * np.arange(n_steps + 1)
    chi = np.asarray(drift.chi(times), dtype=float)
    weights = np.full(n_steps + 1, dt)
    weights[[0, -1]] = 0.5 * dt
    drift_part = float(np.dot(weights, chi))

    chunks = []
    left = mc.n_paths
    while left > 0:
        chunks.append(min(mc.chunk, left))
        left -= chunks[-1]
    streams = np.random.SeedSequence(mc.seed).spawn(len(chunks))
    total = 0.0
    total_sq = 0.0
    count = 0
    sq = math.sqrt(dt)
    for size, ss in zip(chunks, streams):
        rng = np.random.default_rng(ss)
        half = size // 2 if mc.antithetic else size
        x = np.full(half, x0)
        xa = np.full(half, x0)
        acc = 0.5 * dt * fold(x)
        acc_a = acc.copy()
        for k in range(1, n_steps + 1):
            dw = rng.standard_normal(half) * sq
            x = x + dw
            if path == STEPWISE:
                x = fold(x)
            w = weights[k]
            acc += w * fold(x)
            if mc.antithetic:
                xa = xa - dw
                if path == STEPWISE:
                    xa = fold(xa)
                acc_a += w * fold(xa)
        disc = np.exp(-(sigma * acc + drift_part))
        if mc.antithetic:
            disc = 0.5 * (disc + np.exp(-(sigma * acc_a + drift_part)))
        total += math.fsum(disc)
        total_sq += math.fsum(disc * disc)
        count += disc.size
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0)
    return McResult(mean, math.sqrt(var / (count - 1)) if count > 1 else 0.0, count)
