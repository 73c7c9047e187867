"""Closed-form references and brute-force oracles backing the tests.

These deliberately avoid the production code paths: the double sum below
is a plain O(N*M) loop, and the closed forms are written term by term so
they can be checked against scripts/derive_golden.py.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .estimator import (
    EstimateResult,
    EstimatorConfig,
    PathFunctional,
    _cutoff_threshold,
)
from .errors import DegenerateDenominatorError
from .kernels import kernel_value
from .paths import ForwardBatch, ReverseBatch


def bridge_mean_square_truth(segments: int) -> float:
    """Exact value of the averaged-coordinate-square functional for the
    pinned two-dimensional random walk: (1/6)(l+1)/(l-1)."""
    if segments < 2:
        raise ValidationError("need at least 2 segments")
    return (segments + 1) / (segments - 1) / 6.0


@dataclass(frozen=True)
class OUParams:
    """Parameters of the one-dimensional mean-reverting reference model."""

    rate: float  # mean-reversion speed, > 0
    x0: float  # forward start
    y: float  # conditioning point
    horizon: float  # T
    t_star: float  # matching time, in (0, T)
    bandwidth: float  # kernel bandwidth (0 allowed in the closed forms)
    n_traj: int = 2

    def __post_init__(self):
        if not self.rate > 0:
            raise ValidationError("rate must be positive")
        if not 0.0 < self.t_star < self.horizon:
            raise ValidationError("need 0 < t_star < horizon")

    def sigma2(self, s: float) -> float:
        """Stationary-part variance over an interval of length s."""
        return (1.0 - math.exp(-2.0 * self.rate * s)) / (2.0 * self.rate)


def ou_numerator_mean(p: OUParams) -> float:
    """Expected value of the kernel-smoothed numerator (g == 1, K = L = 1)."""
    var = p.bandwidth**2 * math.exp(-2.0 * p.rate * (p.horizon - p.t_star)) + p.sigma2(
        p.horizon
    )
    gap = (math.exp(-p.rate * p.horizon) * p.x0 - p.y) ** 2
    return math.exp(-gap / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)


def ou_numerator_variance(p: OUParams) -> float:
    """Variance of the numerator estimator with N = M trajectories.

    Four terms; the last one carries the exp(rate * (T - t*)) factor that
    blows up for strong mean reversion.
    """
    if p.n_traj < 2:
        raise ValidationError("variance formula needs n_traj >= 2")
    n = float(p.n_traj)
    s2T = p.sigma2(p.horizon)
    s2d = p.sigma2(p.horizon - p.t_star)
    gap = (math.exp(-p.rate * p.horizon) * p.x0 - p.y) ** 2
    b = p.bandwidth**2 * math.exp(-2.0 * p.rate * (p.horizon - p.t_star))
    two_pi_n2 = 2.0 * math.pi * n * n
    t1 = -(2.0 * n - 1.0) / (two_pi_n2 * (b + s2T)) * math.exp(-gap / (b + s2T))
    t2 = (
        (n - 1.0)
        / (two_pi_n2 * math.sqrt(b + s2d) * math.sqrt(b + 2.0 * s2T - s2d))
        * math.exp(-gap / (b + 2.0 * s2T - s2d))
    )
    t3 = (
        (n - 1.0)
        / (two_pi_n2 * math.sqrt(b + s2T - s2d) * math.sqrt(b + s2T + s2d))
        * math.exp(-gap / (b + s2T + s2d))
    )
    t4 = (
        math.exp(p.rate * (p.horizon - p.t_star))
        / (two_pi_n2 * p.bandwidth * math.sqrt(b + 2.0 * s2T))
        * math.exp(-gap / (b + 2.0 * s2T))
    )
    return t1 + t2 + t3 + t4


def transition_density(model: str, t: float, x: float, s: float, y: float, rate: float = 1.0) -> float:
    """1-d transition density p(t, x, s, y) for the reference models.

    "bm": Gaussian with mean x, variance s - t. "ou": Gaussian with mean
    exp(-rate (s-t)) x and the mean-reverting variance.
    """
    if not s > t:
        raise ValidationError("need s > t")
    if model == "bm":
        mean, var = x, s - t
    elif model == "ou":
        if not rate > 0:
            raise ValidationError("rate must be positive")
        dt = s - t
        mean = math.exp(-rate * dt) * x
        var = (1.0 - math.exp(-2.0 * rate * dt)) / (2.0 * rate)
    else:
        raise ValidationError(f"unknown reference model {model!r}")
    return math.exp(-((y - mean) ** 2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)


def brute_force_double_sum(
    fwd: ForwardBatch,
    rev: ReverseBatch,
    g: PathFunctional,
    cfg: EstimatorConfig,
) -> EstimateResult:
    """Reference estimator: every (n, m) pair, no spatial index.

    Sums run m-major with n ascending. Pair counting matches the fast
    path: within the matching ball for truncated kernels, all pairs
    otherwise.
    """
    n, m = fwd.n_traj, rev.m_traj
    if n * m > 1_000_000:
        raise ValidationError("brute force limited to N*M <= 1e6 pairs")
    eps = cfg.bandwidth
    radius = cfg.pair_radius()
    weights = np.exp(rev.log_weight)
    if rev.start_density is not None:
        weights = weights / rev.start_density

    ends_f = fwd.endpoints
    z_chron = rev.states[:, :-1, :][:, ::-1, :]
    numer = np.zeros(m)
    denom = np.zeros(m)
    pairs = 0
    for j in range(m):
        diff = rev.endpoints[j] - ends_f
        if np.isfinite(radius):
            inside = (diff * diff).sum(axis=1) <= radius * radius
        else:
            inside = np.ones(n, dtype=bool)
        pairs += int(inside.sum())
        if not inside.any():
            continue
        kv = kernel_value(cfg.kernel, diff[inside] / eps)
        states = np.concatenate(
            [
                fwd.states[inside],
                np.broadcast_to(z_chron[j], (int(inside.sum()),) + z_chron[j].shape),
            ],
            axis=1,
        )
        if g.uses_terminal:
            term = np.broadcast_to(rev.starts[j], (states.shape[0], 1, fwd.dim))
            states = np.concatenate([states, term], axis=1)
        if g.vectorized:
            gv = np.asarray(g.fn(states), dtype=float)
        else:
            gv = np.array([float(g.fn(states[i])) for i in range(states.shape[0])])
        kw = kv * weights[j]
        denom[j] = np.sum(kw)
        numer[j] = np.sum(gv * kw)

    numer_tot = float(np.sum(numer))
    denom_tot = float(np.sum(denom))
    norm = eps ** (-fwd.dim) / (n * m)
    threshold = _cutoff_threshold(cfg, n)
    p_hat = norm * denom_tot
    triggered = threshold is not None and not p_hat > threshold
    if triggered:
        ratio = 0.0
    elif denom_tot == 0.0:
        raise DegenerateDenominatorError("no matched pairs in brute-force sum")
    else:
        ratio = numer_tot / denom_tot
    return EstimateResult(
        ratio=ratio,
        numerator=norm * numer_tot,
        denominator=p_hat,
        pairs=pairs,
        cutoff_triggered=triggered,
        wall_time=0.0,
    )
