"""Built-in experiment presets and their path functionals.

Two presets reproduce the published studies end to end:

* example-bb     — a 2-d Brownian motion pinned to the origin at time 1;
                   the functional averages each coordinate over the
                   interior grid and sums the squares. The exact value is
                   (1/6)(l+1)/(l-1), so the preset doubles as a truth
                   check. Exact sampling, bandwidth N^-0.4.
* example-heston — a Heston stock/variance model conditioned on the stock
                   ending at a fixed level (a hyperplane in state space);
                   the functional is the realized variance of the log
                   stock over the grid, terminal value included. Euler
                   stepping with mesh min(1/360, sqrt(0.05/N)), bandwidth
                   (4N)^-0.4, standard-normal start density on the free
                   coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .estimator import (
    EstimateResult,
    EstimatorConfig,
    PathFunctional,
    build_pair_index,
    estimate_point,
    estimate_set,
)
from .grids import uniform_grid
from .kernels import GAUSSIAN, truncated
from .models import brownian, heston, ornstein_uhlenbeck, reverse_coefficients
from .paths import HyperplaneSampler, simulate_forward, simulate_reverse

DEFAULT_ETA = 1e-3


def mean_square_functional() -> PathFunctional:
    """Sum over coordinates of the squared average over the state tuple."""

    def fn(states):
        return (states.mean(axis=1) ** 2).sum(axis=-1)

    return PathFunctional(fn=fn, vectorized=True, name="mean_square")


def realized_variance_functional() -> PathFunctional:
    """Sum of squared log increments of the first coordinate; needs the
    terminal state (the conditioning level contributes the last increment)."""

    def fn(states):
        logs = np.log(states[..., 0])
        return (np.diff(logs, axis=1) ** 2).sum(axis=1)

    return PathFunctional(fn=fn, uses_terminal=True, vectorized=True, name="realized_variance")


def coordinate_square_functional(state_index: int, coordinate: int) -> PathFunctional:
    """Square of one coordinate at one position of the state tuple."""

    def fn(states):
        return states[:, state_index, coordinate] ** 2

    return PathFunctional(fn=fn, vectorized=True, name=f"square[{state_index},{coordinate}]")


# --- pinned Brownian motion ---------------------------------------------------


def bb_bandwidth(n_traj: int) -> float:
    return float(n_traj) ** -0.4


def bb_estimate(
    n_traj: int,
    seed: int,
    segments: int = 10,
    n_pre: int = 4,
    m_traj: Optional[int] = None,
    eta: float = DEFAULT_ETA,
    threads: int = 1,
) -> EstimateResult:
    """One pinned-Brownian-motion estimate (2-d, pinned 0 -> 0 on [0, 1])."""
    m_traj = n_traj if m_traj is None else m_traj
    model = brownian(2)
    grid = uniform_grid(segments, n_pre, horizon=1.0)
    rev = reverse_coefficients(model, grid.horizon)
    fwd = simulate_forward(model, (0.0, 0.0), grid, "exact", seed, n_traj)
    rbatch = simulate_reverse(rev, (0.0, 0.0), grid, "exact", seed, m_traj)
    cfg = EstimatorConfig(
        bandwidth=bb_bandwidth(n_traj),
        kernel=truncated(GAUSSIAN, 2, eta),
    )
    index = build_pair_index(fwd, cfg)
    return estimate_point(fwd, rbatch, mean_square_functional(), cfg, index, threads)


# --- Heston conditioned on the terminal stock level ---------------------------


@dataclass(frozen=True)
class HestonPreset:
    mu: float = 0.05
    gamma: float = -0.15
    beta: float = -0.045
    xi: float = 0.3
    rho: float = -0.7
    s0: float = 10.0
    v0: float = 0.25
    s_terminal: float = 12.0
    horizon: float = 1.0 / 12.0
    segments: int = 30
    n_pre: int = 15
    eta: float = DEFAULT_ETA
    tails: str = "normal"


def heston_bandwidth(n_traj: int) -> float:
    return (4.0 * float(n_traj)) ** -0.4


def heston_substeps(n_traj: int, preset: HestonPreset) -> int:
    """Euler refinement so the mesh is at most min(1/360, sqrt(0.05/N))."""
    mesh = min(1.0 / 360.0, math.sqrt(0.05 / n_traj))
    dt = preset.horizon / preset.segments
    return max(1, math.ceil(dt / mesh))


def heston_estimate(
    n_traj: int,
    seed: int,
    preset: HestonPreset = HestonPreset(),
    m_traj: Optional[int] = None,
    threads: int = 1,
) -> EstimateResult:
    """One realized-variance estimate conditioned on the terminal stock."""
    m_traj = n_traj if m_traj is None else m_traj
    model = heston(preset.mu, preset.gamma, preset.beta, preset.xi, preset.rho)
    grid = uniform_grid(preset.segments, preset.n_pre, horizon=preset.horizon)
    rev = reverse_coefficients(model, grid.horizon)
    substeps = heston_substeps(n_traj, preset)
    fwd = simulate_forward(
        model, (preset.s0, preset.v0), grid, "euler", seed, n_traj, substeps
    )
    sampler = HyperplaneSampler(dim=2, fixed_values=[preset.s_terminal], tails=preset.tails)
    rbatch = simulate_reverse(rev, sampler, grid, "euler", seed, m_traj, substeps)
    cfg = EstimatorConfig(
        bandwidth=heston_bandwidth(n_traj),
        kernel=truncated(GAUSSIAN, 2, preset.eta),
    )
    index = build_pair_index(fwd, cfg)
    return estimate_set(fwd, rbatch, realized_variance_functional(), cfg, index, threads)


# --- 1-d mean-reverting reference runs ----------------------------------------


def ou_estimate(
    n_traj: int,
    seed: int,
    rate: float = 1.0,
    x0: float = 0.0,
    y: float = 0.0,
    horizon: float = 1.0,
    t_star: float = 0.5,
    bandwidth_value: float = 0.1,
    m_traj: Optional[int] = None,
    eta: float = DEFAULT_ETA,
    g: Optional[PathFunctional] = None,
    threads: int = 1,
) -> EstimateResult:
    """Minimal-grid run of the 1-d mean-reverting model (K = L = 1)."""
    from .estimator import constant_one
    from .grids import make_grid

    m_traj = n_traj if m_traj is None else m_traj
    model = ornstein_uhlenbeck(rate)
    grid = make_grid([0.0, t_star], [t_star, horizon])
    rev = reverse_coefficients(model, horizon)
    fwd = simulate_forward(model, (x0,), grid, "exact", seed, n_traj)
    rbatch = simulate_reverse(rev, (y,), grid, "exact", seed, m_traj)
    cfg = EstimatorConfig(bandwidth=bandwidth_value, kernel=truncated(GAUSSIAN, 1, eta))
    index = build_pair_index(fwd, cfg)
    return estimate_point(fwd, rbatch, g or constant_one(), cfg, index, threads)
