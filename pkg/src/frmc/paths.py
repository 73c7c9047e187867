"""Batch simulation of forward and reverse trajectories.

Trajectory n of a batch draws all its randomness from the stream keyed by
(seed, role, n) — "fwd" for forward, "rev" for reverse — so a batch is
reproducible from the master seed alone and identical no matter how the
work is scheduled. Exact one-step samplers are used where the model
provides them; otherwise Euler stepping on a uniform refinement of each
grid interval.

The exponential weight of a reverse trajectory is accumulated in log space
with a left-endpoint rule on the Euler mesh (exact schemes require a
constant rate, for which log weight = rate * (T - t*) without quadrature
error). Only grid-time states are retained.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaincinv, gammaln

from .errors import ConfigurationError, NumericError, ValidationError
from .grids import TimeGrid, reverse_times
from .models import ModelSpec, ReverseSpec
from .streams import normals_from_uniforms, raw_uniforms

SCHEMES = ("exact", "euler")


@dataclass(frozen=True)
class ForwardBatch:
    """States of n_traj forward trajectories at pre_times[1:]."""

    grid: TimeGrid
    states: np.ndarray  # (n_traj, K, dim)
    x0: np.ndarray
    seed: int

    @property
    def n_traj(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[2]

    @property
    def endpoints(self) -> np.ndarray:
        """States at the matching time t*."""
        return self.states[:, -1, :]


@dataclass(frozen=True)
class ReverseBatch:
    """Reverse trajectories at the reflected clock times, plus weights.

    `starts` holds the initial point of every trajectory (the fixed
    conditioning state, or the random draws for set conditioning, in which
    case `start_density` carries their positive density values).
    """

    grid: TimeGrid
    states: np.ndarray  # (m_traj, L, dim)
    log_weight: np.ndarray  # (m_traj,)
    starts: np.ndarray  # (m_traj, dim)
    start_density: Optional[np.ndarray]
    seed: int

    @property
    def m_traj(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[2]

    @property
    def endpoints(self) -> np.ndarray:
        """States at reverse clock T - t*, paired against forward endpoints."""
        return self.states[:, -1, :]


class HyperplaneSampler:
    """Start points on the plane {x : x_1 = c_1, ..., x_k = c_k}.

    Free coordinates are drawn i.i.d. from either the standard normal
    (tails="normal", the practical default) or a heavier-tailed
    generalized normal with exponent 1.5 (tails="heavy", satisfying the
    strictly-super-Gaussian-tail requirement of the set-conditioning
    theory). The density is taken with respect to Lebesgue measure on the
    free coordinates; fixed coordinates contribute no factor.

    With k = dim the plane is a single point; with k = 0 it is the whole
    space.
    """

    _HEAVY_P = 1.5

    def __init__(self, dim: int, fixed_values, tails: str = "normal"):
        fixed = np.atleast_1d(np.asarray(fixed_values, dtype=float))
        if fixed.size > dim:
            raise ValidationError("more fixed coordinates than dimensions")
        if tails not in ("normal", "heavy"):
            raise ValidationError("tails must be 'normal' or 'heavy'")
        self.dim = int(dim)
        self.fixed_values = fixed
        self.n_free = self.dim - fixed.size
        self.tails = tails
        # heavy tails use (magnitude, sign) uniform pairs per coordinate
        self.uniforms_per_draw = self.n_free * (2 if tails == "heavy" else 1)

    def draw(self, u: np.ndarray):
        """Map uniforms (B, uniforms_per_draw) to (points (B, dim), density (B,))."""
        batch = u.shape[0]
        pts = np.empty((batch, self.dim))
        pts[:, : self.fixed_values.size] = self.fixed_values
        if self.n_free == 0:
            return pts, np.ones(batch)
        if self.tails == "normal":
            z = normals_from_uniforms(u)
            dens = np.exp(-0.5 * (z * z).sum(axis=1)) * (2.0 * np.pi) ** (
                -0.5 * self.n_free
            )
        else:
            p = self._HEAVY_P
            mag = gammaincinv(1.0 / p, u[:, : self.n_free]) ** (1.0 / p)
            sign = np.where(u[:, self.n_free :] < 0.5, -1.0, 1.0)
            z = sign * mag
            log_norm = np.log(p / 2.0) - gammaln(1.0 / p)
            dens = np.exp(
                self.n_free * log_norm - (np.abs(z) ** p).sum(axis=1)
            )
        pts[:, self.fixed_values.size :] = z
        return pts, dens


def _check_scheme(scheme: str, substeps: int) -> None:
    if scheme not in SCHEMES:
        raise ValidationError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if substeps < 1:
        raise ValidationError("substeps must be >= 1")


def _gather_normals(seed, role, n_traj, n_uniform_lead, n_steps, noise_dim, sampler):
    """Per-trajectory streams: optional sampler uniforms, then path normals."""
    count = n_uniform_lead + n_steps * noise_dim
    z = np.empty((n_traj, n_steps, noise_dim))
    lead = np.empty((n_traj, n_uniform_lead)) if n_uniform_lead else None
    for n in range(n_traj):
        u = raw_uniforms(seed, role, n, count)
        if n_uniform_lead:
            lead[n] = u[:n_uniform_lead]
        z[n] = normals_from_uniforms(u[n_uniform_lead:]).reshape(n_steps, noise_dim)
    return lead, z


def _euler_step(drift, diffusion, t, x, h, dw):
    sig = np.asarray(diffusion(t, x))
    return x + np.asarray(drift(t, x)) * h + np.einsum("bij,bj->bi", sig, dw)


def simulate_forward(
    model: ModelSpec,
    x0,
    grid: TimeGrid,
    scheme: str,
    seed: int,
    n_traj: int,
    substeps: int = 1,
) -> ForwardBatch:
    """Simulate n_traj forward trajectories, recorded at pre_times[1:]."""
    _check_scheme(scheme, substeps)
    if n_traj < 1:
        raise ValidationError("n_traj must be >= 1")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (model.dim,):
        raise ValidationError(f"x0 must have shape ({model.dim},)")
    if scheme == "exact" and model.exact_forward is None:
        raise ConfigurationError(
            f"model {model.name!r} has no exact sampler; use scheme='euler'"
        )

    times = grid.pre_times
    n_rec = grid.n_pre
    per_interval = 1 if scheme == "exact" else substeps
    n_steps = n_rec * per_interval
    _, z = _gather_normals(seed, "fwd", n_traj, 0, n_steps, model.noise_dim, None)

    x = np.tile(x0, (n_traj, 1))
    out = np.empty((n_traj, n_rec, model.dim))
    step = 0
    for k in range(n_rec):
        dt = times[k + 1] - times[k]
        if scheme == "exact":
            x = np.asarray(model.exact_forward(times[k], x, dt, z[:, step, :]))
            step += 1
        else:
            h = dt / substeps
            sqh = np.sqrt(h)
            for j in range(substeps):
                t_cur = times[k] + j * h
                x = _euler_step(model.drift, model.diffusion, t_cur, x, h, sqh * z[:, step, :])
                step += 1
        out[:, k, :] = x
    if not np.isfinite(out).all():
        raise NumericError("forward simulation produced non-finite states")
    return ForwardBatch(grid=grid, states=out, x0=x0, seed=seed)


def simulate_reverse(
    rev: ReverseSpec,
    start,
    grid: TimeGrid,
    scheme: str,
    seed: int,
    m_traj: int,
    substeps: int = 1,
) -> ReverseBatch:
    """Simulate the reverse system from a fixed point or a start sampler.

    `start` is either a state vector (conditioning on a point) or a
    HyperplaneSampler (conditioning on a set); sampler draws with zero
    density raise a NumericError since the weighting divides by it.
    """
    _check_scheme(scheme, substeps)
    if m_traj < 1:
        raise ValidationError("m_traj must be >= 1")
    if rev.horizon != grid.horizon:
        raise ConfigurationError(
            f"reverse coefficients built for horizon {rev.horizon!r} but the "
            f"grid ends at {grid.horizon!r}"
        )
    if scheme == "exact" and (
        rev.exact_step is None or rev.constant_weight_rate is None
    ):
        raise ConfigurationError(
            f"{rev.name!r} has no exact sampler; use scheme='euler'"
        )

    sampler = start if isinstance(start, HyperplaneSampler) else None
    n_lead = sampler.uniforms_per_draw if sampler is not None else 0
    rtimes = reverse_times(grid)
    n_rec = grid.n_post
    per_interval = 1 if scheme == "exact" else substeps
    n_steps = n_rec * per_interval
    lead, z = _gather_normals(seed, "rev", m_traj, n_lead, n_steps, rev.noise_dim, sampler)

    if sampler is not None:
        if sampler.dim != rev.dim:
            raise ValidationError("sampler dimension does not match the model")
        starts, density = sampler.draw(lead if lead is not None else np.empty((m_traj, 0)))
        bad = np.where(density <= 0.0)[0]
        if bad.size:
            raise NumericError(
                f"start sampler produced non-positive density for trajectory {int(bad[0])}"
            )
    else:
        y0 = np.atleast_1d(np.asarray(start, dtype=float))
        if y0.shape != (rev.dim,):
            raise ValidationError(f"start must have shape ({rev.dim},)")
        starts, density = np.tile(y0, (m_traj, 1)), None

    y = starts.copy()
    log_w = np.zeros(m_traj)
    out = np.empty((m_traj, n_rec, rev.dim))
    clock = np.concatenate(([0.0], rtimes))
    step = 0
    for k in range(n_rec):
        dt = clock[k + 1] - clock[k]
        if scheme == "exact":
            y = np.asarray(rev.exact_step(clock[k], y, dt, z[:, step, :]))
            step += 1
        else:
            h = dt / substeps
            sqh = np.sqrt(h)
            for j in range(substeps):
                t_cur = clock[k] + j * h
                log_w += np.asarray(rev.weight_rate(t_cur, y)) * h
                y = _euler_step(rev.drift, rev.diffusion, t_cur, y, h, sqh * z[:, step, :])
                step += 1
        out[:, k, :] = y
    if scheme == "exact":
        log_w[:] = rev.constant_weight_rate * rtimes[-1]
    if not (np.isfinite(out).all() and np.isfinite(log_w).all()):
        raise NumericError("reverse simulation produced non-finite states or weights")
    return ReverseBatch(
        grid=grid,
        states=out,
        log_weight=log_w,
        starts=starts,
        start_density=density,
        seed=seed,
    )


def dump_csv(batch, path) -> None:
    """Debug dump: one row per (trajectory, time index, coordinate).

    Reverse batches append the trajectory's log weight to every row.
    Format is documented for inspection only, nothing parses it back.
    """
    is_reverse = isinstance(batch, ReverseBatch)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["traj", "time_index", "coordinate", "value"]
        if is_reverse:
            header.append("log_weight")
        writer.writerow(header)
        n, steps, dim = batch.states.shape
        for tr in range(n):
            for k in range(steps):
                for c in range(dim):
                    row = [tr, k, c, repr(float(batch.states[tr, k, c]))]
                    if is_reverse:
                        row.append(repr(float(batch.log_weight[tr])))
                    writer.writerow(row)
