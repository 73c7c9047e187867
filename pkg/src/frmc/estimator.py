"""Self-normalized forward-reverse estimators.

A pair (n, m) of one forward and one reverse trajectory contributes

    Z_nm = eps^-dim * g(chronological states) * K((Y_end - X_end)/eps) * w_m

where w_m is the reverse trajectory's exponential weight (divided by the
start density for set conditioning). The functional g always sees states
in forward chronological order: the forward leg at pre_times[1:], then the
reverse trajectory re-indexed to run forward through the second leg, and
optionally the conditioning state at the horizon.

The ratio estimator divides the g-weighted kernel sum by the g == 1 sum;
the denominator alone (normalized by eps^-dim / (N M)) estimates the
transition density, or the set mass under set conditioning. An optional
cutoff zeroes the ratio when that density estimate is too small.

Summation is deterministic: per-reverse-trajectory partial sums are
accumulated in candidate-index order and reduced in ascending trajectory
order, independent of thread count.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from .errors import (
    DegenerateDenominatorError,
    FrmcError,
    NumericError,
    UsageError,
    ValidationError,
)
from .kernels import KernelSpec, kernel_value
from .matcher import SpatialIndex, _neighbor_cells, build_index
from .paths import ForwardBatch, ReverseBatch
from .streams import derive_seed

_BLOCK = 1024  # reverse trajectories per processing block


@dataclass(frozen=True)
class PathFunctional:
    """A functional of the chronological state tuple.

    fn receives an array of shape (n_states, dim) — or (batch, n_states,
    dim) when vectorized — where n_states = K + L - 1, plus one more state
    (the conditioning point at the horizon) when uses_terminal is set.
    Must be deterministic and finite on finite inputs.
    """

    fn: Callable
    uses_terminal: bool = False
    vectorized: bool = False
    name: str = "g"


def constant_one() -> PathFunctional:
    """g == 1; the ratio estimator returns exactly 1 whenever it is defined."""
    return PathFunctional(
        fn=lambda states: np.ones(states.shape[0]),
        vectorized=True,
        name="one",
    )


@dataclass(frozen=True)
class EstimatorConfig:
    """Estimation parameters.

    cutoff: None disables the indicator; a float is a known lower bound
    p_bar for the density (threshold p_bar / 2); a callable maps N to the
    threshold directly (a vanishing-sequence variant).
    """

    bandwidth: float
    kernel: KernelSpec
    cutoff: Union[None, float, Callable[[int], float]] = None

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValidationError("bandwidth must be positive")
        if isinstance(self.cutoff, (int, float)) and not self.cutoff > 0:
            raise ValidationError("a fixed cutoff bound must be positive")

    def pair_radius(self) -> float:
        """Matching radius in state units: truncation radius * bandwidth."""
        return self.kernel.radius * self.bandwidth


@dataclass(frozen=True)
class EstimateResult:
    ratio: float  # self-normalized estimate (0 when the cutoff triggered)
    numerator: float  # normalized g-weighted kernel sum
    denominator: float  # normalized density / set-mass estimate, >= 0
    pairs: int  # matched pairs entering the sums
    cutoff_triggered: bool
    wall_time: float  # seconds, measured; not reproducible


def build_pair_index(fwd: ForwardBatch, cfg: EstimatorConfig) -> Optional[SpatialIndex]:
    """Index the forward endpoints at the matching radius.

    Returns None for untruncated kernels, for which only the full scan is
    available.
    """
    radius = cfg.pair_radius()
    if not np.isfinite(radius):
        return None
    return build_index(fwd.endpoints, radius)


def _check_batches(fwd: ForwardBatch, rev: ReverseBatch) -> None:
    if fwd.grid != rev.grid:
        raise ValidationError("forward and reverse batches use different grids")
    if fwd.dim != rev.dim:
        raise ValidationError("forward and reverse batches have different dimensions")


def _weights(rev: ReverseBatch, use_start_density: bool) -> np.ndarray:
    w = np.exp(rev.log_weight)
    if not use_start_density:
        return w
    dens = rev.start_density
    if dens is None:
        raise ValidationError(
            "set conditioning needs a reverse batch built from a start sampler"
        )
    bad = np.where(~(dens > 0.0))[0]
    if bad.size:
        raise NumericError(
            f"non-positive start density for reverse trajectory {int(bad[0])}"
        )
    return w / dens


def _chronological_parts(fwd: ForwardBatch, rev: ReverseBatch, g: PathFunctional):
    """Precompute the per-trajectory state blocks g consumes."""
    # reverse states at clock T-t_1 > ... > T-t_{L-1} reversed into t_1 < ... < t_{L-1}
    z_part = rev.states[:, :-1, :][:, ::-1, :]
    terminal = rev.starts if g.uses_terminal else None
    return z_part, terminal


def _eval_functional(g, x_part, z_part, terminal):
    states = np.concatenate([x_part, z_part], axis=1)
    if terminal is not None:
        states = np.concatenate([states, terminal[:, None, :]], axis=1)
    if g.vectorized:
        return np.asarray(g.fn(states), dtype=float)
    return np.array([float(g.fn(states[i])) for i in range(states.shape[0])])


def _candidates_for(index, centers, radius):
    """Per-center candidate lists, identical to query_ball output."""
    lists: List[np.ndarray] = []
    if not index.cells:
        empty = np.empty(0, dtype=np.int64)
        return [empty] * centers.shape[0]
    cells = index.cells
    homes = np.floor(centers / index.cell_size).astype(np.int64)
    pts = index.points
    r2 = radius * radius
    for i in range(centers.shape[0]):
        buckets = [cells[c] for c in _neighbor_cells(tuple(homes[i])) if c in cells]
        if not buckets:
            lists.append(np.empty(0, dtype=np.int64))
            continue
        cand = np.concatenate(buckets) if len(buckets) > 1 else buckets[0]
        diff = pts[cand] - centers[i]
        hit = (diff * diff).sum(axis=1) <= r2
        lists.append(np.sort(cand[hit]))
    return lists


def _pair_sums(fwd, rev, g, cfg, index, weights, threads):
    """Per-reverse-trajectory partial sums (numerator, denominator, pairs)."""
    n, m = fwd.n_traj, rev.m_traj
    ends_f = np.ascontiguousarray(fwd.endpoints)
    ends_r = np.ascontiguousarray(rev.endpoints)
    eps = cfg.bandwidth
    radius = cfg.pair_radius()
    if index is not None:
        if index.cell_size != radius:
            raise UsageError(
                f"index cell size {index.cell_size!r} does not match the "
                f"matching radius {radius!r} (truncation radius * bandwidth)"
            )
        if index.n_points != n or not np.array_equal(index.points, ends_f):
            raise UsageError("index was not built over this batch's endpoints")
    elif np.isfinite(radius):
        index = build_index(ends_f, radius)

    numer_m = np.zeros(m)
    denom_m = np.zeros(m)
    pairs_m = np.zeros(m, dtype=np.int64)
    z_part, terminal = _chronological_parts(fwd, rev, g) if g is not None else (None, None)

    def process(lo, hi):
        block = slice(lo, hi)
        if index is not None:
            cand_lists = _candidates_for(index, ends_r[block], radius)
        else:
            full = np.arange(n, dtype=np.int64)
            cand_lists = [full] * (hi - lo)
        lens = np.array([c.size for c in cand_lists], dtype=np.int64)
        pairs_m[block] = lens
        total = int(lens.sum())
        if total == 0:
            return
        cand = np.concatenate(cand_lists)
        seg = np.repeat(np.arange(hi - lo), lens)
        u = (ends_r[lo:hi][seg] - ends_f[cand]) / eps
        kv = kernel_value(cfg.kernel, u)
        kw = kv * weights[lo:hi][seg]
        denom_m[block] = np.bincount(seg, weights=kw, minlength=hi - lo)
        if g is not None:
            gv = _eval_functional(
                g,
                fwd.states[cand],
                z_part[lo:hi][seg],
                terminal[lo:hi][seg] if terminal is not None else None,
            )
            numer_m[block] = np.bincount(seg, weights=gv * kw, minlength=hi - lo)

    spans = [(lo, min(lo + _BLOCK, m)) for lo in range(0, m, _BLOCK)]
    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda span: process(*span), spans))
    else:
        for span in spans:
            process(*span)
    return numer_m, denom_m, pairs_m


def _cutoff_threshold(cfg: EstimatorConfig, n: int) -> Optional[float]:
    if cfg.cutoff is None:
        return None
    if callable(cfg.cutoff):
        return float(cfg.cutoff(n))
    return float(cfg.cutoff) / 2.0


def _finish(numer_m, denom_m, pairs_m, fwd, rev, cfg, t0) -> EstimateResult:
    n, m = fwd.n_traj, rev.m_traj
    norm = cfg.bandwidth ** (-fwd.dim) / (n * m)
    numer_tot = float(np.sum(numer_m))
    denom_tot = float(np.sum(denom_m))
    h_hat = norm * numer_tot
    p_hat = norm * denom_tot
    threshold = _cutoff_threshold(cfg, n)
    triggered = False
    if threshold is not None and not p_hat > threshold:
        triggered = True
        ratio = 0.0
    else:
        if denom_tot == 0.0:
            raise DegenerateDenominatorError(
                f"no matched pairs / degenerate denominator "
                f"(0 of {n}*{m} pairs contributed and the cutoff is disabled)"
            )
        ratio = numer_tot / denom_tot
    return EstimateResult(
        ratio=ratio,
        numerator=h_hat,
        denominator=p_hat,
        pairs=int(pairs_m.sum()),
        cutoff_triggered=triggered,
        wall_time=time.perf_counter() - t0,
    )


def estimate_point(
    fwd: ForwardBatch,
    rev: ReverseBatch,
    g: PathFunctional,
    cfg: EstimatorConfig,
    index: Optional[SpatialIndex] = None,
    threads: int = 1,
) -> EstimateResult:
    """Conditional-expectation estimate for conditioning on a fixed point.

    `index` must be built over fwd's endpoints at cfg.pair_radius()
    (see build_pair_index); pass None to scan all pairs (required for
    untruncated kernels).
    """
    t0 = time.perf_counter()
    _check_batches(fwd, rev)
    if rev.start_density is not None:
        raise ValidationError(
            "reverse batch was built from a start sampler; use estimate_set"
        )
    weights = _weights(rev, use_start_density=False)
    sums = _pair_sums(fwd, rev, g, cfg, index, weights, threads)
    return _finish(*sums, fwd, rev, cfg, t0)


def estimate_set(
    fwd: ForwardBatch,
    rev: ReverseBatch,
    g: PathFunctional,
    cfg: EstimatorConfig,
    index: Optional[SpatialIndex] = None,
    threads: int = 1,
) -> EstimateResult:
    """Conditioning on a set: reverse starts are draws with density phi > 0.

    Identical to estimate_point with every trajectory weight divided by
    its start density, in the numerator, denominator, and cutoff alike.
    """
    t0 = time.perf_counter()
    _check_batches(fwd, rev)
    weights = _weights(rev, use_start_density=True)
    sums = _pair_sums(fwd, rev, g, cfg, index, weights, threads)
    return _finish(*sums, fwd, rev, cfg, t0)


def estimate_density(
    fwd: ForwardBatch,
    rev: ReverseBatch,
    cfg: EstimatorConfig,
    index: Optional[SpatialIndex] = None,
    threads: int = 1,
) -> float:
    """Transition-density estimate (set mass for sampler-started batches).

    Equals the ratio estimator's denominator including normalization;
    zero (not an error) when nothing matches.
    """
    _check_batches(fwd, rev)
    weights = _weights(rev, use_start_density=rev.start_density is not None)
    _, denom_m, _ = _pair_sums(fwd, rev, None, cfg, index, weights, threads)
    n, m = fwd.n_traj, rev.m_traj
    return cfg.bandwidth ** (-fwd.dim) / (n * m) * float(np.sum(denom_m))


def pair_weight(
    g: PathFunctional,
    fwd: ForwardBatch,
    n: int,
    rev: ReverseBatch,
    m: int,
    cfg: EstimatorConfig,
) -> float:
    """The single-pair term Z_nm (with the eps^-dim factor included)."""
    _check_batches(fwd, rev)
    u = (rev.endpoints[m] - fwd.endpoints[n]) / cfg.bandwidth
    kv = float(kernel_value(cfg.kernel, u))
    w = float(_weights(rev, use_start_density=rev.start_density is not None)[m])
    z_part, terminal = _chronological_parts(fwd, rev, g)
    gv = float(
        _eval_functional(
            g,
            fwd.states[n][None],
            z_part[m][None],
            terminal[m][None] if terminal is not None else None,
        )[0]
    )
    return cfg.bandwidth ** (-fwd.dim) * gv * kv * w


# --- convergence studies -----------------------------------------------------


@dataclass(frozen=True)
class StudyRow:
    n_traj: int
    bandwidth: float
    mean: float
    bias2: float
    variance: float
    mse: float
    replications: int  # successful replications
    failures: int


@dataclass(frozen=True)
class StudyResult:
    rows: List[StudyRow]
    slope: Optional[float]  # fitted log-log MSE slope, None if undefined
    reference: float


def fit_loglog_slope(ns: Sequence[float], values: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log(values) against log(ns); None if < 2 points."""
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values > 0
    if keep.sum() < 2:
        return None
    lx = np.log(ns[keep])
    ly = np.log(values[keep])
    lx = lx - lx.mean()
    return float((lx * (ly - ly.mean())).sum() / (lx * lx).sum())


def convergence_study(
    run: Callable[[int, int], EstimateResult],
    bandwidth_of: Callable[[int], float],
    n_list: Sequence[int],
    replications: int,
    seed: int,
    reference: Optional[float] = None,
    reference_n: Optional[int] = None,
    relative: bool = False,
) -> StudyResult:
    """Replicated error study of `run(n, seed) -> EstimateResult`.

    Replication r uses the sub-seed derived from (seed, r). When no
    reference value is supplied, a single self-reference run at
    reference_n (default 4 * max(n_list)) provides it. With relative=True
    the bias2/variance/mse columns are normalized by reference**2.

    Replication errors are recorded per row (failures column); a batch
    size where every replication fails aborts the study.
    """
    if not n_list:
        raise ValidationError("n_list must not be empty")
    if replications < 1:
        raise ValidationError("replications must be >= 1")
    if reference is None:
        n_ref = reference_n if reference_n is not None else 4 * max(n_list)
        reference = run(n_ref, derive_seed(seed, "ref", 0)).ratio
    ref = float(reference)
    scale = ref * ref if relative else 1.0
    if relative and scale == 0.0:
        raise ValidationError("relative study needs a nonzero reference")

    rows: List[StudyRow] = []
    for n in n_list:
        estimates = []
        failures = 0
        last_error: Optional[FrmcError] = None
        for r in range(replications):
            try:
                estimates.append(run(n, derive_seed(seed, "rep", r)).ratio)
            except FrmcError as exc:
                failures += 1
                last_error = exc
        if not estimates:
            raise FrmcError(
                f"all {replications} replications failed at N={n}: {last_error}"
            )
        est = np.asarray(estimates)
        mean = float(est.mean())
        bias2 = (mean - ref) ** 2
        variance = float(((est - mean) ** 2).mean())
        mse = float(((est - ref) ** 2).mean())
        rows.append(
            StudyRow(
                n_traj=int(n),
                bandwidth=float(bandwidth_of(n)),
                mean=mean,
                bias2=bias2 / scale,
                variance=variance / scale,
                mse=mse / scale,
                replications=len(estimates),
                failures=failures,
            )
        )
    slope = fit_loglog_slope([row.n_traj for row in rows], [row.mse for row in rows])
    return StudyResult(rows=rows, slope=slope, reference=ref)
