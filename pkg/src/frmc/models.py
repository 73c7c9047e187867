"""Forward SDE models and their reverse-process coefficients.

A model is the pair (drift a, diffusion sigma) of

    dX(s) = a(s, X) ds + sigma(s, X) dW(s),   X in R^dim,  W in R^noise_dim.

From it we derive the companion process (Y, weight) run forward on [0, T]
from the conditioning state, with

    alpha_i(s, y) = sum_j d b_ij / d y_j (T - s, y) - a_i(T - s, y),
    sigma_rev(s, y) = sigma(T - s, y),
    c(s, y) = 1/2 sum_ij d^2 b_ij / (d y_i d y_j)(T - s, y)
              - sum_i d a_i / d y_i (T - s, y),

where b = sigma sigma^T. The exponential weight accumulates exp(int c).
Time is always composed through T - s, also for autonomous models (where
the composition is a no-op).

Callbacks are vectorized: drift(t, x) maps (..., dim) -> (..., dim) and
diffusion(t, x) maps (..., dim) -> (..., dim, noise_dim). All callbacks
must be pure; they are invoked concurrently without synchronization.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, NumericError, ValidationError

_EPS = np.finfo(float).eps
#: default relative step for first-order central differences
FD_STEP_FIRST = _EPS ** (1.0 / 3.0)
#: default relative step for second-order stencils (larger: the second
#: difference divides by h^2, so eps**(1/3) would leave ~1e-5 rounding noise)
FD_STEP_SECOND = _EPS ** 0.25


@dataclass(frozen=True)
class DerivativeBundle:
    """Derivatives of b = sigma sigma^T and of the drift divergence.

    db[..., i, j]  = d b_ij / d x_j
    d2b[..., i, j] = d^2 b_ij / (d x_i d x_j)
    da[..., i]     = d a_i / d x_i
    """

    db: np.ndarray
    d2b: np.ndarray
    da: np.ndarray


@dataclass(frozen=True)
class ModelSpec:
    """A forward SDE plus optional analytic derivatives and exact samplers.

    `exact_forward` / `exact_reverse`, when present, are one-step exact
    transition samplers `step(t, x, dt, z) -> x_next` with z standard
    normal of shape (..., noise_dim). `constant_weight_rate` is the value
    of c when it is state-independent (exact reverse weighting uses it).
    """

    dim: int
    noise_dim: int
    drift: Callable[[float, np.ndarray], np.ndarray]
    diffusion: Callable[[float, np.ndarray], np.ndarray]
    derivatives: Optional[Callable[[float, np.ndarray], DerivativeBundle]] = None
    autonomous: bool = True
    name: str = "custom"
    exact_forward: Optional[Callable] = None
    exact_reverse: Optional[Callable] = None
    constant_weight_rate: Optional[float] = None
    allow_finite_difference: bool = True

    def __post_init__(self):
        if self.dim < 1 or self.noise_dim < 1:
            raise ValidationError("model dimensions must be positive")

    def covariance(self, t: float, x: np.ndarray) -> np.ndarray:
        """b = sigma sigma^T, shape (..., dim, dim)."""
        s = np.asarray(self.diffusion(t, x))
        return np.einsum("...ik,...jk->...ij", s, s)

    def derivative_bundle(self, t: float, x: np.ndarray) -> DerivativeBundle:
        """Analytic bundle if supplied, else central finite differences."""
        if self.derivatives is not None:
            return self.derivatives(t, x)
        if not self.allow_finite_difference:
            raise ConfigurationError(
                f"model {self.name!r} has no derivative supplier and "
                "finite differences are disabled"
            )
        return fd_derivatives(self, t, x)


def fd_derivatives(
    model: ModelSpec, t: float, x: np.ndarray, h_fd: float | None = None
) -> DerivativeBundle:
    """Finite-difference derivative bundle at (t, x); x may be batched.

    Central differences; first-order steps default to eps**(1/3) *
    max(1, |x_i|) per coordinate and the second-order stencils to
    eps**(1/4) * max(1, |x_i|). A positive `h_fd` overrides both.
    """
    x = np.asarray(x, dtype=float)
    if h_fd is not None and not h_fd > 0:
        raise ValidationError("h_fd must be positive")
    d = model.dim
    if x.shape[-1] != d:
        raise ValidationError(f"state has dimension {x.shape[-1]}, expected {d}")
    scale = np.maximum(1.0, np.abs(x))
    h1 = np.full_like(x, h_fd) if h_fd is not None else FD_STEP_FIRST * scale
    h2 = np.full_like(x, h_fd) if h_fd is not None else FD_STEP_SECOND * scale

    def cov(xs):
        return model.covariance(t, xs)

    batch = x.shape[:-1]
    db = np.empty(batch + (d, d))
    d2b = np.empty(batch + (d, d))
    da = np.empty(batch + (d,))
    b0 = cov(x)

    for j in range(d):
        ej = np.zeros(d)
        ej[j] = 1.0
        hj1 = h1[..., j : j + 1]
        hj2 = h2[..., j : j + 1]
        bp = cov(x + hj1 * ej)
        bm = cov(x - hj1 * ej)
        db[..., :, j] = (bp[..., :, j] - bm[..., :, j]) / (2.0 * hj1)
        ap = model.drift(t, x + hj1 * ej)
        am = model.drift(t, x - hj1 * ej)
        da[..., j] = (ap[..., j] - am[..., j]) / (2.0 * hj1[..., 0])
        bp2 = cov(x + hj2 * ej)
        bm2 = cov(x - hj2 * ej)
        d2b[..., j, j] = (bp2[..., j, j] - 2.0 * b0[..., j, j] + bm2[..., j, j]) / (
            hj2[..., 0] ** 2
        )
        for i in range(d):
            if i == j:
                continue
            ei = np.zeros(d)
            ei[i] = 1.0
            hi2 = h2[..., i : i + 1]
            bpp = cov(x + hi2 * ei + hj2 * ej)
            bpm = cov(x + hi2 * ei - hj2 * ej)
            bmp = cov(x - hi2 * ei + hj2 * ej)
            bmm = cov(x - hi2 * ei - hj2 * ej)
            d2b[..., i, j] = (
                bpp[..., i, j] - bpm[..., i, j] - bmp[..., i, j] + bmm[..., i, j]
            ) / (4.0 * hi2[..., 0] * hj2[..., 0])

    bundle = DerivativeBundle(db=db, d2b=d2b, da=da)
    for arr in (bundle.db, bundle.d2b, bundle.da):
        if not np.isfinite(arr).all():
            raise NumericError(f"non-finite finite-difference stencil at t={t}, x={x}")
    return bundle


@dataclass(frozen=True)
class ReverseSpec:
    """Coefficients of the reverse system on [0, horizon].

    drift/diffusion/weight_rate take (s, y) with s the reverse clock; the
    composition through horizon - s is already applied.
    """

    horizon: float
    dim: int
    noise_dim: int
    drift: Callable[[float, np.ndarray], np.ndarray]
    diffusion: Callable[[float, np.ndarray], np.ndarray]
    weight_rate: Callable[[float, np.ndarray], np.ndarray]
    exact_step: Optional[Callable] = None
    constant_weight_rate: Optional[float] = None
    name: str = "reverse"


def reverse_coefficients(model: ModelSpec, horizon: float) -> ReverseSpec:
    """Build the reverse-process coefficients for a terminal time T > 0."""
    if not horizon > 0:
        raise ValidationError("horizon must be positive")
    if model.derivatives is None:
        if not model.allow_finite_difference:
            raise ConfigurationError(
                f"model {model.name!r} has no derivative supplier"
            )
        warnings.warn(
            f"model {model.name!r}: no analytic derivatives, reverse "
            "coefficients use finite differences",
            stacklevel=2,
        )
    T = float(horizon)

    def _bundle(s, y):
        try:
            return model.derivative_bundle(T - s, y)
        except NumericError as exc:
            raise NumericError(f"non-finite derivative at s={s}, y={y}") from exc

    def rev_drift(s, y):
        bundle = _bundle(s, y)
        out = bundle.db.sum(axis=-1) - model.drift(T - s, y)
        if not np.isfinite(out).all():
            raise NumericError(f"non-finite reverse drift at s={s}, y={y}")
        return out

    def rev_diffusion(s, y):
        return model.diffusion(T - s, y)

    def weight_rate(s, y):
        bundle = _bundle(s, y)
        out = 0.5 * bundle.d2b.sum(axis=(-2, -1)) - bundle.da.sum(axis=-1)
        if not np.isfinite(out).all():
            raise NumericError(f"non-finite weight rate at s={s}, y={y}")
        return out

    return ReverseSpec(
        horizon=T,
        dim=model.dim,
        noise_dim=model.noise_dim,
        drift=rev_drift,
        diffusion=rev_diffusion,
        weight_rate=weight_rate,
        exact_step=model.exact_reverse,
        constant_weight_rate=model.constant_weight_rate,
        name=f"reverse({model.name})",
    )


def as_model(rev: ReverseSpec) -> ModelSpec:
    """View a reverse system as an ordinary forward SDE (it is one)."""
    return ModelSpec(
        dim=rev.dim,
        noise_dim=rev.noise_dim,
        drift=rev.drift,
        diffusion=rev.diffusion,
        autonomous=False,
        name=rev.name,
    )


# --- built-in models --------------------------------------------------------


def brownian(dim: int = 1) -> ModelSpec:
    """d-dimensional standard Brownian motion (zero drift, identity noise)."""
    if dim < 1:
        raise ValidationError("dim must be >= 1")
    eye = np.eye(dim)

    def drift(t, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def diffusion(t, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(eye, x.shape[:-1] + (dim, dim)).copy()

    def derivatives(t, x):
        x = np.asarray(x, dtype=float)
        batch = x.shape[:-1]
        z = np.zeros(batch + (dim, dim))
        return DerivativeBundle(db=z, d2b=z.copy(), da=np.zeros(batch + (dim,)))

    def exact_step(t, x, dt, z):
        return x + np.sqrt(dt) * z

    return ModelSpec(
        dim=dim,
        noise_dim=dim,
        drift=drift,
        diffusion=diffusion,
        derivatives=derivatives,
        name=f"bm{dim}",
        exact_forward=exact_step,
        exact_reverse=exact_step,
        constant_weight_rate=0.0,
    )


def ornstein_uhlenbeck(rate: float) -> ModelSpec:
    """1-d mean-reverting model dX = -rate X dt + dW, rate > 0."""
    if not rate > 0:
        raise ValidationError("rate must be positive")
    a = float(rate)

    def drift(t, x):
        return -a * np.asarray(x, dtype=float)

    def diffusion(t, x):
        x = np.asarray(x, dtype=float)
        return np.ones(x.shape[:-1] + (1, 1))

    def derivatives(t, x):
        x = np.asarray(x, dtype=float)
        batch = x.shape[:-1]
        z = np.zeros(batch + (1, 1))
        return DerivativeBundle(db=z, d2b=z.copy(), da=np.full(batch + (1,), -a))

    def exact_forward(t, x, dt, z):
        decay = np.exp(-a * dt)
        sd = np.sqrt((1.0 - decay * decay) / (2.0 * a))
        return decay * x + sd * z

    def exact_reverse(t, y, dt, z):
        # reverse drift is +rate y; transition is the linear-SDE solution
        grow = np.exp(a * dt)
        sd = np.sqrt((grow * grow - 1.0) / (2.0 * a))
        return grow * y + sd * z

    return ModelSpec(
        dim=1,
        noise_dim=1,
        drift=drift,
        diffusion=diffusion,
        derivatives=derivatives,
        name=f"ou({a})",
        exact_forward=exact_forward,
        exact_reverse=exact_reverse,
        constant_weight_rate=a,
    )


def heston(
    mu: float = 0.05,
    gamma: float = -0.15,
    beta: float = -0.045,
    xi: float = 0.3,
    rho: float = -0.7,
) -> ModelSpec:
    """Stock-and-variance model; x = (price, variance).

    dS = mu S dt + sqrt(v) S dB1
    dv = (gamma v + beta) dt + xi sqrt(v) (rho dB1 + sqrt(1-rho^2) dB2)

    The square roots evaluate sqrt(max(v, 0)) (full truncation); the
    derivative bundle is consistent with that truncation, so the reverse
    coefficients match the un-truncated closed forms wherever v > 0.
    """
    if not (-1.0 < rho < 1.0):
        raise ValidationError("rho must lie in (-1, 1)")
    rho_c = np.sqrt(1.0 - rho * rho)

    def drift(t, x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        out[..., 0] = mu * x[..., 0]
        out[..., 1] = gamma * x[..., 1] + beta
        return out

    def diffusion(t, x):
        x = np.asarray(x, dtype=float)
        s, v = x[..., 0], x[..., 1]
        root = np.sqrt(np.maximum(v, 0.0))
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = root * s
        out[..., 1, 0] = xi * root * rho
        out[..., 1, 1] = xi * root * rho_c
        return out

    def derivatives(t, x):
        x = np.asarray(x, dtype=float)
        s, v = x[..., 0], x[..., 1]
        vp = np.maximum(v, 0.0)
        live = (v > 0.0).astype(float)
        batch = x.shape[:-1]
        db = np.empty(batch + (2, 2))
        db[..., 0, 0] = 2.0 * vp * s
        db[..., 0, 1] = rho * xi * s * live
        db[..., 1, 0] = rho * xi * vp
        db[..., 1, 1] = xi * xi * live
        d2b = np.empty(batch + (2, 2))
        d2b[..., 0, 0] = 2.0 * vp
        d2b[..., 0, 1] = rho * xi * live
        d2b[..., 1, 0] = rho * xi * live
        d2b[..., 1, 1] = 0.0
        da = np.empty(batch + (2,))
        da[..., 0] = mu
        da[..., 1] = gamma
        return DerivativeBundle(db=db, d2b=d2b, da=da)

    return ModelSpec(
        dim=2,
        noise_dim=2,
        drift=drift,
        diffusion=diffusion,
        derivatives=derivatives,
        name="heston",
    )


#: constructors accepted in config files, keyed by model identifier
BUILTIN_MODELS = {
    "bm": lambda d=1, **kw: brownian(dim=int(d)),
    "ou": lambda alpha, **kw: ornstein_uhlenbeck(rate=float(alpha)),
    "heston": lambda mu=0.05, gamma=-0.15, beta=-0.045, xi=0.3, rho=-0.7, **kw: heston(
        mu=float(mu), gamma=float(gamma), beta=float(beta), xi=float(xi), rho=float(rho)
    ),
}
