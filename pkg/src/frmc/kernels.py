"""Smoothing kernels, truncation radii, and bandwidth schedules.

Both shipped families integrate to one and are symmetric (hence have zero
first moment). Truncation keeps values below a threshold out of the sums
without renormalizing; the deficit is absorbed by the self-normalizing
ratio downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

GAUSSIAN = "gaussian"
EPANECHNIKOV = "epanechnikov"


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family instantiated for one dimension and truncation radius.

    radius is in scaled units (the kernel argument's norm); np.inf means
    untruncated, which disables the fast neighbor-search path.
    """

    family: str
    dim: int
    radius: float

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValidationError(
                f"unknown kernel family {self.family!r}; "
                f"registered: {sorted(_FAMILIES)}"
            )
        if self.dim < 1:
            raise ValidationError("dim must be >= 1")
        if not self.radius > 0:
            raise ValidationError("radius must be positive")


def _gaussian_value(u: np.ndarray, dim: int) -> np.ndarray:
    norm2 = (u * u).sum(axis=-1)
    return (2.0 * np.pi) ** (-0.5 * dim) * np.exp(-0.5 * norm2)


def _gaussian_peak(dim: int) -> float:
    return (2.0 * np.pi) ** (-0.5 * dim)


def _gaussian_radius(dim: int, eta: float) -> float:
    return float(np.sqrt(-2.0 * np.log(eta * (2.0 * np.pi) ** (0.5 * dim))))


def _epanechnikov_value(u: np.ndarray, dim: int) -> np.ndarray:
    inside = np.clip(1.0 - u * u, 0.0, None)
    return (0.75**dim) * inside.prod(axis=-1)


def _epanechnikov_peak(dim: int) -> float:
    return 0.75**dim


def _epanechnikov_radius(dim: int, eta: float) -> float:
    # support is the unit cube; the covering ball has radius sqrt(dim)
    return float(np.sqrt(dim))


#: registry: family -> (value, peak, radius-for-threshold); extension hook
#: for higher-order kernels (none shipped).
_FAMILIES = {
    GAUSSIAN: (_gaussian_value, _gaussian_peak, _gaussian_radius),
    EPANECHNIKOV: (_epanechnikov_value, _epanechnikov_peak, _epanechnikov_radius),
}


def register_family(name: str, value_fn, peak_fn, radius_fn) -> None:
    """Register an additional kernel family (e.g. a higher-order kernel)."""
    _FAMILIES[name] = (value_fn, peak_fn, radius_fn)


def kernel_value(kernel: KernelSpec, u) -> np.ndarray:
    """K(u) >= 0, zero beyond the truncation radius; u has shape (..., dim)."""
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != kernel.dim:
        raise ValidationError(
            f"kernel argument has dimension {u.shape[-1]}, expected {kernel.dim}"
        )
    value_fn = _FAMILIES[kernel.family][0]
    out = value_fn(u, kernel.dim)
    if np.isfinite(kernel.radius):
        out = np.where((u * u).sum(axis=-1) <= kernel.radius**2, out, 0.0)
    return out


def truncation_radius(family: str, dim: int, eta: float) -> float:
    """Radius r with K(v) < eta for |v| > r.

    For the Gaussian family r = sqrt(-2 ln(eta (2 pi)^{d/2})); the compact
    product family returns its support radius sqrt(d) independent of eta.
    """
    if family not in _FAMILIES:
        raise ValidationError(f"unknown kernel family {family!r}")
    _, peak_fn, radius_fn = _FAMILIES[family]
    peak = peak_fn(dim)
    if not 0.0 < eta < peak:
        raise ValidationError(
            f"eta must lie in (0, K(0)) = (0, {peak!r}); got {eta!r}"
        )
    return radius_fn(dim, eta)


def truncated(family: str, dim: int, eta: float) -> KernelSpec:
    """KernelSpec with the eta-based truncation radius applied."""
    return KernelSpec(family=family, dim=dim, radius=truncation_radius(family, dim, eta))


def bandwidth(n_traj: int, dim: int, scale: float = 1.0, rule="auto") -> float:
    """Bandwidth schedule: scale * N^(-exponent).

    For dim <= 4 the exponent is a user alpha in [1/4, 1/dim] (rule=alpha)
    or 0.4 under rule="auto" (the experimentally sensible default). For
    dim > 4, rule="auto" uses the 2/(4+dim) exponent that balances bias
    against the kernel variance blow-up.
    """
    if n_traj < 1:
        raise ValidationError("n_traj must be >= 1")
    if not scale > 0:
        raise ValidationError("scale must be positive")
    if rule == "auto":
        exponent = 0.4 if dim <= 4 else 2.0 / (4.0 + dim)
    else:
        alpha = float(rule)
        if dim > 4:
            raise ValidationError(
                "explicit alpha rules apply only for dim <= 4; use rule='auto'"
            )
        if not (0.25 <= alpha <= 1.0 / dim):
            raise ValidationError(
                f"alpha must lie in [1/4, 1/dim] = [0.25, {1.0 / dim!r}]; got {alpha!r}"
            )
        exponent = alpha
    return scale * float(n_traj) ** (-exponent)
