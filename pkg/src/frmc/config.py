"""Config-file parsing and run assembly for the command line.

Files are INI-style with sections [model], [grid], [kernel], [estimator],
[study], and [run]. Every key has a default except the model name and the
seed. Example:

    [model]
    name = ou
    alpha = 1.0

    [grid]
    l = 10
    K = 5
    T = 1.0

    [kernel]
    kernel = gaussian
    eta = 1e-3

    [estimator]
    N = 4096
    bandwidth.C = 1.0
    bandwidth.alpha = 0.4
    cutoff = disabled
    g = one
    y = 0.0

    [study]
    N_list = 256,512,1024
    R = 20

    [run]
    seed = 7
    threads = 0
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import ConfigurationError, ValidationError
from .estimator import (
    EstimateResult,
    EstimatorConfig,
    PathFunctional,
    build_pair_index,
    constant_one,
    estimate_point,
    estimate_set,
)
from .experiments import (
    mean_square_functional,
    realized_variance_functional,
)
from .grids import TimeGrid, make_grid, uniform_grid
from .kernels import bandwidth, truncated
from .models import BUILTIN_MODELS, ModelSpec, reverse_coefficients
from .paths import HyperplaneSampler, simulate_forward, simulate_reverse

FUNCTIONALS = {
    "one": constant_one,
    "mean_square": mean_square_functional,
    "realized_variance": realized_variance_functional,
}


def _floats(text: str) -> list:
    return [float(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]


def _ints(text: str) -> list:
    return [int(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]


@dataclass
class RunSpec:
    """A fully resolved run: model, grid, conditioning, and estimator knobs."""

    model: ModelSpec
    grid: TimeGrid
    x0: np.ndarray
    start: Union[np.ndarray, HyperplaneSampler]
    scheme: str
    substeps: int
    kernel_family: str
    eta: float
    n_traj: int
    m_traj: int
    epsilon: Optional[float]
    bw_scale: float
    bw_rule: Union[str, float]
    cutoff: Optional[float]
    g: PathFunctional
    n_list: list = field(default_factory=list)
    replications: int = 20
    reference: Optional[float] = None  # None means self-reference
    reference_n: Optional[int] = None
    relative: bool = False

    def bandwidth_for(self, n_traj: int) -> float:
        if self.epsilon is not None:
            return self.epsilon
        return bandwidth(n_traj, self.model.dim, self.bw_scale, self.bw_rule)

    def estimate(self, n_traj: int, seed: int, threads: int = 1) -> EstimateResult:
        m_traj = self.m_traj if n_traj == self.n_traj else n_traj
        rev = reverse_coefficients(self.model, self.grid.horizon)
        fwd = simulate_forward(
            self.model, self.x0, self.grid, self.scheme, seed, n_traj, self.substeps
        )
        rbatch = simulate_reverse(
            rev, self.start, self.grid, self.scheme, seed, m_traj, self.substeps
        )
        cfg = EstimatorConfig(
            bandwidth=self.bandwidth_for(n_traj),
            kernel=truncated(self.kernel_family, self.model.dim, self.eta),
            cutoff=self.cutoff,
        )
        index = build_pair_index(fwd, cfg)
        if isinstance(self.start, HyperplaneSampler):
            return estimate_set(fwd, rbatch, self.g, cfg, index, threads)
        return estimate_point(fwd, rbatch, self.g, cfg, index, threads)


def load_config(path: str) -> configparser.ConfigParser:
    if not os.path.exists(path):
        raise ConfigurationError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    parser.read(path)
    return parser


def build_run(parser: configparser.ConfigParser) -> RunSpec:
    """Resolve a parsed config into a RunSpec; errors name the bad key."""
    if not parser.has_section("model") or not parser.has_option("model", "name"):
        raise ConfigurationError("missing required key: [model] name")
    name = parser.get("model", "name")
    if name not in BUILTIN_MODELS:
        raise ConfigurationError(
            f"[model] name={name!r} is not a built-in ({sorted(BUILTIN_MODELS)})"
        )
    params = {k: v for k, v in parser.items("model") if k != "name"}
    try:
        model = BUILTIN_MODELS[name](**params)
    except TypeError as exc:
        raise ConfigurationError(f"[model] bad parameters for {name!r}: {exc}") from exc

    sec = parser["grid"] if parser.has_section("grid") else {}
    if "s_times" in sec or "t_times" in sec:
        if not ("s_times" in sec and "t_times" in sec):
            raise ConfigurationError("[grid] s_times and t_times must both be given")
        grid = make_grid(_floats(sec["s_times"]), _floats(sec["t_times"]))
    else:
        segments = int(sec.get("l", 10))
        horizon = float(sec.get("t", 1.0))
        if "k" in sec:
            n_pre = int(sec["k"])
        elif "tstar" in sec:
            n_pre = round(float(sec["tstar"]) / horizon * segments)
        else:
            n_pre = max(1, segments // 2)
        grid = uniform_grid(segments, n_pre, horizon)

    ksec = parser["kernel"] if parser.has_section("kernel") else {}
    kernel_family = ksec.get("kernel", "gaussian")
    eta = float(ksec.get("eta", 1e-3))

    esec = parser["estimator"] if parser.has_section("estimator") else {}
    if "n" not in esec:
        raise ConfigurationError("missing required key: [estimator] N")
    n_traj = int(esec["n"])
    if n_traj < 1:
        raise ValidationError("[estimator] N must be >= 1")
    m_traj = int(esec.get("m", n_traj))
    if m_traj < 1:
        raise ValidationError("[estimator] M must be >= 1")
    epsilon = float(esec["epsilon"]) if "epsilon" in esec else None
    bw_scale = float(esec.get("bandwidth.c", 1.0))
    if "bandwidth.alpha" in esec:
        bw_rule: Union[str, float] = float(esec["bandwidth.alpha"])
    else:
        bw_rule = "auto"
    cutoff_raw = esec.get("cutoff", "disabled")
    cutoff = None if cutoff_raw in ("disabled", "none", "") else float(cutoff_raw)
    g_name = esec.get("g", "one")
    if g_name not in FUNCTIONALS:
        raise ConfigurationError(
            f"[estimator] g={g_name!r} unknown ({sorted(FUNCTIONALS)})"
        )
    g = FUNCTIONALS[g_name]()
    x0 = np.asarray(_floats(esec.get("x0", ",".join(["0"] * model.dim))))
    if x0.shape != (model.dim,):
        raise ConfigurationError("[estimator] x0 has the wrong dimension")
    condition = esec.get("condition", "point")
    if condition == "point":
        start: Union[np.ndarray, HyperplaneSampler] = np.asarray(
            _floats(esec.get("y", ",".join(["0"] * model.dim)))
        )
        if start.shape != (model.dim,):
            raise ConfigurationError("[estimator] y has the wrong dimension")
    elif condition == "hyperplane":
        fixed = _floats(esec.get("fixed", ""))
        start = HyperplaneSampler(
            dim=model.dim, fixed_values=fixed, tails=esec.get("phi", "normal")
        )
    else:
        raise ConfigurationError(
            f"[estimator] condition={condition!r} must be point or hyperplane"
        )
    scheme = esec.get("scheme", "auto")
    if scheme == "auto":
        scheme = "exact" if model.exact_forward is not None else "euler"
    substeps = int(esec.get("substeps", 1))

    ssec = parser["study"] if parser.has_section("study") else {}
    n_list = _ints(ssec.get("n_list", ""))
    replications = int(ssec.get("r", 20))
    ref_raw = ssec.get("reference", "self")
    reference = None if ref_raw == "self" else float(ref_raw)
    reference_n = int(ssec["reference_n"]) if "reference_n" in ssec else None
    relative = str(ssec.get("relative", "false")).lower() in ("1", "true", "yes")

    return RunSpec(
        model=model,
        grid=grid,
        x0=x0,
        start=start,
        scheme=scheme,
        substeps=substeps,
        kernel_family=kernel_family,
        eta=eta,
        n_traj=n_traj,
        m_traj=m_traj,
        epsilon=epsilon,
        bw_scale=bw_scale,
        bw_rule=bw_rule,
        cutoff=cutoff,
        g=g,
        n_list=n_list,
        replications=replications,
        reference=reference,
        reference_n=reference_n,
        relative=relative,
    )
