"""Command-line front end.

Subcommands:
  estimate       one estimation run -> one CSV row
  converge       replicated error study over a list of batch sizes -> CSV
  oracle         print a closed-form reference value
  bench-matcher  neighbor-search build/query timings

Output rows are byte-reproducible for a given (config, seed) and thread
count-independent, except the wall_ms column of `estimate`, which reports
measured time. All numbers use repr formatting ('.' decimal separator, no
locale dependence).
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import experiments
from .config import build_run, load_config
from .errors import FrmcError, ConfigurationError
from .estimator import StudyResult, convergence_study
from .matcher import build_index, query_ball
from .oracles import (
    OUParams,
    bridge_mean_square_truth,
    ou_numerator_mean,
    ou_numerator_variance,
    transition_density,
)
from .streams import standard_normals

ESTIMATE_HEADER = "N,M,epsilon,seed,H_hat,h_hat,p_hat,pairs,cutoff,wall_ms"
CONVERGE_HEADER = "N,epsilon,mean,bias2,variance,mse,replications"


def _fmt(x) -> str:
    return repr(float(x))


def _emit(text: str, out_path) -> None:
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)


def _resolve_threads(threads: int) -> int:
    if threads < 0:
        raise ConfigurationError("threads must be >= 0")
    return threads if threads > 0 else (os.cpu_count() or 1)


def _estimate_row(n, m, epsilon, seed, res) -> str:
    wall_ms = int(round(res.wall_time * 1000.0))
    return ",".join(
        [
            str(n),
            str(m),
            _fmt(epsilon),
            str(seed),
            _fmt(res.ratio),
            _fmt(res.numerator),
            _fmt(res.denominator),
            str(res.pairs),
            str(int(res.cutoff_triggered)),
            str(wall_ms),
        ]
    )


def _converge_text(result: StudyResult) -> str:
    lines = [CONVERGE_HEADER]
    for row in result.rows:
        lines.append(
            ",".join(
                [
                    str(row.n_traj),
                    _fmt(row.bandwidth),
                    _fmt(row.mean),
                    _fmt(row.bias2),
                    _fmt(row.variance),
                    _fmt(row.mse),
                    str(row.replications),
                ]
            )
        )
        if row.failures:
            lines.append(f"# failures at N={row.n_traj}: {row.failures}")
    slope = "na" if result.slope is None else _fmt(result.slope)
    lines.append(f"# slope={slope}")
    lines.append(f"# reference={_fmt(result.reference)}")
    return "\n".join(lines) + "\n"


def _preset_runner(args, threads):
    """(run, bandwidth_of, n, m, relative) for a named preset."""
    if args.preset == "example-bb":
        segments = args.l
        if args.tstar is not None:
            n_pre = round(args.tstar * segments)
        else:
            n_pre = args.K if args.K is not None else 4
        if not 1 <= n_pre <= segments - 1:
            raise ConfigurationError("tstar/K outside the grid")

        def run(n, seed, m=None):
            return experiments.bb_estimate(
                n, seed, segments, n_pre, m_traj=m, threads=threads
            )

        return run, experiments.bb_bandwidth, False
    if args.preset == "example-heston":
        preset = experiments.HestonPreset()
        if args.tstar is not None:
            n_pre = round(args.tstar / preset.horizon * preset.segments)
        elif args.K is not None:
            n_pre = args.K
        else:
            n_pre = preset.n_pre
        if not 1 <= n_pre <= preset.segments - 1:
            raise ConfigurationError("tstar/K outside the grid")
        preset = experiments.HestonPreset(n_pre=n_pre)

        def run(n, seed, m=None):
            return experiments.heston_estimate(n, seed, preset, m_traj=m, threads=threads)

        return run, experiments.heston_bandwidth, True
    raise ConfigurationError(f"unknown preset {args.preset!r}")


def _require_seed(args, parser=None) -> int:
    if args.seed is not None:
        return args.seed
    if getattr(args, "config", None) and parser is not None:
        if parser.has_section("run") and parser.has_option("run", "seed"):
            return parser.getint("run", "seed")
    raise ConfigurationError("missing required key: seed (use --seed)")


def cmd_estimate(args) -> int:
    threads = _resolve_threads(args.threads)
    if args.config:
        parser = load_config(args.config)
        seed = _require_seed(args, parser)
        spec = build_run(parser)
        n = args.N if args.N is not None else spec.n_traj
        if n < 1:
            raise ConfigurationError("[estimator] N must be >= 1")
        m = args.M if args.M is not None else (spec.m_traj if n == spec.n_traj else n)
        spec.n_traj, spec.m_traj = n, m
        res = spec.estimate(n, seed, threads)
        eps = spec.bandwidth_for(n)
    elif args.preset:
        seed = _require_seed(args)
        if args.N is None:
            raise ConfigurationError("missing required key: N (use --N)")
        if args.N < 1:
            raise ConfigurationError("N must be >= 1")
        run, bandwidth_of, _ = _preset_runner(args, threads)
        n, m = args.N, args.M if args.M is not None else args.N
        res = run(n, seed, m)
        eps = bandwidth_of(n)
    else:
        raise ConfigurationError("estimate needs --config or --preset")
    _emit(ESTIMATE_HEADER + "\n" + _estimate_row(n, m, eps, seed, res) + "\n", args.out)
    return 0


def cmd_converge(args) -> int:
    threads = _resolve_threads(args.threads)
    if args.config:
        parser = load_config(args.config)
        seed = _require_seed(args, parser)
        spec = build_run(parser)
        n_list = args.N_list or spec.n_list
        replications = args.R if args.R is not None else spec.replications
        run = lambda n, s: spec.estimate(n, s, threads)
        bandwidth_of = spec.bandwidth_for
        reference, reference_n = spec.reference, spec.reference_n
        relative = spec.relative
    elif args.preset:
        seed = _require_seed(args)
        n_list = args.N_list
        replications = args.R if args.R is not None else 20
        preset_run, bandwidth_of, relative = _preset_runner(args, threads)
        run = lambda n, s: preset_run(n, s)
        reference = args.reference
        reference_n = args.reference_N
        if args.preset == "example-bb" and reference is None:
            reference = bridge_mean_square_truth(args.l)
    else:
        raise ConfigurationError("converge needs --config or --preset")
    if not n_list:
        raise ConfigurationError("missing required key: N_list (use --N-list)")
    if sorted(n_list) != list(n_list):
        raise ConfigurationError("N_list must be ascending")
    if replications < 2:
        raise ConfigurationError("R must be >= 2")
    result = convergence_study(
        run,
        bandwidth_of,
        n_list,
        replications,
        seed,
        reference=reference,
        reference_n=reference_n,
        relative=relative,
    )
    _emit(_converge_text(result), args.out)
    return 0


def cmd_oracle(args) -> int:
    if args.name == "bb-truth":
        value = bridge_mean_square_truth(args.l)
    elif args.name in ("ou-mean", "ou-var"):
        params = OUParams(
            rate=args.alpha,
            x0=args.x,
            y=args.y,
            horizon=args.T,
            t_star=args.tstar,
            bandwidth=args.eps,
            n_traj=args.N,
        )
        value = ou_numerator_mean(params) if args.name == "ou-mean" else ou_numerator_variance(params)
    elif args.name == "transition-density":
        value = transition_density(args.model, args.t, args.x, args.s, args.y, args.alpha)
    else:
        raise ConfigurationError(f"unknown oracle {args.name!r}")
    _emit(_fmt(value) + "\n", args.out)
    return 0


def cmd_bench_matcher(args) -> int:
    points = standard_normals(args.seed, "bench-pts", 0, (args.points, args.dim))
    centers = standard_normals(args.seed, "bench-qry", 0, (args.queries, args.dim))
    t0 = time.perf_counter()
    index = build_index(points, args.radius)
    build_s = time.perf_counter() - t0
    t0 = time.perf_counter()
    hits = 0
    for c in centers:
        hits += query_ball(index, c, args.radius).size
    query_s = time.perf_counter() - t0
    sys.stdout.write(
        f"points={args.points} dim={args.dim} radius={args.radius} "
        f"occupied_cells={len(index.cells)}\n"
        f"build_ms={build_s * 1000.0:.3f}\n"
        f"queries={args.queries} total_hits={hits} "
        f"query_us_each={query_s / max(args.queries, 1) * 1e6:.3f}\n"
    )
    return 0


def _int_list(text: str):
    return [int(tok) for tok in text.split(",") if tok.strip()]


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="frmc", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file")
    common.add_argument("--preset", choices=["example-bb", "example-heston"])
    common.add_argument("--seed", type=int, help="master seed (required)")
    common.add_argument("--threads", type=int, default=1, help="worker threads, 0 = auto")
    common.add_argument("--out", help="also write the CSV to this path")
    common.add_argument("--N", type=int, dest="N")
    common.add_argument("--M", type=int, dest="M")
    common.add_argument("--l", type=int, default=10, help="total grid segments (example-bb)")
    common.add_argument("--tstar", type=float, help="matching time as fraction of the horizon")
    common.add_argument("--K", type=int, help="segments before the matching time")

    est = sub.add_parser("estimate", parents=[common], help="single estimation run")
    est.set_defaults(func=cmd_estimate)

    conv = sub.add_parser("converge", parents=[common], help="error study over N")
    conv.add_argument("--N-list", type=_int_list, dest="N_list")
    conv.add_argument("--R", type=int, dest="R", help="replications per N")
    conv.add_argument("--reference", type=float, help="true value; omit for self-reference")
    conv.add_argument("--reference-N", type=int, dest="reference_N")
    conv.set_defaults(func=cmd_converge)

    orc = sub.add_parser("oracle", help="print a closed-form reference")
    orc.add_argument("name", choices=["bb-truth", "ou-mean", "ou-var", "transition-density"])
    orc.add_argument("--l", type=int, default=10)
    orc.add_argument("--alpha", type=float, default=1.0)
    orc.add_argument("--x", type=float, default=0.0)
    orc.add_argument("--y", type=float, default=0.0)
    orc.add_argument("--T", type=float, default=1.0)
    orc.add_argument("--tstar", type=float, default=0.5)
    orc.add_argument("--eps", type=float, default=0.1)
    orc.add_argument("--N", type=int, default=1000)
    orc.add_argument("--t", type=float, default=0.0)
    orc.add_argument("--s", type=float, default=1.0)
    orc.add_argument("--model", choices=["bm", "ou"], default="ou")
    orc.add_argument("--out")
    orc.set_defaults(func=cmd_oracle)

    bench = sub.add_parser("bench-matcher", help="neighbor-search timings")
    bench.add_argument("--points", type=int, default=100_000)
    bench.add_argument("--dim", type=int, default=2)
    bench.add_argument("--radius", type=float, default=0.05)
    bench.add_argument("--queries", type=int, default=1000)
    bench.add_argument("--seed", type=int, default=0)
    bench.set_defaults(func=cmd_bench_matcher)

    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FrmcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
