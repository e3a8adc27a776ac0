"""Command-line front end.

Subcommands::

    sample    run one chain, write trace.csv and report.csv
    bench     dimension sweep over algorithms, write bench.csv
    optimize  run the Bregman mode finder, write optimize.csv
    oracle    one-dimensional grid check of a kernel, write oracle.csv
    schedule  print step size, exponent, warmness and predicted bounds

The global option ``--config FILE`` (given before the subcommand) reads a
flat JSON object whose keys are option names such as ``burnin`` or
``mode_source``; explicit flags win.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import diagnostics, feasible_start, grid_oracle, optimizer, samplers, schedules
from .potentials import Potential, make_target, sample_ball

ALGOS = samplers.KINDS
TARGETS = ("pi1", "pi2", "radial", "gaussian")


def _num(v) -> str:
    """Shortest round-trip decimal for floats; plain text otherwise."""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    if v is None:
        return ""
    return str(v)


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_num(v) for v in row])


def _emit_pairs(pairs, stream=None) -> None:
    stream = stream or sys.stdout
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in pairs:
        w.writerow([k, _num(v)])


def read_trace_csv(path) -> dict:
    """Load a trace.csv written by ``sample`` back into arrays."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    xcols = [i for i, name in enumerate(header) if name.startswith("x_")]
    return {
        "iter": np.array([int(r[0]) for r in body], dtype=np.int64),
        "states": np.array([[float(r[i]) for i in xcols] for r in body]).reshape(len(body), len(xcols)),
        "accepted": np.array([int(r[header.index("accepted")]) for r in body]),
        "log_pi": np.array([float(r[header.index("log_pi")]) for r in body]),
    }


# ----------------------------------------------------------------------------
# Argument handling

def _target_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--target", choices=TARGETS, default="pi1")
    p.add_argument("--a", type=float, default=1.0, help="pi1 quadratic weight")
    p.add_argument("--alpha", type=float, default=4.0, help="radial target exponent")
    p.add_argument("--m", type=float, default=1.0, help="gaussian precision")
    p.add_argument("--dim", type=int, default=2)


def _schedule_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=10.0)
    p.add_argument("--c", type=float, default=1.0, help="universal constant of the step rule")
    p.add_argument("--schedule", choices=("A", "B"), default="B")


def _chain_args(p: argparse.ArgumentParser) -> None:
    _schedule_args(p)
    p.add_argument("--iters", type=int, default=100_000)
    p.add_argument("--burnin", type=int, default=10_000)
    p.add_argument("--step", default="auto", help="'auto' or an explicit positive step size")
    p.add_argument("--zeta", type=float, default=0.0, help="laziness (0 for benchmarks)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--mode-source", dest="mode_source", choices=("exact", "optimize"),
                   default="exact")
    p.add_argument("--delta", type=float, default=None,
                   help="mode accuracy for --mode-source optimize (default from the step size)")
    p.add_argument("--x0", choices=("feasible", "mode"), default="feasible")
    p.add_argument("--out", default=".")


def build_parser() -> argparse.ArgumentParser:
    return _build()[0]


def _build():
    parser = argparse.ArgumentParser(prog="maosampler", description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=None, help="flat JSON file of option values")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="run one chain")
    _target_args(p)
    p.add_argument("--algo", choices=ALGOS, default="mao")
    _chain_args(p)

    p = sub.add_parser("bench", help="dimension sweep")
    _target_args(p)
    p.add_argument("--algos", default="mala,mao")
    p.add_argument("--dims", default="2,4,8")
    p.add_argument("--workers", type=int, default=1)
    _chain_args(p)

    p = sub.add_parser("optimize", help="Bregman gradient mode finder")
    _target_args(p)
    p.add_argument("--x0-radius", dest="x0_radius", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--L-rel", dest="L_rel", type=float, default=None)
    p.add_argument("--max-iters", dest="max_iters", type=int, default=10_000)
    p.add_argument("--grad-tol", dest="grad_tol", type=float, default=1e-8)
    p.add_argument("--out", default=".")

    p = sub.add_parser("oracle", help="1-D grid discretization check")
    _target_args(p)
    p.add_argument("--algo", choices=ALGOS, default="mao")
    p.add_argument("--h", type=float, default=0.05)
    p.add_argument("--zeta", type=float, default=0.5)
    p.add_argument("--lo", type=float, default=-4.0)
    p.add_argument("--hi", type=float, default=4.0)
    p.add_argument("--cells", type=int, default=512)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--max-steps", dest="max_steps", type=int, default=100_000)
    p.add_argument("--out", default=".")

    p = sub.add_parser("schedule", help="print schedule quantities")
    _schedule_args(p)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--alpha", type=float, default=4.0)
    p.add_argument("--gamma", type=float, default=4.0)
    p.add_argument("--K2", type=float, default=None)
    p.add_argument("--m", type=float, default=None)
    p.add_argument("--delta-c", dest="delta_c", type=float, default=1.0)
    return parser, sub.choices


def parse_args(argv=None) -> argparse.Namespace:
    parser, subparsers = _build()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            parser.error("config file must hold a flat JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        subparser = subparsers[args.command]
        known = {a.dest for a in subparser._actions}
        unknown = set(cfg) - known - {"command"}
        if unknown:
            parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
        subparser.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


# ----------------------------------------------------------------------------
# Run helpers shared by sample and bench

def _target_from(args, dim: int | None = None) -> Potential:
    return make_target(args.target, dim or args.dim, a=args.a, alpha=args.alpha, m=args.m)


def resolve_step(args, target: Potential) -> float:
    if str(args.step).lower() != "auto":
        h = float(args.step)
        if not h > 0:
            raise ValueError(f"step must be positive, got {args.step}")
        return h
    sched = schedules.step_size(args.eps, args.beta, target.dim, target.alpha, target.gamma,
                                c=args.c, assumption=args.schedule)
    return sched.h


def resolve_mode(args, target: Potential, h: float, x0: np.ndarray):
    """Mode estimate for the MAO kernel and its distance to the true mode."""
    if args.mode_source == "exact":
        return target.mode.copy(), 0.0
    delta = args.delta
    if delta is None:
        delta = schedules.delta_tolerance(h, args.eps)
    grad_tol = target.m * delta if target.m > 0 else delta ** (target.alpha - 1.0)
    cfg = optimizer.OptimizerConfig(L_rel=optimizer.default_L_rel(target.K2, target.alpha),
                                    max_iters=1_000_000, grad_tol=grad_tol, alpha=target.alpha)
    res = optimizer.find_mode(target, x0, cfg)
    return res.x_tilde, float(np.linalg.norm(res.x_tilde - target.mode))


def _initial_state(args, target: Potential, seed: int) -> np.ndarray:
    if args.x0 == "mode":
        return target.mode.copy()
    fs = feasible_start.FeasibleStart.from_potential(target)
    return feasible_start.sample_start(fs, 1, seed=seed)[0]


def run_configured_chain(args, target: Potential, algo: str, seed: int):
    h = resolve_step(args, target)
    x0 = _initial_state(args, target, seed)
    x_tilde, mode_error = resolve_mode(args, target, h, x0)
    kernel = samplers.ProposalKernel(algo, h, x_tilde if algo == "mao" else None)
    config = samplers.SamplerConfig(kernel=kernel, zeta=args.zeta, n_iters=args.iters,
                                    burn_in=args.burnin, seed=seed, record_stride=args.stride)
    start = time.perf_counter()
    trace = samplers.run_chain(config, target, x0)
    elapsed = time.perf_counter() - start
    return trace, h, mode_error, elapsed


def cell_seed(seed: int, algo: str, dim: int) -> int:
    """Independent 64-bit chain seed for one (algo, dim) cell of a sweep."""
    ss = np.random.SeedSequence([seed & ((1 << 64) - 1), ALGOS.index(algo), dim])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# ----------------------------------------------------------------------------
# Subcommands

def cmd_sample(args) -> int:
    target = _target_from(args)
    trace, h, mode_error, elapsed = run_configured_chain(args, target, args.algo, args.seed)
    out = Path(args.out)
    d = target.dim
    header = ["iter"] + [f"x_{i}" for i in range(d)] + ["accepted", "log_pi"]
    rows = ([int(t)] + [float(v) for v in x] + [int(o), float(lp)]
            for t, x, o, lp in zip(trace.iters, trace.states, trace.outcomes,
                                   trace.log_densities))
    _write_csv(out / "trace.csv", header, rows)
    report = diagnostics.summarize(trace)
    _write_csv(out / "report.csv",
               ["coord", "ess", "accept_rate", "runtime_seconds", "h_used", "mode_error"],
               ([i, float(report.ess[i]), report.accept_rate, elapsed, h, mode_error]
                for i in range(d)))
    print(f"accept_rate={report.accept_rate:.4f} h={h:.6g} "
          f"ess_min={np.nanmin(report.ess) if np.any(np.isfinite(report.ess)) else math.nan:.1f} "
          f"runtime={elapsed:.2f}s -> {out}")
    return 0


BENCH_HEADER = ["algo", "target", "dim", "ess_x1", "ess_x2", "accept_rate", "h_used", "seed",
                "error"]


def _bench_cell(args, algo: str, dim: int) -> list:
    try:
        target = _target_from(args, dim)
        trace, h, _, _ = run_configured_chain(args, target, algo, cell_seed(args.seed, algo, dim))
        ess = [diagnostics.effective_sample_size(trace.states[:, i]) for i in range(min(dim, 2))]
        ess += [None] * (2 - len(ess))
        return [algo, args.target, dim, ess[0], ess[1], trace.accept_rate, h, args.seed, ""]
    except Exception as exc:  # recorded per cell; the sweep continues
        return [algo, args.target, dim, None, None, None, None, args.seed,
                f"{type(exc).__name__}: {exc}".replace("\n", " ")]


def cmd_bench(args) -> int:
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    dims = [int(d) for d in args.dims.split(",") if d.strip()]
    if not dims or not algos:
        raise ValueError("bench needs at least one algorithm and one dimension")
    for a in algos:
        if a not in ALGOS:
            raise ValueError(f"unknown algorithm {a!r}")
    cells = [(a, d) for a in algos for d in dims]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_bench_cell, [args] * len(cells),
                                 [c[0] for c in cells], [c[1] for c in cells]))
    else:
        rows = [_bench_cell(args, a, d) for a, d in cells]
    out = Path(args.out)
    _write_csv(out / "bench.csv", BENCH_HEADER, rows)
    for row in rows:
        print(",".join(_num(v) for v in row))
    return 0


def cmd_optimize(args) -> int:
    target = _target_from(args)
    rng = np.random.default_rng(args.seed)
    x0 = sample_ball(rng, 1, target.dim, args.x0_radius, target.mode)[0]
    L = args.L_rel if args.L_rel is not None else optimizer.default_L_rel(target.K2, target.alpha)
    cfg = optimizer.OptimizerConfig(L_rel=L, max_iters=args.max_iters, grad_tol=args.grad_tol,
                                    alpha=target.alpha)
    res = optimizer.find_mode(target, x0, cfg)
    _write_csv(Path(args.out) / "optimize.csv", ["iter", "f"], enumerate(res.f_history))
    _emit_pairs([("iters", res.iters), ("grad_norm", res.grad_norm),
                 ("mode_error", float(np.linalg.norm(res.x_tilde - target.mode))),
                 ("converged", int(res.converged)), ("L_rel", L)])
    return 0


def cmd_oracle(args) -> int:
    target = _target_from(args, 1)
    kernel = samplers.ProposalKernel(args.algo, args.h,
                                     target.mode if args.algo == "mao" else None)
    grid = grid_oracle.Grid(args.lo, args.hi, args.cells)
    gk = grid_oracle.discretize(kernel, target, args.zeta, grid)
    st = grid_oracle.stationary(gk)
    fs = feasible_start.FeasibleStart.from_potential(target)
    mu0 = grid_oracle.discretize_density(np.array([fs.f0(np.array([x])) for x in grid.midpoints]))
    traj = grid_oracle.mixing_trajectory(gk, mu0, args.eps, p=args.p, max_steps=args.max_steps)
    _write_csv(Path(args.out) / "oracle.csv", ["step", "divergence"],
               enumerate(traj.divergences))
    pairs = [("tv_stationary", st.tv_to_target),
             ("reversibility_residual", gk.reversibility_residual()),
             ("row_sum_error", gk.row_sum_error()),
             ("leakage", gk.leakage),
             ("t_mix", traj.t_mix if traj.t_mix is not None else "unreached")]
    _emit_pairs(pairs)
    return 0


def cmd_schedule(args) -> int:
    sched = schedules.step_size(args.eps, args.beta, args.dim, args.alpha, args.gamma,
                                c=args.c, assumption=args.schedule)
    bounds = schedules.predicted_bounds(sched, sched.radius)
    pairs = [("assumption", sched.assumption), ("s", sched.s), ("radius", sched.radius),
             ("omega", sched.omega), ("h", sched.h),
             ("predicted_mixing_bound", bounds["mixing_upper"]),
             ("warm_log_log", bounds["warm_log_log"]),
             ("delta", schedules.delta_tolerance(sched.h, args.eps, args.delta_c))]
    if args.K2 is not None and args.m is not None:
        pairs.append(("log_beta", feasible_start.log_beta(args.K2, args.alpha, args.m, args.dim)))
    _emit_pairs(pairs)
    return 0


COMMANDS = {
    "sample": cmd_sample,
    "bench": cmd_bench,
    "optimize": cmd_optimize,
    "oracle": cmd_oracle,
    "schedule": cmd_schedule,
}


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except samplers.ChainDivergenceError as exc:
        print(f"error: chain diverged at {exc}", file=sys.stderr)
        return 3
    except (ValueError, FloatingPointError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
