"""Command line front end: tpca {gen,recover,grid,converge,path,check,view}.

Exit codes: 0 success, 2 invalid arguments, 3 resource-guard refusal, 1 any
other library error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import config, diagnostics, harness
from .algorithms import AscentOptions, HomotopySchedule, RunContext
from .errors import InvalidArgumentError, ResourceGuardError, TensorPCAError
from .logging_setup import configure_logging
from .model import generate, normalize_noise, score
from .plugins_loader import available_plugins, get_algorithm
from .rng import PROBE_STREAM, SIGNAL_STREAM, random_unit
from .tensor_io import read_sidecar, read_tensor, write_sidecar, write_tensor

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2
EXIT_RESOURCE = 3


def _tau(args: argparse.Namespace) -> float:
    if args.tau is not None and args.alpha is not None:
        raise InvalidArgumentError("give either --tau or --alpha, not both")
    if args.tau is not None:
        return args.tau
    return harness.alpha_to_tau(args.alpha if args.alpha is not None else 2.0, args.n)


def cmd_gen(args: argparse.Namespace) -> None:
    if args.out is None:
        raise InvalidArgumentError("gen needs --out for the tensor file")
    inst = generate(args.n, _tau(args), args.sigma, args.seed)
    write_tensor(inst.tensor, args.out)
    sidecar = args.sidecar or args.out.with_suffix(".json")
    write_sidecar(inst.sidecar(), sidecar)
    logger.info("[gen] n=%d tau=%.4g sigma=%g seed=%d -> %s", inst.n, inst.tau, inst.sigma, inst.seed, args.out)


def cmd_recover(args: argparse.Namespace) -> None:
    T = read_tensor(args.input)
    meta = read_sidecar(args.sidecar) if args.sidecar else None
    v = np.asarray(meta["v"], dtype=np.float64) if meta else None
    if args.normalize:
        T = normalize_noise(T)
    tau_hat = args.tau_hat
    if tau_hat is None and meta and meta["tau"] > 0 and not args.normalize:
        tau_hat = float(meta["tau"])
    plugin = get_algorithm(args.algo)
    ctx = RunContext(seed=args.seed, max_iter=args.max_iter, tol=args.tol, v=v, tau_hat=tau_hat, m=args.m,
                     streaming=not args.no_streaming)
    trace = plugin.run(T, ctx)
    payload = trace.to_dict()
    if v is not None:
        s = score(trace.final, v)
        payload["score"] = {"correlation": s.correlation, "success": s.success}
    logger.info("[recover] %s: %d iterations, converged=%s", plugin.name, trace.iterations_used, trace.converged)
    harness.write_json(payload, args.out)


def cmd_grid(args: argparse.Namespace) -> None:
    if args.spec is not None:
        spec = harness.GridSpec.load(args.spec)
    else:
        spec = harness.GridSpec(
            n_values=args.n, tau_values=args.tau_values, trials=args.trials, algorithms=args.algos,
            master_seed=args.seed, max_iter=args.max_iter, tol=args.tol, tau_mode=args.tau_mode,
            sigma=args.sigma,
        )
    cells = harness.run_grid(spec, threads=args.threads)
    harness.emit(cells, args.format, args.out, kind="grid")


def cmd_converge(args: argparse.Namespace) -> None:
    curves = harness.run_convergence(args.n, args.alphas, args.trials, args.algos, seed=args.seed,
                                     max_iter=args.max_iter, threads=args.threads, tol=args.tol)
    harness.emit(curves, args.format, args.out, kind="curve")


def cmd_path(args: argparse.Namespace) -> None:
    tau = _tau(args)
    inst = generate(args.n, tau, 1.0, args.seed)
    tau_hat = args.tau_hat if args.tau_hat is not None else tau
    schedule = HomotopySchedule.geometric(args.n, args.stages)
    points = diagnostics.trace_path(inst.tensor, inst.v, schedule, tau_hat, AscentOptions(), tau=tau)
    harness.write_json({
        "n": args.n, "tau": tau, "tau_hat": tau_hat, "seed": args.seed,
        "schedule": list(schedule.t_values), "note": diagnostics.SIN_THETA_NOTE,
        "points": [p.to_dict() for p in points],
    }, args.out)


def _check_moments(args: argparse.Namespace) -> List[diagnostics.MomentReport]:
    n = args.n or 50
    reports = list(diagnostics.u_moments(n, 1.0, args.trials or 2000, args.seed, threads=args.threads))
    v = random_unit(n, args.seed, SIGNAL_STREAM)
    x_perp = random_unit(n, args.seed, PROBE_STREAM)
    x_perp = x_perp - (x_perp @ v) * v
    for label, x in (("x perp v", x_perp / np.linalg.norm(x_perp)), ("x = v", v)):
        for r in diagnostics.delta_moments(n, 1.0, x, v, args.trials or 2000, args.seed, threads=args.threads):
            r.name = f"{r.name} [{label}]"
            reports.append(r)
    return reports


def _check_goe(args: argparse.Namespace) -> List[diagnostics.MomentReport]:
    reports = []
    for n in ([args.n] if args.n else [25, 100]):
        r = diagnostics.goe_spectrum_check(n, args.trials or 50, args.seed, threads=args.threads)
        r.name = f"{r.name} [n={n}]"
        reports.append(r)
    return reports


def cmd_check(args: argparse.Namespace) -> None:
    if args.suite == "moments":
        reports = _check_moments(args)
    elif args.suite == "injection":
        reports = list(diagnostics.injection_moments(args.m or 5, args.trials or 100_000, args.seed,
                                                     n=args.n or 2, threads=args.threads))
    elif args.suite == "goe":
        reports = _check_goe(args)
    else:
        reports = list(diagnostics.phase_transition_check(args.n or 64, args.trials or 30, args.seed,
                                                           threads=args.threads))
    for r in reports:
        logger.info("[check] %s: %s (empirical %.6g, theoretical %.6g)",
                    r.name, "pass" if r.passed else "FAIL", r.empirical, r.theoretical)
    harness.write_json({"suite": args.suite, "seed": args.seed, "note": diagnostics.SIN_THETA_NOTE,
                        "passed": all(r.passed for r in reports),
                        "reports": [r.to_dict() for r in reports]}, args.out)


def cmd_view(args: argparse.Namespace) -> None:
    from .results_app import run_viewer

    run_viewer(args.input)


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", type=Path, default=None, help="Output file (stdout when omitted)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--max-n-override", type=int, default=None,
                        help="Raise the dimension cap; above 512 tensors are stored in 32-bit floats")
    common.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    p = argparse.ArgumentParser(prog="tpca", description="Tensor PCA with homotopy initialization")
    sub = p.add_subparsers(dest="cmd", required=True)
    tags = sorted(available_plugins())

    pg = sub.add_parser("gen", parents=[common], help="Generate a spiked tensor and its sidecar")
    pg.add_argument("--n", type=int, required=True)
    pg.add_argument("--tau", type=float, default=None)
    pg.add_argument("--alpha", type=float, default=None, help="tau = alpha * n^(3/4)")
    pg.add_argument("--sigma", type=float, default=1.0)
    pg.add_argument("--sidecar", type=Path, default=None)
    pg.set_defaults(func=cmd_gen)

    pr = sub.add_parser("recover", parents=[common], help="Run one algorithm on a tensor file")
    pr.add_argument("--algo", choices=tags, default="homotopy")
    pr.add_argument("--in", dest="input", type=Path, required=True)
    pr.add_argument("--sidecar", type=Path, default=None)
    pr.add_argument("--max-iter", type=int, default=None)
    pr.add_argument("--tol", type=float, default=config.DEFAULT_TOL)
    pr.add_argument("--tau-hat", type=float, default=None)
    pr.add_argument("--m", type=int, default=None, help="Noise-injection count")
    pr.add_argument("--no-streaming", action="store_true", help="Store all injection tensors")
    pr.add_argument("--normalize", action="store_true", help="Rescale to unit estimated noise variance")
    pr.set_defaults(func=cmd_recover)

    pgr = sub.add_parser("grid", parents=[common], help="Success-rate grid over (n, tau, algorithm)")
    pgr.add_argument("--spec", type=Path, default=None, help="JSON GridSpec; overrides the grid flags")
    pgr.add_argument("--n", type=int, nargs="+", default=[32, 64, 96, 128])
    pgr.add_argument("--tau-values", type=float, nargs="+", default=[0.5, 1.0, 2.0, 4.0])
    pgr.add_argument("--tau-mode", choices=["alpha", "absolute"], default="alpha")
    pgr.add_argument("--trials", type=int, default=50)
    pgr.add_argument("--algos", nargs="+", default=["flatten", "homotopy", "power"])
    pgr.add_argument("--max-iter", type=int, default=config.ITERATION_CAP)
    pgr.add_argument("--tol", type=float, default=config.DEFAULT_TOL)
    pgr.add_argument("--sigma", type=float, default=1.0)
    pgr.set_defaults(func=cmd_grid)

    pc = sub.add_parser("converge", parents=[common], help="Per-iteration correlation curves")
    pc.add_argument("--n", type=int, default=128)
    pc.add_argument("--alphas", type=float, nargs="+", default=[1.1, 1.5, 2.0])
    pc.add_argument("--trials", type=int, default=50)
    pc.add_argument("--algos", nargs="+", default=["flatten", "homotopy", "power"])
    pc.add_argument("--max-iter", type=int, default=config.ITERATION_CAP)
    pc.add_argument("--tol", type=float, default=config.DEFAULT_TOL)
    pc.set_defaults(func=cmd_converge)

    pp = sub.add_parser("path", parents=[common], help="Trace the homotopy path of one instance (JSON)")
    pp.add_argument("--n", type=int, default=64)
    pp.add_argument("--tau", type=float, default=None)
    pp.add_argument("--alpha", type=float, default=None)
    pp.add_argument("--tau-hat", type=float, default=None)
    pp.add_argument("--stages", type=int, default=12)
    pp.set_defaults(func=cmd_path)

    pk = sub.add_parser("check", parents=[common], help="Run a diagnostic suite (JSON)")
    pk.add_argument("--suite", choices=["moments", "injection", "goe", "path"], required=True)
    pk.add_argument("--n", type=int, default=None)
    pk.add_argument("--trials", type=int, default=None)
    pk.add_argument("--m", type=int, default=None)
    pk.set_defaults(func=cmd_check)

    pv = sub.add_parser("view", parents=[common], help="Browse a grid or convergence result file")
    pv.add_argument("--in", dest="input", type=Path, required=True)
    pv.set_defaults(func=cmd_view)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INVALID
    configure_logging(level=getattr(logging, args.log_level))
    try:
        if args.threads < 1:
            raise InvalidArgumentError("--threads must be at least 1")
        if args.max_n_override is not None:
            config.configure(max_n=args.max_n_override)
        args.func(args)
    except InvalidArgumentError as e:
        logger.error("[%s] invalid argument: %s", args.cmd, e)
        return EXIT_INVALID
    except ResourceGuardError as e:
        logger.error("[%s] refused: %s", args.cmd, e)
        return EXIT_RESOURCE
    except TensorPCAError as e:
        logger.error("[%s] %s: %s", args.cmd, type(e).__name__, e)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
