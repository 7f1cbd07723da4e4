"""Command-line entry point: ``fml {solve,bounds,hmin,verify,experiment}``.

Exit status: 0 on success, 1 when a verdict fails, 2 on invalid input.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path
from typing import List, Optional

from .bounds import ConcentrationSpec, refined_bound_radius
from .errors import InputError
from .geometry import ModelSpace
from .hmin import HminInstance, branch, hmin_bruteforce, hmin_closed_form, hmin_scaled
from .solver import SolverConfig, median_solve

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
EXPERIMENTS = ("position", "consistency", "genericity", "hmin", "kernels")


def _default_seed() -> int:
    raw = os.environ.get("FML_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"FML_SEED must be an integer, got {raw!r}") from None


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _solver_cfg(args, **overrides) -> SolverConfig:
    kw = dict(tol=args.tol, max_iters=args.max_iters, multistarts=args.multistarts, seed=args.seed)
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return SolverConfig(**kw)


def _space(args) -> ModelSpace:
    if args.curvature is None:
        raise InputError("--curvature is required")
    return ModelSpace(args.curvature, args.dim)


def cmd_solve(args) -> int:
    from .harness.dataset import load_dataset
    from .harness.report import dumps

    if not args.dataset:
        raise InputError("solve needs --dataset")
    ds = load_dataset(args.dataset, args.format, args.curvature, args.dim if args.format == "csv" else None)
    res = median_solve(ds.measure(), _solver_cfg(args))
    doc = {
        "schema_version": 1,
        "space": {"curvature": ds.space.curvature, "dim": ds.space.dim},
        "result": res.to_dict(),
    }
    _emit(dumps(doc), args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    from .harness.report import dumps

    if args.alpha is None or args.rho is None:
        raise InputError("bounds needs --alpha and --rho")
    rep = refined_bound_radius(_space(args), ConcentrationSpec(args.alpha, args.rho))
    _emit(dumps(dict(rep.to_dict(), certified_radius=rep.certified_radius)), args.out)
    return EXIT_OK


def cmd_hmin(args) -> int:
    from .harness.experiments import hmin_csv, hmin_verification_run
    from .harness.report import dumps

    if args.grid:
        report = hmin_verification_run(args.grid, seed=args.seed)
        if args.format == "json":
            if args.envelope:
                report.stamp()
            _emit(report.to_json(include_envelope=args.envelope), args.out)
        else:
            _emit(hmin_csv(report.trials), args.out)
        print(f"hmin verification: {'PASS' if report.passed else 'FAIL'} {report.verdict['checks']}",
              file=sys.stderr)
        return EXIT_OK if report.passed else EXIT_FAIL
    if args.rho is None or args.t is None or args.u is None:
        raise InputError("hmin needs --rho, --t and --u (or --grid)")
    if args.geometry:
        inst = HminInstance(args.geometry, args.rho, args.t, args.u)
        doc = {"geometry": args.geometry, "rho": args.rho, "t": args.t, "u": args.u,
               "branch": branch(inst), "closed_form": hmin_closed_form(inst),
               "bruteforce": hmin_bruteforce(inst)}
    else:
        if args.curvature is None:
            raise InputError("hmin needs --geometry or --curvature")
        doc = {"curvature": args.curvature, "rho": args.rho, "t": args.t, "u": args.u,
               "closed_form": hmin_scaled(args.curvature, args.rho, args.t, args.u)}
    _emit(dumps(doc), args.out)
    return EXIT_OK


def _finish(report, args) -> int:
    if args.envelope:
        report.stamp()
    _emit(report.to_json(include_envelope=args.envelope), args.out)
    status = "PASS" if report.passed else "FAIL"
    print(f"{report.experiment}: {status}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_verify(args) -> int:
    from .harness.verify import verify_suite

    report = verify_suite(seed=args.seed, trials=args.trials or 10)
    for name, ok in report.verdict["checks"].items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}", file=sys.stderr)
    return _finish(report, args)


def _schedule(text: str) -> List[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"--schedule must be comma-separated integers, got {text!r}") from None
    if not vals:
        raise InputError("--schedule is empty")
    return vals


def cmd_experiment(args) -> int:
    from . import geometry as geo
    from .harness import experiments as ex
    from .harness.dataset import load_dataset
    from .harness.verify import geometry_kernel_suite
    from .solver import DiscreteMeasure

    name = args.name
    if name == "position":
        if args.alpha is None or args.rho is None:
            raise InputError("position needs --alpha and --rho")
        report = ex.position_bound_experiment(
            _space(args), ConcentrationSpec(args.alpha, args.rho), trials=args.trials or 500,
            cfg=_solver_cfg(args), seed=args.seed, tol=args.containment_tol)
    elif name == "consistency":
        if args.dataset:
            mu = load_dataset(args.dataset, args.format, args.curvature).measure()
        else:
            space = ModelSpace(1.0 if args.curvature is None else args.curvature, args.dim)
            if not space.compact:
                raise InputError("without --dataset, consistency samples a base measure on a sphere")
            mu = DiscreteMeasure.uniform(space, geo.sample_uniform(space, args.points, args.seed))
        report = ex.consistency_experiment(mu, _schedule(args.schedule), trials=args.trials or 50,
                                           seed=args.seed, cfg=_solver_cfg(args))
    elif name == "genericity":
        space = ModelSpace(1.0 if args.curvature is None else args.curvature, args.dim)
        report = ex.genericity_experiment(space, args.points, trials=args.trials or 200, seed=args.seed,
                                          cfg=_solver_cfg(args, multistarts=max(args.multistarts, 32)))
    elif name == "hmin":
        report = ex.hmin_verification_run(args.trials or 500, seed=args.seed)
    else:
        report = geometry_kernel_suite(args.trials or 1000, seed=args.seed)
    return _finish(report, args)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--curvature", type=float, help="model-space curvature kappa")
    common.add_argument("--dim", type=int, default=2, help="manifold dimension (default 2)")
    common.add_argument("--alpha", type=float, help="mass inside the concentration ball")
    common.add_argument("--rho", type=float, help="concentration-ball radius")
    common.add_argument("--t", type=float, help="hmin: x at distance rho + t from the center")
    common.add_argument("--u", type=float, help="hmin: z at distance u from the center")
    common.add_argument("--tol", type=float, default=1e-9, help="solver tolerance")
    common.add_argument("--seed", type=int, default=None, help="master seed (default $FML_SEED or 0)")
    common.add_argument("--max-iters", type=int, default=10_000)
    common.add_argument("--multistarts", type=int, default=16)
    common.add_argument("--trials", type=int, help="number of trials / instances")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"),
                        help="dataset format for solve; output format for hmin --grid")
    common.add_argument("--envelope", action="store_true",
                        help="add a timestamped envelope to reports")

    p = argparse.ArgumentParser(prog="fml", description="Robust Fréchet medians on model spaces.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="median of a dataset")
    s.add_argument("--dataset", help="JSON or CSV point file")

    sub.add_parser("bounds", parents=[common], help="containment radii for a concentration spec")

    h = sub.add_parser("hmin", parents=[common], help="minimum of d(x,.) - d(z,.) over a ball")
    h.add_argument("--geometry", choices=("sphere", "flat", "hyperbolic"))
    h.add_argument("--grid", type=int, help="verify this many random instances per geometry")

    sub.add_parser("verify", parents=[common], help="run the invariant suite")

    e = sub.add_parser("experiment", parents=[common], help="run a named seeded experiment")
    e.add_argument("name", choices=EXPERIMENTS)
    e.add_argument("--dataset", help="base measure for consistency")
    e.add_argument("--schedule", default="16,64,256,1024", help="sample sizes for consistency")
    e.add_argument("--points", type=int, default=5, help="points per sample (genericity, consistency)")
    e.add_argument("--containment-tol", type=float, default=1e-6)
    return p


COMMANDS = {
    "solve": cmd_solve,
    "bounds": cmd_bounds,
    "hmin": cmd_hmin,
    "verify": cmd_verify,
    "experiment": cmd_experiment,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.seed is None:
            args.seed = _default_seed()
        for flag in ("curvature", "alpha", "rho", "t", "u", "tol"):
            v = getattr(args, flag)
            if v is not None and not math.isfinite(v):
                raise InputError(f"--{flag} must be finite")
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
