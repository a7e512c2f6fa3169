"""Command-line pipeline: generate / offline / predict / compare / bench.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 missing or corrupted data.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, pipeline
from .errors import (
    ConfigError,
    DataIntegrityError,
    DivergedSolutionError,
    NotConvergedError,
    RankDeficientError,
    RankTooSmallError,
    SingularMassError,
    SingularOverlapError,
)
from .io import write_manifest, write_matrix
from .metrics import write_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_DATA = 4

_NUMERICAL = (
    NotConvergedError,
    DivergedSolutionError,
    SingularMassError,
    SingularOverlapError,
    RankDeficientError,
    RankTooSmallError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="baryrom",
        description="Parametric reduced-order models from barycentric "
                    "interpolation of POD subspaces",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="working directory")
    common.add_argument("--jobs", type=int, default=1, help="worker threads for per-parameter fan-out")
    common.add_argument("--seed", type=int, default=None,
                        help="seed recorded for randomized test harnesses; the pipeline itself is deterministic")

    online = argparse.ArgumentParser(add_help=False)
    online.add_argument("--method", choices=list(pipeline.METHODS), default="barycentric")
    online.add_argument("--weights", choices=["lagrange", "idw"], default=None)
    online.add_argument("--neighbors", type=int, default=None)
    online.add_argument("--q", type=int, default=None)
    online.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("generate", parents=[common], help="run the high-fidelity solver per viscosity")
    p.add_argument("--config", required=True)

    p = sub.add_parser("offline", parents=[common, online], help="build POD bases and the tensor archive")

    p = sub.add_parser("predict", parents=[common, online], help="online prediction at one viscosity")
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--ic", choices=list(pipeline.IC_MODES), default="weighted")
    p.add_argument("--allow-nonconverged", action="store_true")

    p = sub.add_parser("compare", parents=[common, online],
                       help="errors of both interpolated models vs the truth-POD floor")
    p.add_argument("--targets", default=None,
                   help="comma-separated viscosities (default: config test_nu)")

    p = sub.add_parser("bench", parents=[common, online],
                       help="median update vs direct-projection time across mesh sizes")
    p.add_argument("--config", required=True)
    p.add_argument("--sizes", default="2000,20000", help="comma-separated mesh sizes")
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--nu", type=float, default=None,
                   help="update target (default: midpoint of the trained range)")
    return parser


def _cmd_generate(args) -> int:
    cfg = pipeline.load_config(args.config)
    pipeline.run_generate(cfg, args.out, jobs=args.jobs)
    print(f"wrote snapshots and manifest under {args.out}")
    return EXIT_OK


def _cmd_offline(args) -> int:
    pipeline.run_offline(args.out, jobs=args.jobs, q=args.q)
    print(f"wrote POD bases, mean field and tensor archive under {args.out}")
    return EXIT_OK


def _cmd_predict(args) -> int:
    study = pipeline.load_study(args.out)
    traj, recon, report = pipeline.predict(
        study, args.nu, method=args.method, ic_mode=args.ic,
        allow_nonconverged=args.allow_nonconverged,
        kind=args.weights, neighbors=args.neighbors, tol=args.tol,
    )
    outdir = Path(args.out) / f"predict_nu{pipeline._nu_tag(args.nu)}_{args.method}"
    outdir.mkdir(parents=True, exist_ok=True)
    q = traj.alphas.shape[1]
    write_csv(
        outdir / "trajectory.csv",
        ["t"] + [f"alpha{i + 1}" for i in range(q)],
        [[float(traj.times[j])] + [float(v) for v in traj.alphas[j]]
         for j in range(traj.times.size)],
    )
    write_matrix(outdir / "field.mat", recon.values)
    write_manifest(outdir / "report.json", report)
    print(f"wrote trajectory, field and report under {outdir}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    study = pipeline.load_study(args.out)
    targets = None
    if args.targets:
        targets = [float(v) for v in args.targets.split(",") if v]
    rows, reports = pipeline.compare(study, targets, kind=args.weights,
                                     neighbors=args.neighbors)
    pipeline.write_compare_outputs(args.out, rows, reports)
    print("nu barycentric itsgm truth_pod")
    for row in rows:
        print(f"{row[0]:g} {row[1]:.6f}% {row[2]:.6f}% {row[3]:.6f}%")
    print(f"wrote compare.csv under {args.out}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    cfg = pipeline.load_config(args.config)
    sizes = [int(v) for v in args.sizes.split(",") if v]
    nu = args.nu
    if nu is None:
        lo, hi = min(cfg.trained_nu), max(cfg.trained_nu)
        nu = 0.5 * (lo + hi)
    rows = []
    for nx in sizes:
        size_dir = Path(args.out) / f"bench_nx{nx}"
        size_cfg = pipeline.config_from_dict({**cfg.to_dict(), "grid": {
            "n": nx, "length": cfg.grid_length}})
        if not (size_dir / "manifest.json").exists():
            pipeline.run_generate(size_cfg, size_dir, jobs=args.jobs)
        manifest = pipeline.read_manifest(size_dir / "manifest.json")
        if "offline" not in manifest:
            pipeline.run_offline(size_dir, jobs=args.jobs, q=args.q)
        study = pipeline.load_study(size_dir)
        t_update, t_direct = pipeline.bench_update(study, nu, reps=args.reps)
        rows.append(["barycentric_update", nx, t_update])
        rows.append(["direct_projection", nx, t_direct])
    write_csv(Path(args.out) / "bench.csv", ["method", "nx", "median_s"],
              [[r[0], r[1], float(r[2])] for r in rows])
    for r in rows:
        print(f"{r[0]} nx={r[1]} median={r[2]:.6e}s")
    print(f"wrote bench.csv under {args.out}")
    return EXIT_OK


_DISPATCH = {
    "generate": _cmd_generate,
    "offline": _cmd_offline,
    "predict": _cmd_predict,
    "compare": _cmd_compare,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERICAL as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DataIntegrityError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entry():  # console-script hook
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
