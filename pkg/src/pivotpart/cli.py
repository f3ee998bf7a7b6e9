"""Command-line entry point.

Subcommands: ``gen`` (write a dataset file), ``tau-sweep`` and ``bench``
(rate sweeps to CSV), ``project`` (2D scatter export with boundary
overlays) and ``verify`` (randomised correctness suites).

Every command is deterministic in its flags and seed; data and CSV
outputs are byte-identical across reruns.  A ``<out>.manifest.txt`` with
the config snapshot (plus a start timestamp, which is metadata and not
part of the byte-identity contract) is written next to every output.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bench import ExperimentConfig, SWEEP_MECHANISMS, TAU_GRID, generate_uniform, \
    sweep_dimensions, sweep_tau
from .bounds import exclusion_boundaries, project_dataset, write_projection_csv
from .data import read_dataset, write_dataset
from .metrics import MetricId
from .partitioning import PivotPair
from .verify import run_all

PAPER_SCALE = {"n_data": 50000, "n_queries": 1000}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 by default; usage errors must be 1 here.
    def error(self, message):
        raise _UsageError(message)


def _parse_int_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise _UsageError(f"expected a comma-separated integer list, got {text!r}")


def _parse_taus(text: str) -> list:
    """Either '0.5,0.7,1.0' or a 'lo:hi:step' grid (both ends included)."""
    try:
        if ":" in text:
            lo, hi, step = (float(x) for x in text.split(":"))
            if step <= 0 or hi < lo:
                raise ValueError
            count = int(round((hi - lo) / step)) + 1
            return [round(lo + i * step, 10) for i in range(count)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise _UsageError(f"expected taus as 'lo:hi:step' or a comma list, got {text!r}")


def _load_config_file(path: str) -> dict:
    """Flat key=value lines; '#' starts a comment; keys use flag names."""
    values = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise _UsageError(f"{path}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _write_manifest(out: Path, command: str, args: argparse.Namespace, outputs) -> None:
    lines = [
        f"library: pivotpart {__version__}",
        f"command: {command}",
        f"started: {datetime.now(timezone.utc).isoformat()}",
    ]
    for path in outputs:
        lines.append(f"output: {path}")
    for key in sorted(vars(args)):
        if key in ("func", "config"):
            continue
        lines.append(f"conf.{key}: {getattr(args, key)}")
    manifest = out.with_name(out.name + ".manifest.txt")
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _require_out(args) -> Path:
    if not args.out:
        raise _UsageError("--out is required")
    return Path(args.out)


def _experiment_config(args, tau_values=None) -> ExperimentConfig:
    n_data, n_queries = args.n_data, args.n_queries
    if args.paper_scale:
        n_data, n_queries = PAPER_SCALE["n_data"], PAPER_SCALE["n_queries"]
    if not isinstance(args.pivots, int) and not args.pivots:
        raise _UsageError("--pivots needs at least one count")
    return ExperimentConfig(
        dims=args.dims,
        n_data=n_data,
        n_queries=n_queries,
        n_pivots=args.pivots if isinstance(args.pivots, int) else args.pivots[0],
        tau_values=tau_values if tau_values is not None else TAU_GRID,
        mechanisms=getattr(args, "mechanisms", SWEEP_MECHANISMS),
        seed=args.seed,
        knn_k=args.knn_k,
        pivot_counts=args.pivots if isinstance(args.pivots, list) else (),
        metric=args.metric,
        in_dataset_pivots=args.in_dataset_pivots,
        global_mean_threshold=args.global_mean_threshold,
    )


def cmd_gen(args) -> int:
    out = _require_out(args)
    if args.dim < 1 or args.n < 0:
        raise _UsageError("gen needs --dim >= 1 and --n >= 0")
    ds = generate_uniform(args.dim, args.n, args.seed)
    write_dataset(ds, out)
    meta = out.with_name(out.name + ".meta.txt")
    meta.write_text(
        f"format: MSPD\ndim: {args.dim}\ncount: {args.n}\nseed: {args.seed}\n"
        f"metric: {args.metric}\n", encoding="utf-8")
    _write_manifest(out, "gen", args, [out, meta])
    print(f"wrote {out} ({args.n} x {args.dim})")
    return 0


def cmd_tau_sweep(args) -> int:
    out = _require_out(args)
    cfg = _experiment_config(args, tau_values=args.taus)
    report = sweep_tau(cfg, workers=args.workers)
    report.to_csv(out)
    _write_manifest(out, "tau-sweep", args, [out])
    for dim, tau in sorted(report.best_tau().items()):
        print(f"best tau at dim {dim}: {tau:g}")
    print(f"wrote {out} ({len(report.rows)} rows)")
    return 0


def cmd_bench(args) -> int:
    out = _require_out(args)
    for name in args.mechanisms:
        if name not in SWEEP_MECHANISMS:
            raise _UsageError(
                f"invalid mechanism {name!r}; valid names: {', '.join(SWEEP_MECHANISMS)}")
    cfg = _experiment_config(args, tau_values=args.taus)
    if args.auto_tau:
        tau = sweep_tau(cfg, workers=args.workers).best_tau()
    else:
        tau = args.tau
    report = sweep_dimensions(cfg, tau=tau, workers=args.workers)
    report.to_csv(out)
    _write_manifest(out, "bench", args, [out])
    print(f"wrote {out} ({len(report.rows)} rows)")
    return 0


def cmd_project(args) -> int:
    out = _require_out(args)
    metric = MetricId.parse(args.metric)
    ds = read_dataset(args.data, metric)
    if args.pivot_ids is not None:
        ids = _parse_int_list(args.pivot_ids)
        if len(ids) != 2:
            raise _UsageError("--pivot-ids needs exactly two ids, e.g. 3,17")
        pair = PivotPair.from_dataset(ds, ids[0], ids[1])
    elif args.random_pivots:
        rng = np.random.default_rng(args.seed)
        pair = None
        for _ in range(16):
            i0, i1 = (int(v) for v in rng.choice(len(ds), size=2, replace=False))
            if not np.array_equal(ds.point(i0), ds.point(i1)):
                pair = PivotPair.from_dataset(ds, i0, i1)
                break
        if pair is None:
            raise ValueError("could not find two distinct pivot points")
    else:
        raise _UsageError("project needs --pivot-ids or --random-pivots")
    xy = project_dataset(ds, pair)
    write_projection_csv(out, xy)
    y_max = float(xy[:, 1].max(initial=0.0) * 1.05) or 1.0
    sidecar = {
        "kind": args.mechanism,
        "k": pair.k,
        "tau": args.tau,
        "t": args.threshold,
        "metric": metric.canonical(),
        "pivot_ids": [pair.i0, pair.i1],
        "boundaries": exclusion_boundaries(
            args.mechanism, pair.k, args.threshold,
            args.tau if args.mechanism == "ptolemaic" else None, y_max),
    }
    sidecar_path = out.with_name(out.name + ".sidecar.json")
    sidecar_path.write_text(json.dumps(sidecar, indent=2) + "\n", encoding="utf-8")
    _write_manifest(out, "project", args, [out, sidecar_path])
    print(f"wrote {out} and {sidecar_path}")
    return 0


def cmd_verify(args) -> int:
    if args.cases < 0:
        raise _UsageError("--cases must be nonnegative")
    if args.cases == 0:
        print("warning: 0 cases requested; all suites pass trivially")
    results = run_all(args.cases, args.seed, metric=args.metric)
    for res in results:
        print(res.line())
    if all(res.passed for res in results):
        print("verify: all suites passed")
        return 0
    print("verify: FAILURES detected")
    return 2


def _add_experiment_flags(p, pivot_list: bool):
    p.add_argument("--dims", type=_parse_int_list, default=[8, 10, 12, 14, 16, 18, 20])
    p.add_argument("--n-data", type=int, default=10000)
    p.add_argument("--n-queries", type=int, default=200)
    if pivot_list:
        p.add_argument("--pivots", type=_parse_int_list, default=[10])
    else:
        p.add_argument("--pivots", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--knn-k", type=int, default=5)
    p.add_argument("--metric", default="euclidean")
    p.add_argument("--paper-scale", action="store_true",
                   help="use 50k data points and 1k queries")
    p.add_argument("--in-dataset-pivots", action="store_true")
    p.add_argument("--global-mean-threshold", action="store_true",
                   help="one shared threshold: the mean per-query kNN distance")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="pivotpart", description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=None,
                        help="flat key=value file supplying flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a uniform dataset file")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--metric", default="euclidean")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("tau-sweep", help="ptolemaic rate over a tau grid")
    _add_experiment_flags(p, pivot_list=False)
    p.add_argument("--taus", type=_parse_taus, default=list(TAU_GRID))
    p.set_defaults(func=cmd_tau_sweep)

    p = sub.add_parser("bench", help="rates per dimension and mechanism")
    _add_experiment_flags(p, pivot_list=True)
    p.add_argument("--mechanisms", type=lambda s: [m.strip() for m in s.split(",") if m.strip()],
                   default=list(SWEEP_MECHANISMS))
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--auto-tau", action="store_true",
                   help="pick the best tau per dimension from a local sweep")
    p.add_argument("--taus", type=_parse_taus, default=list(TAU_GRID),
                   help="grid searched by --auto-tau")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("project", help="2D scatter export with boundary overlays")
    p.add_argument("--data", required=True)
    p.add_argument("--metric", default="euclidean")
    p.add_argument("--pivot-ids", default=None)
    p.add_argument("--random-pivots", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mechanism", default="ptolemaic",
                   choices=["ptolemaic", "hyperplane", "hilbert"])
    p.add_argument("--tau", type=float, default=1.3)
    p.add_argument("--threshold", type=float, default=0.3)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("verify", help="run the randomised correctness suites")
    p.add_argument("--cases", type=int, default=1000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--metric", default=None)
    p.set_defaults(func=cmd_verify)
    return parser


def _inject_config(argv: list) -> list:
    """Turn ``--config file`` into flags placed before the explicit ones.

    Explicit flags come later on the command line and therefore override
    the config file's values.
    """
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise _UsageError("--config needs a file path")
    values = _load_config_file(argv[idx + 1])
    rest = argv[:idx] + argv[idx + 2:]
    for pos, token in enumerate(rest):
        if not token.startswith("-"):
            break
    else:
        raise _UsageError("--config requires a subcommand")
    injected = []
    for key, value in values.items():
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "false"):
            if value.lower() == "true":
                injected.append(flag)
        else:
            injected += [flag, value]
    return rest[:pos + 1] + injected + rest[pos + 1:]


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(_inject_config(argv))
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
