"""Command-line experiment runner.

Subcommands: `run` (one full pipeline execution), `sweep` (repeat over
labeled fractions), `random-baseline` (random-subset control only).
Exit codes: 0 ok, 2 configuration error, 3 protocol error, 4 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .dataset import feature_minmax, load_dataset, normalize_minmax, partition_noniid
from .errors import ConfigError, DataError, FedMLFSError, ProtocolError
from .pipeline import (RunOptions, evaluate_subset, execute_run, random_subsets,
                       render_text_report, write_run_artifacts)

OUT_ENV = "FEDMLFS_OUT"

_CONFIG_KEYS = {
    "dataset": "dataset", "format": "format", "labels": "labels",
    "clients": "clients", "seed": "seed", "lambda": "radius_divisor",
    "knn-k": "k_neighbors", "knn_k": "k_neighbors", "zeta": "damping",
    "select": "select", "m_selected": "select", "labeled": "labeled",
    "labeled_fraction": "labeled", "test-frac": "test_frac",
    "test_frac": "test_frac", "alpha": "alpha", "std-agg": "std_agg",
    "std_agg": "std_agg", "distances": "distances", "out": "out",
    "random-repeats": "random_repeats", "random_repeats": "random_repeats",
}


def _read_config_file(path) -> dict:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[_CONFIG_KEYS[key]] = value.strip()
    return values


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--dataset", help="ARFF or CSV dataset path")
    p.add_argument("--format", choices=("arff", "csv"),
                   help="dataset format (default: file extension)")
    p.add_argument("--labels", help="trailing label-column count or a "
                                    "sidecar XML label list")
    p.add_argument("--clients", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lambda", dest="radius_divisor", type=float, default=1.2,
                   help="radius divisor in [0.4, 2]")
    p.add_argument("--knn-k", dest="k_neighbors", type=int, default=10,
                   help="neighbor count for the relevance scoring")
    p.add_argument("--zeta", dest="damping", type=float, default=0.85,
                   help="PageRank damping in (0, 1)")
    p.add_argument("--select", type=int, default=None,
                   help="number of features to keep (profile default if known)")
    p.add_argument("--labeled", type=float, default=0.2,
                   help="fraction of training data labeled on the server")
    p.add_argument("--test-frac", dest="test_frac", type=float, default=0.3)
    p.add_argument("--alpha", type=float, default=0.5,
                   help="Dirichlet concentration of the client label skew")
    p.add_argument("--std-agg", dest="std_agg",
                   choices=("pooled", "weighted-mean"), default="pooled")
    p.add_argument("--distances", default=None,
                   help="client-server distance (scalar or comma list)")
    p.add_argument("--random-repeats", dest="random_repeats", type=int, default=20)
    p.add_argument("--out", default=None,
                   help=f"output directory (default: ${OUT_ENV} or ./runs)")


def _apply_config_file(args: argparse.Namespace) -> None:
    if not args.config:
        return
    file_values = _read_config_file(args.config)
    casts = {"clients": int, "seed": int, "radius_divisor": float,
             "k_neighbors": int, "damping": float, "select": int,
             "labeled": float, "test_frac": float, "alpha": float,
             "random_repeats": int}
    for dest, value in file_values.items():
        if getattr(args, "_explicit", None) and dest in args._explicit:
            continue
        setattr(args, dest, casts.get(dest, str)(value))


def _parse_distances(text):
    if text is None:
        return None
    if isinstance(text, (int, float)):
        return float(text)
    parts = [p for p in str(text).split(",") if p.strip()]
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"cannot parse distances {text!r}") from exc
    return values[0] if len(values) == 1 else values


def _parse_labels(spec):
    if spec is None:
        raise ConfigError("--labels is required (count or XML path)")
    try:
        return int(spec)
    except (TypeError, ValueError):
        pass
    from .dataset import read_label_names_xml
    return read_label_names_xml(spec)


def _load(args):
    if not args.dataset:
        raise ConfigError("--dataset is required")
    return load_dataset(args.dataset, fmt=args.format,
                        labels=_parse_labels(args.labels))


def _out_dir(args, suffix: str = "") -> Path:
    base = args.out or os.environ.get(OUT_ENV) or "runs"
    return Path(base) / suffix if suffix else Path(base)


def _options(args) -> RunOptions:
    return RunOptions(
        clients=args.clients,
        seed=args.seed,
        labeled_fraction=args.labeled,
        test_fraction=args.test_frac,
        skew_alpha=args.alpha,
        radius_divisor=args.radius_divisor,
        k_neighbors=args.k_neighbors,
        damping=args.damping,
        select_count=args.select,
        std_agg=args.std_agg,
        distances=_parse_distances(args.distances),
        random_repeats=args.random_repeats,
    )


def cmd_run(args) -> int:
    ds = _load(args)
    report, result, plan = execute_run(ds, _options(args),
                                       dataset_path=args.dataset)
    out = _out_dir(args)
    report = write_run_artifacts(out, report, result, plan)
    sys.stdout.write(render_text_report(report))
    sys.stdout.write(f"report: {out / 'report.json'}\n")
    return 0


def cmd_sweep(args) -> int:
    fractions = [float(f) for f in str(args.fractions).split(",") if f.strip()]
    if not fractions:
        raise ConfigError("empty labeled-fraction list")
    for f in fractions:
        if not 0.0 < f < 1.0:
            raise ConfigError(f"labeled fraction {f} outside (0, 1)")
    ds = _load(args)
    base = _out_dir(args)
    rows = []
    for frac in fractions:
        opts = _options(args)
        opts.labeled_fraction = frac
        report, result, plan = execute_run(ds, opts, dataset_path=args.dataset)
        sub = base / f"labeled-{frac:g}"
        write_run_artifacts(sub, report, result, plan)
        met = report["metrics"]
        rows.append({
            "labeled_fraction": frac,
            "average_precision": met["selected"]["average_precision"],
            "coverage": met["selected"]["coverage"],
            "ranking_loss": met["selected"]["ranking_loss"],
            "random_average_precision": met["random_control"]["average_precision"]["mean"],
            "random_coverage": met["random_control"]["coverage"]["mean"],
            "random_ranking_loss": met["random_control"]["ranking_loss"]["mean"],
        })
    base.mkdir(parents=True, exist_ok=True)
    (base / "sweep.json").write_text(json.dumps(rows, indent=2) + "\n",
                                     encoding="utf-8")
    header = list(rows[0].keys())
    lines = [",".join(header)]
    lines += [",".join(f"{row[h]:.6g}" for h in header) for row in rows]
    (base / "plotdata.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    for row in rows:
        sys.stdout.write(
            f"labeled={row['labeled_fraction']:g} "
            f"AP={row['average_precision']:.4f} "
            f"CV={row['coverage']:.4f} RL={row['ranking_loss']:.4f}\n")
    sys.stdout.write(f"sweep artifacts: {base}\n")
    return 0


def cmd_random_baseline(args) -> int:
    ds = _load(args)
    if args.select is None:
        raise ConfigError("--select is required for the random baseline")
    plan = partition_noniid(ds, args.clients, args.alpha, args.labeled,
                            args.test_frac, args.seed)
    train_idx = sorted(set(plan.server_labeled)
                       | {i for shard in plan.client_shards for i in shard})
    train_raw = ds.subset(train_idx)
    mins, maxs = feature_minmax(train_raw)
    train = normalize_minmax(train_raw, mins, maxs)
    test = normalize_minmax(ds.subset(plan.test_set), mins, maxs, clip=True)
    ap, cv, rl = [], [], []
    for subset in random_subsets(ds.d, args.select, args.repeats,
                                 seed=args.seed + 1):
        m = evaluate_subset(train, test, subset)
        ap.append(m.average_precision)
        cv.append(m.coverage)
        rl.append(m.ranking_loss)

    def stat(vals):
        arr = np.asarray(vals)
        return {"mean": float(arr.mean()),
                "std": float(arr.std(ddof=1)) if arr.size > 1 else 0.0}

    summary = {
        "dataset": args.dataset,
        "select_count": args.select,
        "repeats": args.repeats,
        "seed": args.seed,
        "average_precision": stat(ap),
        "coverage": stat(cv),
        "ranking_loss": stat(rl),
    }
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    (out / "random_baseline.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    sys.stdout.write(
        f"random baseline ({args.repeats} subsets of {args.select}): "
        f"AP={summary['average_precision']['mean']:.4f}"
        f"+-{summary['average_precision']['std']:.4f} "
        f"CV={summary['coverage']['mean']:.4f} "
        f"RL={summary['ranking_loss']['mean']:.4f}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fedmlfs",
        description="Semi-supervised federated multi-label feature selection")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="one full pipeline execution")
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="repeat the run over labeled fractions")
    _add_common(p_sweep)
    p_sweep.add_argument("--fractions", required=True,
                         help="comma list of labeled fractions, e.g. 0.1,0.2")
    p_sweep.set_defaults(func=cmd_sweep)

    p_rand = sub.add_parser("random-baseline",
                            help="evaluate random feature subsets only")
    _add_common(p_rand)
    p_rand.add_argument("--repeats", type=int, default=20)
    p_rand.set_defaults(func=cmd_random_baseline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    explicit = {a.lstrip("-").split("=", 1)[0].replace("-", "_")
                for a in (argv if argv is not None else sys.argv[1:])
                if a.startswith("--")}
    args._explicit = {
        "radius_divisor" if e == "lambda" else
        "k_neighbors" if e == "knn_k" else
        "damping" if e == "zeta" else
        "test_frac" if e == "test_frac" else e
        for e in explicit
    }
    try:
        _apply_config_file(args)
        return args.func(args)
    except ConfigError as exc:
        _emit_error(exc)
        return 2
    except ProtocolError as exc:
        _emit_error(exc)
        return 3
    except DataError as exc:
        _emit_error(exc)
        return 4
    except FedMLFSError as exc:
        _emit_error(exc)
        return 1


def _emit_error(exc: Exception) -> None:
    record = {"error": type(exc).__name__, "message": str(exc)}
    sys.stderr.write(json.dumps(record) + "\n")


if __name__ == "__main__":
    sys.exit(main())
