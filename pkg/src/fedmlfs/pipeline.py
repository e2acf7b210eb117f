"""End-to-end experiment pipeline: load, partition, select, evaluate, report.

The labels of client instances are hidden from the protocol and revealed
only to the evaluation harness, which trains the classifier on the full
training partition restricted to the selected features.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, evaluation, kernels
from .dataset import (MultiLabelDataset, PartitionPlan, normalize_minmax,
                      partition_noniid, write_manifest)
from .errors import ConfigError
from .federation import RunConfig, RunResult, raw_data_cost, run_protocol
from .graph import write_ranking_table
from .profiles import profile_for
from .relevance import write_dependency_table


@dataclass
class RunOptions:
    """Everything a run needs beyond the dataset itself."""

    clients: int = 10
    seed: int = 0
    labeled_fraction: float = 0.2
    test_fraction: float = 0.3
    skew_alpha: float = 0.5
    radius_divisor: float = 1.2
    k_neighbors: int = 10
    damping: float = 0.85
    select_count: int | None = None
    std_agg: str = "pooled"
    distances: object = None
    bits_per_value: int = 64
    mlknn_k: int = 10
    mlknn_smooth: float = 1.0
    random_repeats: int = 20

    def resolved_select(self, ds: MultiLabelDataset, dataset_path=None) -> int:
        if self.select_count is not None:
            return self.select_count
        profile = profile_for(dataset_path) if dataset_path else None
        if profile is not None and profile.default_select <= ds.d:
            return profile.default_select
        raise ConfigError("no selection size given and no profile default "
                          "applies; pass --select")


def evaluate_subset(train: MultiLabelDataset, test: MultiLabelDataset,
                    feature_indices, k: int = 10,
                    smooth: float = 1.0) -> evaluation.RankingMetrics:
    """Train MLKNN on the chosen columns and score the test ranking."""
    model = evaluation.mlknn_train(train.select_features(feature_indices),
                                   k=k, smooth=smooth)
    scores = evaluation.mlknn_predict(
        model, test.features[:, np.asarray(feature_indices, dtype=np.intp)])
    return evaluation.evaluate_ranking(scores, test.labels)


def random_subsets(d: int, m: int, repeats: int, seed: int) -> list[list[int]]:
    if m > d:
        raise ConfigError(f"subset size {m} exceeds {d} features")
    rng = np.random.default_rng(seed)
    return [sorted(int(i) for i in rng.choice(d, size=m, replace=False))
            for _ in range(repeats)]


def _metrics_dict(m: evaluation.RankingMetrics) -> dict:
    return {
        "average_precision": m.average_precision,
        "coverage": m.coverage,
        "ranking_loss": m.ranking_loss,
        "skipped_no_positive": m.skipped_no_positive,
        "skipped_no_negative": m.skipped_no_negative,
    }


def _summary(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    return {"mean": float(arr.mean()),
            "std": float(arr.std(ddof=1)) if arr.size > 1 else 0.0}


def execute_run(ds: MultiLabelDataset, opts: RunOptions,
                dataset_path=None) -> tuple[dict, RunResult, PartitionPlan]:
    """Run the full pipeline once and assemble the report dictionary."""
    started = time.time()
    select_count = opts.resolved_select(ds, dataset_path)
    plan = partition_noniid(ds, opts.clients, opts.skew_alpha,
                            opts.labeled_fraction, opts.test_fraction,
                            opts.seed)
    config = RunConfig(select_count=select_count,
                       radius_divisor=opts.radius_divisor,
                       k_neighbors=opts.k_neighbors,
                       damping=opts.damping,
                       std_agg=opts.std_agg,
                       distances=opts.distances,
                       bits_per_value=opts.bits_per_value)
    result = run_protocol(plan, ds, config)
    protocol_done = time.time()

    train_indices = sorted(set(plan.server_labeled)
                           | {i for shard in plan.client_shards for i in shard})
    train = normalize_minmax(ds.subset(train_indices), result.global_mins,
                             result.global_maxs)
    test = normalize_minmax(ds.subset(plan.test_set), result.global_mins,
                            result.global_maxs, clip=True)

    selected_metrics = evaluate_subset(train, test, result.selected,
                                       k=opts.mlknn_k, smooth=opts.mlknn_smooth)
    control = {"subsets": [], "ap": [], "cv": [], "rl": []}
    for subset in random_subsets(ds.d, select_count, opts.random_repeats,
                                 seed=opts.seed + 1):
        m = evaluate_subset(train, test, subset, k=opts.mlknn_k,
                            smooth=opts.mlknn_smooth)
        control["subsets"].append(subset)
        control["ap"].append(m.average_precision)
        control["cv"].append(m.coverage)
        control["rl"].append(m.ranking_loss)
    finished = time.time()

    before = raw_data_cost(plan, ds, opts.distances, opts.bits_per_value)
    after = raw_data_cost(plan, ds, opts.distances, opts.bits_per_value,
                          feature_count=select_count)
    profile = profile_for(dataset_path) if dataset_path else None

    report = {
        "tool": {"name": "fedmlfs", "version": __version__,
                 "kernel_backend": kernels.BACKEND},
        "config": {
            "dataset": str(dataset_path) if dataset_path else ds.source_id,
            "clients": opts.clients,
            "seed": opts.seed,
            "labeled_fraction": opts.labeled_fraction,
            "test_fraction": opts.test_fraction,
            "skew_alpha": opts.skew_alpha,
            "radius_divisor": opts.radius_divisor,
            "k_neighbors": opts.k_neighbors,
            "damping": opts.damping,
            "select_count": select_count,
            "std_agg": opts.std_agg,
            "distances": (list(np.asarray(result.ledger.distances))),
            "bits_per_value": opts.bits_per_value,
            "mlknn_k": opts.mlknn_k,
            "mlknn_smooth": opts.mlknn_smooth,
            "random_repeats": opts.random_repeats,
            "random_seed": opts.seed + 1,
        },
        "dataset": {
            "source_id": ds.source_id,
            "instances": ds.n,
            "features": ds.d,
            "labels": ds.n_labels,
            "test_instances": len(plan.test_set),
            "server_labeled_instances": len(plan.server_labeled),
            "client_instances": [len(s) for s in plan.client_shards],
        },
        "selection": {
            "selected_features": list(result.selected),
            "scores": [float(s) for s in result.ranking.scores],
            "order": [int(i) for i in result.ranking.order],
            "pagerank_iterations": result.ranking.iterations,
            "pagerank_converged": result.ranking.converged,
        },
        "metrics": {
            "directions": {"average_precision": "higher_is_better",
                           "coverage": "lower_is_better",
                           "ranking_loss": "lower_is_better"},
            "selected": _metrics_dict(selected_metrics),
            "random_control": {
                "repeats": opts.random_repeats,
                "average_precision": _summary(control["ap"]),
                "coverage": _summary(control["cv"]),
                "ranking_loss": _summary(control["rl"]),
            },
        },
        "communication": {
            "protocol_bytes": result.ledger.total_bytes,
            "protocol_cost_bits": result.ledger.communication_cost(),
            "raw_cost_before_bits": before,
            "raw_cost_after_bits": after,
            "cost_ratio_after_over_before": after / before,
            "messages": len(result.ledger.entries),
        },
        "timing": {
            "protocol_seconds": protocol_done - started,
            "total_seconds": finished - started,
        },
    }
    if profile is not None:
        ours = selected_metrics.average_precision
        report["reference"] = {
            "dataset": profile.name,
            "reference_ap": profile.reference_ap,
            "ap_delta": ours - profile.reference_ap,
            "within_informational_band": abs(ours - profile.reference_ap) <= 0.08,
        }
    return report, result, plan


def render_text_report(report: dict) -> str:
    cfg = report["config"]
    met = report["metrics"]
    sel = met["selected"]
    ctl = met["random_control"]
    com = report["communication"]
    lines = [
        f"fedmlfs run: {cfg['dataset']}",
        f"  clients={cfg['clients']} seed={cfg['seed']} "
        f"labeled={cfg['labeled_fraction']} select={cfg['select_count']}",
        "",
        f"  {'metric':<20}{'selected':>12}{'random mean':>14}{'random std':>12}",
        f"  {'AP (higher better)':<20}{sel['average_precision']:>12.4f}"
        f"{ctl['average_precision']['mean']:>14.4f}"
        f"{ctl['average_precision']['std']:>12.4f}",
        f"  {'CV (lower better)':<20}{sel['coverage']:>12.4f}"
        f"{ctl['coverage']['mean']:>14.4f}{ctl['coverage']['std']:>12.4f}",
        f"  {'RL (lower better)':<20}{sel['ranking_loss']:>12.4f}"
        f"{ctl['ranking_loss']['mean']:>14.4f}{ctl['ranking_loss']['std']:>12.4f}",
        "",
        f"  skipped (no positive labels): {sel['skipped_no_positive']}",
        f"  protocol bytes: {com['protocol_bytes']}",
        f"  raw-shipping cost before/after selection: "
        f"{com['raw_cost_before_bits']:.0f} / {com['raw_cost_after_bits']:.0f} bits "
        f"(ratio {com['cost_ratio_after_over_before']:.4f})",
    ]
    if "reference" in report:
        ref = report["reference"]
        lines.append(f"  reference AP for {ref['dataset']}: "
                     f"{ref['reference_ap']:.4f} "
                     f"(delta {ref['ap_delta']:+.4f}, informational)")
    return "\n".join(lines) + "\n"


def write_run_artifacts(out_dir, report: dict, result: RunResult,
                        plan: PartitionPlan) -> dict:
    """Write report.json/.txt, the partition manifest and audit tables."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest_path = out / "partition.manifest"
    write_manifest(plan, manifest_path)
    write_ranking_table(result.ranking, out / "ranking.tsv")
    write_dependency_table(result.dependency, out / "dependency.tsv")
    report = dict(report)
    report["artifacts"] = {
        "manifest": str(manifest_path),
        "ranking": str(out / "ranking.tsv"),
        "dependency": str(out / "dependency.tsv"),
    }
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True)
                                     + "\n", encoding="utf-8")
    (out / "report.txt").write_text(render_text_report(report), encoding="utf-8")
    return report
