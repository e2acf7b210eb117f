"""Feature graph construction and weighted PageRank ranking.

Vertices are features, vertex weights are feature-label dependency
degrees, edge weights are pairwise correlation distances. A zero
correlation distance means two features are informationally redundant,
so zero-weight edges are treated as absent and never channel score.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .relevance import DependencyVector

DEFAULT_DAMPING = 0.85


@dataclass
class FeatureGraph:
    vertex_weights: np.ndarray   # (d,), nonnegative, normalized to sum 1
    edge_weights: np.ndarray     # (d, d) symmetric, zero diagonal
    damping: float


@dataclass
class FeatureRanking:
    scores: np.ndarray
    order: np.ndarray            # feature indices, best first
    iterations: int
    converged: bool


def build_graph(relevance, corr_dist, damping: float = DEFAULT_DAMPING) -> FeatureGraph:
    w = relevance.values if isinstance(relevance, DependencyVector) else np.asarray(relevance, dtype=np.float64)
    edges = np.asarray(corr_dist, dtype=np.float64).copy()
    d = w.shape[0]
    if edges.shape != (d, d):
        raise ValueError(f"edge matrix shape {edges.shape} does not match "
                         f"{d} vertices")
    if not np.array_equal(edges, edges.T):
        raise ValueError("edge weights must be symmetric")
    if edges.min() < 0.0:
        raise ValueError("negative edge weight")
    if w.min() < 0.0:
        raise ValueError("negative vertex weight")
    if not 0.0 < damping < 1.0:
        raise ConfigError(f"damping {damping} outside (0, 1)")
    np.fill_diagonal(edges, 0.0)
    total = w.sum()
    # All-zero dependencies carry no ranking signal; fall back to uniform.
    w = np.full(d, 1.0 / d) if total == 0.0 else w / total
    return FeatureGraph(vertex_weights=w, edge_weights=edges, damping=damping)


def weighted_pagerank(g: FeatureGraph, tol: float = 1e-10,
                      max_iter: int = 200) -> FeatureRanking:
    """Fixed-point iteration of the vertex- and edge-weighted PageRank.

    Each feature keeps (1 - damping) of its own weight and receives a
    damping-scaled share of every neighbor's score, proportional to the
    connecting edge weight over the neighbor's total edge weight. Vertices
    without edges send nothing. Iteration starts from the vertex weights
    and stops when the L1 change drops below `tol`.
    """
    if tol <= 0.0:
        raise ValueError("tolerance must be positive")
    w = g.vertex_weights
    out_totals = g.edge_weights.sum(axis=1)
    safe = np.where(out_totals == 0.0, 1.0, out_totals)
    # transfer[i, j]: share of feature j's score flowing to feature i
    transfer = g.edge_weights / safe[None, :]
    transfer[:, out_totals == 0.0] = 0.0

    scores = w.copy()
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        nxt = (1.0 - g.damping) * w + g.damping * (transfer @ scores)
        change = np.abs(nxt - scores).sum()
        scores = nxt
        if change < tol:
            converged = True
            break
    order = np.argsort(-scores, kind="stable")
    return FeatureRanking(scores=scores, order=order,
                          iterations=iterations, converged=converged)


def select_top(ranking: FeatureRanking, m: int) -> list[int]:
    d = ranking.scores.shape[0]
    if not 1 <= m <= d:
        raise ConfigError(f"selection size {m} outside [1, {d}]")
    return [int(i) for i in ranking.order[:m]]


def write_ranking_table(ranking: FeatureRanking, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("rank\tfeature_id\tscore\n")
        for rank, fid in enumerate(ranking.order, start=1):
            fh.write(f"{rank}\t{int(fid)}\t{ranking.scores[fid]:.17g}\n")
