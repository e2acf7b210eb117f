"""MLKNN classifier and ranking metrics for multi-label evaluation.

The classifier follows the standard Bayesian knn scheme: per-label priors
with Laplace smoothing, and per-label posterior tables over the number of
neighbors carrying that label. All metrics are rank-based, so any strictly
monotone transform of the score matrix leaves them unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

DEFAULT_K = 10
DEFAULT_SMOOTH = 1.0


@dataclass
class MLKNNModel:
    k: int
    smooth: float
    prior_true: np.ndarray    # (L,)
    prior_false: np.ndarray   # (L,)
    cond_true: np.ndarray     # (k+1, L), column l sums to 1
    cond_false: np.ndarray    # (k+1, L)
    train_features: np.ndarray
    train_labels: np.ndarray


def _nearest_neighbors(queries: np.ndarray, pool: np.ndarray, k: int,
                       exclude_self: bool = False) -> np.ndarray:
    """Indices of the k nearest pool rows per query, ties by ascending index.

    Distances are exact Euclidean on row differences (no dot-product
    expansion) so duplicated points tie at exactly zero; computed in
    chunks to bound memory.
    """
    n_pool = pool.shape[0]
    chunk = max(1, int(4e6 / max(1, n_pool * pool.shape[1])))
    out = np.empty((queries.shape[0], k), dtype=np.intp)
    for start in range(0, queries.shape[0], chunk):
        block = queries[start:start + chunk]
        diff = block[:, None, :] - pool[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        if exclude_self:
            rows = np.arange(start, start + block.shape[0])
            dist[np.arange(block.shape[0]), rows] = np.inf
        order = np.argsort(dist, axis=1, kind="stable")
        out[start:start + block.shape[0]] = order[:, :k]
    return out


def mlknn_train(train, k: int = DEFAULT_K, smooth: float = DEFAULT_SMOOTH) -> MLKNNModel:
    if train.labels is None:
        raise ValueError("training dataset has no labels")
    x = np.asarray(train.features, dtype=np.float64)
    y = np.asarray(train.labels, dtype=np.int64)
    n, n_lab = y.shape
    if k >= n:
        raise ConfigError(f"k={k} needs more than k training instances, got {n}")

    prior_true = (smooth + y.sum(axis=0)) / (2.0 * smooth + n)
    prior_false = 1.0 - prior_true

    neighbors = _nearest_neighbors(x, x, k, exclude_self=True)
    counts = y[neighbors].sum(axis=1)  # (n, L): neighbors carrying each label

    cond_true = np.full((k + 1, n_lab), smooth, dtype=np.float64)
    cond_false = np.full((k + 1, n_lab), smooth, dtype=np.float64)
    for lab in range(n_lab):
        pos = y[:, lab] == 1
        cond_true[:, lab] += np.bincount(counts[pos, lab], minlength=k + 1)
        cond_false[:, lab] += np.bincount(counts[~pos, lab], minlength=k + 1)
    cond_true /= cond_true.sum(axis=0, keepdims=True)
    cond_false /= cond_false.sum(axis=0, keepdims=True)

    return MLKNNModel(k=k, smooth=smooth, prior_true=prior_true,
                      prior_false=prior_false, cond_true=cond_true,
                      cond_false=cond_false, train_features=x, train_labels=y)


def mlknn_predict(model: MLKNNModel, test_features) -> np.ndarray:
    """Per-label posterior confidence scores in [0, 1], one row per instance."""
    x = np.asarray(test_features, dtype=np.float64)
    n_lab = model.train_labels.shape[1]
    if x.ndim != 2 or x.shape[1] != model.train_features.shape[1]:
        raise ValueError("test feature dimensionality does not match training")
    if x.shape[0] == 0:
        return np.empty((0, n_lab), dtype=np.float64)
    neighbors = _nearest_neighbors(x, model.train_features, model.k)
    counts = model.train_labels[neighbors].sum(axis=1)  # (n_test, L)
    labs = np.arange(n_lab)
    p_true = model.prior_true * model.cond_true[counts, labs]
    p_false = model.prior_false * model.cond_false[counts, labs]
    return p_true / (p_true + p_false)


def ranks_from_scores(scores) -> np.ndarray:
    """1-based label ranks per instance, best score first, ties by label index."""
    scores = np.asarray(scores, dtype=np.float64)
    n, n_lab = scores.shape
    ranks = np.empty((n, n_lab), dtype=np.int64)
    cols = np.arange(n_lab)
    for i in range(n):
        order = np.lexsort((cols, -scores[i]))
        ranks[i, order] = cols + 1
    return ranks


def _as_bool_truth(truth) -> np.ndarray:
    truth = np.asarray(truth)
    return truth != 0


def average_precision(scores, truth) -> float:
    """Mean over instances of the mean precision at each true label's rank.

    Instances without positive labels are skipped; it is an error if every
    instance is skipped.
    """
    ranks = ranks_from_scores(scores)
    y = _as_bool_truth(truth)
    vals = []
    for i in range(y.shape[0]):
        true_ranks = np.sort(ranks[i, y[i]])
        if true_ranks.size == 0:
            continue
        hits = np.arange(1, true_ranks.size + 1)
        vals.append(float(np.mean(hits / true_ranks)))
    if not vals:
        raise ValueError("every instance lacks positive labels")
    return float(np.mean(vals))


def coverage(scores, truth) -> float:
    """Mean number of ranking steps needed to reach all true labels."""
    ranks = ranks_from_scores(scores)
    y = _as_bool_truth(truth)
    vals = [float(ranks[i, y[i]].max() - 1)
            for i in range(y.shape[0]) if y[i].any()]
    if not vals:
        raise ValueError("every instance lacks positive labels")
    return float(np.mean(vals))


def ranking_loss(scores, truth) -> float:
    """Fraction of (true, false) label pairs ranked in the wrong order."""
    ranks = ranks_from_scores(scores)
    y = _as_bool_truth(truth)
    vals = []
    for i in range(y.shape[0]):
        pos = ranks[i, y[i]]
        neg = ranks[i, ~y[i]]
        if pos.size == 0 or neg.size == 0:
            continue
        bad = (pos[:, None] > neg[None, :]).sum()
        vals.append(bad / (pos.size * neg.size))
    if not vals:
        raise ValueError("no instance has both positive and negative labels")
    return float(np.mean(vals))


@dataclass
class RankingMetrics:
    average_precision: float
    coverage: float
    ranking_loss: float
    skipped_no_positive: int
    skipped_no_negative: int


def evaluate_ranking(scores, truth) -> RankingMetrics:
    """All three metrics plus the skip counts the report has to surface."""
    y = _as_bool_truth(truth)
    no_pos = int((~y.any(axis=1)).sum())
    no_neg = int(y.all(axis=1).sum())
    return RankingMetrics(
        average_precision=average_precision(scores, truth),
        coverage=coverage(scores, truth),
        ranking_loss=ranking_loss(scores, truth),
        skipped_no_positive=no_pos,
        skipped_no_negative=no_neg,
    )
