"""Server-side feature-label relevance.

Label-space similarity between labeled instances picks, per instance, a
soft same-class set ST (most label-similar peers) and a different-class
set DT (most label-dissimilar). A feature is relevant when its fuzzy
relation separates each instance from its DT peers: the knn lower
approximation averages (1 - similarity) over DT, and the dependency
degree averages that over all labeled instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fuzzy import FuzzySimilarityMatrix, _matrix


@dataclass
class LabelSimilarityMatrix:
    """Centered cosine similarity of binary label rows, in [-1, 1].

    Rows with zero label variance (all-zero or all-one) are flagged and
    contribute 0 similarity to everyone, including themselves.
    """

    values: np.ndarray
    flagged: np.ndarray  # (s,) bool, zero-variance label rows

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass
class NeighborSets:
    st: list[tuple[int, ...]]
    dt: list[tuple[int, ...]]
    k: int


@dataclass
class DependencyVector:
    """Per-feature knn fuzzy dependency degrees, each in [0, 1]."""

    values: np.ndarray
    k: int
    radius_divisor: float | None = None


def label_similarity(labels) -> LabelSimilarityMatrix:
    labels = np.asarray(labels, dtype=np.float64)
    if labels.ndim != 2 or labels.shape[0] < 2:
        raise ValueError("need at least two labeled instances")
    if labels.shape[1] < 2:
        raise ValueError("label-space similarity needs at least two labels")
    centered = labels - labels.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(centered, axis=1)
    flagged = norms == 0.0
    safe = np.where(flagged, 1.0, norms)
    unit = centered / safe[:, None]
    sim = np.clip(unit @ unit.T, -1.0, 1.0)
    sim[flagged, :] = 0.0
    sim[:, flagged] = 0.0
    np.fill_diagonal(sim, np.where(flagged, 0.0, 1.0))
    return LabelSimilarityMatrix(values=sim, flagged=flagged)


def select_neighbor_sets(sim: LabelSimilarityMatrix, k: int) -> NeighborSets:
    """Pick per-instance ST (same-class) and DT (different-class) sets.

    Candidates with nonnegative similarity form the ST pool (flagged rows
    excluded) and negative ones the DT pool; each side takes its best k
    with ties broken by ascending index. Shortfalls are filled from
    candidates the other side did not claim, so the sets stay disjoint.
    """
    s = sim.n
    if k < 1:
        raise ValueError("k must be at least 1")
    if k >= s:
        raise ValueError(f"k={k} needs at least k+1 labeled instances, got {s}")
    k_eff = min(k, s - 1)
    values = sim.values
    st_sets: list[tuple[int, ...]] = []
    dt_sets: list[tuple[int, ...]] = []
    for i in range(s):
        cands = [j for j in range(s) if j != i]
        st_pool = sorted((j for j in cands
                          if values[i, j] >= 0.0 and not sim.flagged[j]),
                         key=lambda j: (-values[i, j], j))
        dt_pool = sorted((j for j in cands if values[i, j] < 0.0),
                         key=lambda j: (values[i, j], j))
        st = st_pool[:k_eff]
        dt = dt_pool[:k_eff]
        claimed = set(st) | set(dt)
        spare = [j for j in cands if j not in claimed]
        if len(st) < k_eff:
            extra = sorted(spare, key=lambda j: (-values[i, j], j))
            st += extra[:k_eff - len(st)]
            spare = [j for j in spare if j not in set(st)]
        if len(dt) < k_eff:
            extra = sorted(spare, key=lambda j: (values[i, j], j))
            dt += extra[:k_eff - len(dt)]
        st_sets.append(tuple(st))
        dt_sets.append(tuple(dt))
    return NeighborSets(st=st_sets, dt=dt_sets, k=k)


def knn_lower_approximation(sim_f, dt: tuple[int, ...], i: int) -> float:
    """Mean separation of instance i from its DT peers under one feature."""
    m = _matrix(sim_f)
    if len(dt) == 0:
        raise ValueError(f"instance {i} has an empty different-class set")
    return float(np.mean([1.0 - m[i, j] for j in dt]))


def knn_upper_approximation(sim_f, st: tuple[int, ...], i: int) -> float:
    """Mean similarity of instance i to its ST peers under one feature."""
    m = _matrix(sim_f)
    if len(st) == 0:
        raise ValueError(f"instance {i} has an empty same-class set")
    return float(np.mean([m[i, j] for j in st]))


def dependency_degree(sim_f, sets: NeighborSets) -> float:
    """Feature-label relevance: mean knn lower approximation over instances."""
    m = _matrix(sim_f)
    s = m.shape[0]
    if s == 0:
        raise ValueError("no labeled instances")
    if len(sets.dt) != s:
        raise ValueError("neighbor sets built for a different instance count")
    return float(np.mean([knn_lower_approximation(m, sets.dt[i], i)
                          for i in range(s)]))


def relevance_vector(server_labeled, sims: list[FuzzySimilarityMatrix],
                     k: int, radius_divisor: float | None = None) -> DependencyVector:
    """Dependency degree of every feature over the server's labeled set."""
    if server_labeled.labels is None:
        raise ValueError("server dataset has no labels")
    sets = select_neighbor_sets(label_similarity(server_labeled.labels), k)
    values = np.array([dependency_degree(sim, sets) for sim in sims])
    return DependencyVector(values=values, k=k, radius_divisor=radius_divisor)


def write_dependency_table(dep: DependencyVector, path) -> None:
    """Two-column audit table: feature index and dependency degree."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("feature_id\tdependency\n")
        for i, v in enumerate(dep.values):
            fh.write(f"{i}\t{v:.17g}\n")
