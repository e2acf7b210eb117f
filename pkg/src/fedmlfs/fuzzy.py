"""Fuzzy similarity relations and the complementary entropy family.

A feature induces a fuzzy similarity relation on the instance universe:
two instances are similar to degree 1 - |v_i - v_j| when their normalized
values differ by at most an adaptive radius, and dissimilar (0) otherwise.
Per-instance fuzzy neighborhood sizes (row sums of the relation matrix)
drive an entropy-style uncertainty measure: a feature is informative when
its neighborhoods are small. Joint and mutual variants over pairs of
features yield a correlation distance used as the redundancy edge weight
of the feature graph.

All measures here are deterministic, pure and defined for any valid
relation matrix, including the degenerate all-ones matrix produced by a
constant feature.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError

RADIUS_DIVISOR_MIN = 0.4
RADIUS_DIVISOR_MAX = 2.0

_FRAME_HEADER = struct.Struct("<IId")  # feature_id, n, radius


@dataclass
class FuzzySimilarityMatrix:
    """Reflexive symmetric relation matrix for one feature.

    Every off-diagonal entry is either 0 or lies in [1 - radius, 1].
    """

    values: np.ndarray
    feature_id: int = 0
    radius: float = 1.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise ValueError("similarity matrix must be square")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def validate(self, atol: float = 0.0) -> None:
        """Check reflexivity, symmetry, range and the radius band."""
        v = self.values
        if not np.allclose(np.diag(v), 1.0, rtol=0.0, atol=atol):
            raise ValueError("relation is not reflexive")
        if not np.array_equal(v, v.T):
            raise ValueError("relation is not symmetric")
        if v.min() < -atol or v.max() > 1.0 + atol:
            raise ValueError("entries outside [0, 1]")
        off = v[~np.eye(self.n, dtype=bool)]
        band = off[off > 0.0]
        if band.size and band.min() < 1.0 - self.radius - 1e-12 - atol:
            raise ValueError("nonzero entry below 1 - radius")

    # -- framed binary form, the unit of communication-cost accounting --

    def to_bytes(self) -> bytes:
        header = _FRAME_HEADER.pack(self.feature_id, self.n, self.radius)
        return header + np.ascontiguousarray(self.values, dtype="<f8").tobytes()

    @classmethod
    def from_bytes(cls, frame: bytes) -> "FuzzySimilarityMatrix":
        feature_id, n, radius = _FRAME_HEADER.unpack_from(frame)
        expected = frame_length(n)
        if len(frame) != expected:
            raise ValueError(f"frame length {len(frame)} != expected {expected}")
        body = np.frombuffer(frame, dtype="<f8", offset=_FRAME_HEADER.size)
        values = body.reshape(n, n).astype(np.float64)
        return cls(values=values, feature_id=feature_id, radius=radius)


def frame_length(n: int) -> int:
    """Serialized size in bytes of an n x n relation frame."""
    return _FRAME_HEADER.size + 8 * n * n


def fuzzy_radius(global_std: float, radius_divisor: float) -> float:
    """Adaptive radius: the feature's global standard deviation / divisor.

    The divisor must lie in [0.4, 2]; a constant feature (std 0) gets
    radius 0, which makes its relation the crisp equality relation.
    """
    if not (RADIUS_DIVISOR_MIN <= radius_divisor <= RADIUS_DIVISOR_MAX):
        raise ConfigError(
            f"radius divisor {radius_divisor} outside "
            f"[{RADIUS_DIVISOR_MIN}, {RADIUS_DIVISOR_MAX}]")
    if global_std < 0:
        raise ValueError("standard deviation must be nonnegative")
    return global_std / radius_divisor


def build_similarity_matrix(column, radius: float,
                            feature_id: int = 0) -> FuzzySimilarityMatrix:
    """Build the relation matrix of one normalized feature column."""
    col = np.asarray(column, dtype=np.float64)
    if col.ndim != 1:
        raise ValueError("expected a 1-d feature column")
    values = kernels.similarity_matrix(col, float(radius))
    return FuzzySimilarityMatrix(values=values, feature_id=feature_id,
                                 radius=float(radius))


def _matrix(sim) -> np.ndarray:
    return sim.values if isinstance(sim, FuzzySimilarityMatrix) else np.asarray(sim, dtype=np.float64)


def _pair(a, b):
    ma, mb = _matrix(a), _matrix(b)
    if ma.shape != mb.shape:
        raise ValueError(f"relation shapes differ: {ma.shape} vs {mb.shape}")
    return ma, mb


def fuzzy_cardinality_row(sim, i: int) -> float:
    """Size of instance i's fuzzy neighborhood: the i-th row sum."""
    m = _matrix(sim)
    if not 0 <= i < m.shape[0]:
        raise IndexError(f"instance index {i} out of range")
    return float(kernels.row_sums(m)[i])


def complementary_entropy(sim) -> float:
    """Uncertainty of one relation: mean of (1 - neighborhood/n) over instances.

    Ranges from 0 (all instances mutually similar) to 1 - 1/n (identity
    relation, every instance isolated).
    """
    m = _matrix(sim)
    n = m.shape[0]
    if n == 0:
        raise ValueError("empty universe")
    total = float(kernels.row_sums(m).sum())
    return 1.0 - total / (n * n)


def complementary_joint_entropy(a, b) -> float:
    """Joint uncertainty of two relations via row-wise min intersections."""
    ma, mb = _pair(a, b)
    n = ma.shape[0]
    total = float(kernels.intersection_row_sums(ma, mb).sum())
    return 1.0 - total / (n * n)


def complementary_conditional_entropy(a, b) -> float:
    """Residual uncertainty of `a` once `b` is known; equals CJE(a,b) - CE(b)."""
    ma, mb = _pair(a, b)
    n = ma.shape[0]
    tb = float(kernels.row_sums(mb).sum())
    tab = float(kernels.intersection_row_sums(ma, mb).sum())
    return (tb - tab) / (n * n)


def complementary_mutual_information(a, b) -> float:
    """Shared information of two relations; equals CE(a) + CE(b) - CJE(a,b)."""
    ma, mb = _pair(a, b)
    n = ma.shape[0]
    ta = float(kernels.row_sums(ma).sum())
    tb = float(kernels.row_sums(mb).sum())
    tab = float(kernels.intersection_row_sums(ma, mb).sum())
    return 1.0 - (ta + tb - tab) / (n * n)


def correlation_distance(a, b) -> float:
    """Joint entropy minus mutual information; nonnegative, zero iff a == b.

    Computed as (T_a + T_b - 2 T_ab) / n^2 with T the cardinality totals,
    which cannot round below zero.
    """
    ma, mb = _pair(a, b)
    n = ma.shape[0]
    ta = float(kernels.row_sums(ma).sum())
    tb = float(kernels.row_sums(mb).sum())
    tab = float(kernels.intersection_row_sums(ma, mb).sum())
    return (ta + tb - 2.0 * tab) / (n * n)


def fuzzy_lower_approximation(rel, memberships) -> np.ndarray:
    """Lower approximation: per instance, inf over max(1 - R(x,y), X(y))."""
    m = _matrix(rel)
    x = np.asarray(memberships, dtype=np.float64)
    if x.shape != (m.shape[0],):
        raise ValueError("membership vector length does not match the universe")
    return np.min(np.maximum(1.0 - m, x[None, :]), axis=1)


def fuzzy_upper_approximation(rel, memberships) -> np.ndarray:
    """Upper approximation: per instance, sup over min(R(x,y), X(y))."""
    m = _matrix(rel)
    x = np.asarray(memberships, dtype=np.float64)
    if x.shape != (m.shape[0],):
        raise ValueError("membership vector length does not match the universe")
    return np.max(np.minimum(m, x[None, :]), axis=1)


@dataclass
class EntropyTable:
    """Per-feature entropies and all-pairs joint/mutual/distance tables."""

    ce: np.ndarray          # (d,)
    cje: np.ndarray         # (d, d), symmetric, diag == ce
    cmi: np.ndarray         # (d, d), symmetric, diag == ce
    corr_dist: np.ndarray   # (d, d), symmetric nonnegative, zero diag
    universe_size: int


def _table_from_totals(totals: np.ndarray, n: int) -> EntropyTable:
    nn = float(n) * float(n)
    diag = np.diag(totals).copy()
    ce = 1.0 - diag / nn
    cje = 1.0 - totals / nn
    cmi = ce[:, None] + ce[None, :] - cje
    corr = (diag[:, None] + diag[None, :] - 2.0 * totals) / nn
    np.fill_diagonal(corr, 0.0)
    return EntropyTable(ce=ce, cje=cje, cmi=cmi, corr_dist=corr, universe_size=n)


def entropy_table(mats) -> EntropyTable:
    """Build the full table from one relation matrix per feature."""
    arrays = [_matrix(m) for m in mats]
    if not arrays:
        raise ValueError("no relation matrices given")
    n = arrays[0].shape[0]
    for m in arrays:
        if m.shape != (n, n):
            raise ValueError("relation matrices differ in size")
    stack = np.stack(arrays)
    totals = kernels.pairwise_min_totals(stack)
    return _table_from_totals(totals, n)


def entropy_table_from_blocks(blocks_per_client) -> EntropyTable:
    """Build the table from per-client diagonal blocks of the global relations.

    `blocks_per_client` is a sequence with one (d, n_m, n_m) stack per
    client. Cross-client entries of the aggregated relations are zero, so
    cardinality totals decompose into per-block totals; this path never
    materializes the (sum n_m)^2 matrices.
    """
    blocks = [np.asarray(b, dtype=np.float64) for b in blocks_per_client]
    if not blocks:
        raise ValueError("no blocks given")
    d = blocks[0].shape[0]
    totals = np.zeros((d, d), dtype=np.float64)
    n = 0
    for stack in blocks:
        if stack.ndim != 3 or stack.shape[0] != d or stack.shape[1] != stack.shape[2]:
            raise ValueError("each block stack must be (d, n_m, n_m)")
        totals += kernels.pairwise_min_totals(stack)
        n += stack.shape[1]
    return _table_from_totals(totals, n)
