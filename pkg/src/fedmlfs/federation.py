"""Deterministic simulation of the client/server feature-selection protocol.

Rounds, in order: clients report per-feature min/max (the server folds in
its own labeled data) and receive global bounds; clients report sufficient
statistics (count, mean, squared deviations) from which the server pools
an exact global standard deviation per feature and broadcasts it; clients
build per-feature fuzzy similarity matrices with radius std/divisor and
ship them; the server combines the client blocks into global relations,
derives the redundancy table, scores relevance on its labeled set, ranks
features by weighted PageRank and broadcasts the selected subset.

Cross-client similarity is unknowable without sharing raw values, so the
aggregated global relation is block diagonal: client blocks on the
diagonal, zeros elsewhere. This is the highest-impact modeling choice in
the package; every downstream quantity treats the universe as the union
of client shards under that block structure.

Every message is serialized through a framed little-endian binary format
and its exact byte length lands in the cost ledger.
"""

from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from . import fuzzy, graph, relevance
from .dataset import MultiLabelDataset, PartitionPlan, feature_minmax, normalize_minmax
from .errors import ConfigError, ProtocolError

SERVER_ID = "server"


class Round(enum.Enum):
    MIN_MAX_REPORT = "MinMaxReport"
    MIN_MAX_BROADCAST = "MinMaxBroadcast"
    STATS_REPORT = "StatsReport"
    GLOBAL_STD_BROADCAST = "GlobalStdBroadcast"
    SIMILARITY_REPORT = "SimilarityReport"
    DONE = "Done"


@dataclass(frozen=True)
class FeatureStats:
    """Sufficient statistics for exact pooled standard deviation."""

    count: int
    mean: float
    m2: float  # sum of squared deviations from the mean

    @classmethod
    def from_column(cls, column) -> "FeatureStats":
        col = np.asarray(column, dtype=np.float64)
        if col.size == 0:
            raise ValueError("cannot summarize an empty column")
        mean = float(col.mean())
        return cls(count=col.size, mean=mean, m2=float(((col - mean) ** 2).sum()))

    def combine(self, other: "FeatureStats") -> "FeatureStats":
        total = self.count + other.count
        delta = other.mean - self.mean
        mean = (self.count * self.mean + other.count * other.mean) / total
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / total
        return FeatureStats(count=total, mean=mean, m2=m2)

    @property
    def std(self) -> float:
        if self.count < 2:
            return 0.0
        return math.sqrt(self.m2 / (self.count - 1))


def aggregate_std(stats: list[FeatureStats], mode: str = "pooled") -> float:
    """Global standard deviation of one feature from per-client statistics.

    "pooled" combines (count, mean, m2) exactly, matching the standard
    deviation of the concatenated data. "weighted-mean" is the naive
    count-weighted average of client standard deviations, kept for
    sensitivity comparison.
    """
    if not stats:
        raise ValueError("no statistics to aggregate")
    if mode == "pooled":
        merged = stats[0]
        for s in stats[1:]:
            merged = merged.combine(s)
        if merged.count < 2:
            raise ValueError("pooled standard deviation needs at least 2 values")
        return merged.std
    if mode == "weighted-mean":
        weights = np.array([s.count for s in stats], dtype=np.float64)
        return float(np.dot(weights, [s.std for s in stats]) / weights.sum())
    raise ConfigError(f"unknown std aggregation mode {mode!r}")


def aggregate_similarity(mats: list[fuzzy.FuzzySimilarityMatrix]) -> fuzzy.FuzzySimilarityMatrix:
    """Block-diagonal global relation from per-client relations of one feature."""
    if not mats:
        raise ValueError("no matrices to aggregate")
    radius = mats[0].radius
    feature_id = mats[0].feature_id
    for m in mats[1:]:
        if m.radius != radius:
            raise ProtocolError(
                f"feature {feature_id}: radius mismatch across clients "
                f"({m.radius} vs {radius})")
        if m.feature_id != feature_id:
            raise ProtocolError("matrices belong to different features")
    total = sum(m.n for m in mats)
    values = np.zeros((total, total), dtype=np.float64)
    at = 0
    for m in mats:
        values[at:at + m.n, at:at + m.n] = m.values
        at += m.n
    return fuzzy.FuzzySimilarityMatrix(values=values, feature_id=feature_id,
                                       radius=radius)


# ---------------------------------------------------------------------------
# Wire formats. Each payload has one framed little-endian encoding; the
# encoded length is what the cost ledger records.

_U32 = struct.Struct("<I")
_BOUNDS = struct.Struct("<dd")
_STATS = struct.Struct("<Qdd")
_F64 = struct.Struct("<d")


def encode_bounds(mins, maxs) -> bytes:
    mins = np.asarray(mins, dtype=np.float64)
    maxs = np.asarray(maxs, dtype=np.float64)
    parts = [_U32.pack(mins.size)]
    parts += [_BOUNDS.pack(lo, hi) for lo, hi in zip(mins, maxs)]
    return b"".join(parts)


def decode_bounds(buf: bytes) -> tuple[np.ndarray, np.ndarray]:
    (d,) = _U32.unpack_from(buf)
    pairs = [_BOUNDS.unpack_from(buf, _U32.size + i * _BOUNDS.size)
             for i in range(d)]
    arr = np.array(pairs, dtype=np.float64)
    return arr[:, 0], arr[:, 1]


def encode_stats(stats: list[FeatureStats]) -> bytes:
    parts = [_U32.pack(len(stats))]
    parts += [_STATS.pack(s.count, s.mean, s.m2) for s in stats]
    return b"".join(parts)


def decode_stats(buf: bytes) -> list[FeatureStats]:
    (d,) = _U32.unpack_from(buf)
    out = []
    for i in range(d):
        count, mean, m2 = _STATS.unpack_from(buf, _U32.size + i * _STATS.size)
        out.append(FeatureStats(count=count, mean=mean, m2=m2))
    return out


def encode_std_vector(stds) -> bytes:
    stds = np.asarray(stds, dtype=np.float64)
    return _U32.pack(stds.size) + stds.astype("<f8").tobytes()


def decode_std_vector(buf: bytes) -> np.ndarray:
    (d,) = _U32.unpack_from(buf)
    return np.frombuffer(buf, dtype="<f8", count=d, offset=_U32.size).copy()


def encode_similarities(mats: list[fuzzy.FuzzySimilarityMatrix]) -> bytes:
    return _U32.pack(len(mats)) + b"".join(m.to_bytes() for m in mats)


def decode_similarities(buf: bytes) -> list[fuzzy.FuzzySimilarityMatrix]:
    (d,) = _U32.unpack_from(buf)
    out = []
    at = _U32.size
    for _ in range(d):
        (_, n, _r) = struct.unpack_from("<IId", buf, at)
        size = fuzzy.frame_length(n)
        out.append(fuzzy.FuzzySimilarityMatrix.from_bytes(buf[at:at + size]))
        at += size
    return out


def encode_selection(indices) -> bytes:
    return _U32.pack(len(indices)) + b"".join(_U32.pack(i) for i in indices)


def decode_selection(buf: bytes) -> list[int]:
    (m,) = _U32.unpack_from(buf)
    return [_U32.unpack_from(buf, _U32.size + i * _U32.size)[0] for i in range(m)]


_ENCODERS = {
    Round.MIN_MAX_REPORT: lambda p: encode_bounds(*p),
    Round.MIN_MAX_BROADCAST: lambda p: encode_bounds(*p),
    Round.STATS_REPORT: encode_stats,
    Round.GLOBAL_STD_BROADCAST: encode_std_vector,
    Round.SIMILARITY_REPORT: encode_similarities,
    Round.DONE: encode_selection,
}


@dataclass
class ProtocolMessage:
    round: Round
    sender: str
    receiver: str
    payload: object
    payload_bytes: int = -1

    def __post_init__(self):
        if self.payload_bytes < 0:
            self.payload_bytes = len(_ENCODERS[self.round](self.payload))


@dataclass
class CostLedger:
    """Distance-weighted byte accounting of every protocol message."""

    distances: np.ndarray  # (M,), client i <-> server
    bits_per_value: int = 64
    entries: list[tuple[str, str, str, int]] = field(default_factory=list)

    def record(self, msg: ProtocolMessage) -> None:
        self.entries.append((msg.round.value, msg.sender, msg.receiver,
                             msg.payload_bytes))

    def _client_of(self, sender: str, receiver: str) -> int:
        party = receiver if sender == SERVER_ID else sender
        return int(party.split(":", 1)[1])

    @property
    def total_bytes(self) -> int:
        return sum(b for *_ignored, b in self.entries)

    def communication_cost(self) -> float:
        """Sum over messages of link distance times message size in bits."""
        return float(sum(self.distances[self._client_of(s, r)] * b * 8
                         for _rnd, s, r, b in self.entries))


def communication_cost(ledger: CostLedger) -> float:
    return ledger.communication_cost()


def raw_data_cost(plan: PartitionPlan, ds: MultiLabelDataset, distances,
                  bits_per_value: int = 64, feature_count: int | None = None) -> float:
    """Cost of shipping raw client shards: sum of D_i * N_i * F_i * b."""
    dist = _as_distances(distances, plan.m_clients)
    if (dist < 0).any():
        raise ValueError("distances must be nonnegative")
    f = ds.d if feature_count is None else feature_count
    return float(sum(dist[i] * len(shard) * f * bits_per_value
                     for i, shard in enumerate(plan.client_shards)))


def _as_distances(distances, m: int) -> np.ndarray:
    if distances is None:
        return np.ones(m)
    if np.isscalar(distances):
        return np.full(m, float(distances))
    arr = np.asarray(distances, dtype=np.float64)
    if arr.shape != (m,):
        raise ConfigError(f"expected {m} distances, got {arr.shape}")
    return arr


# ---------------------------------------------------------------------------
# Party state machines.


class ClientState:
    """One client: an unlabeled feature shard and its protocol phase."""

    def __init__(self, client_id: int, features: np.ndarray):
        self.client_id = client_id
        self.party = f"client:{client_id}"
        self.features = np.asarray(features, dtype=np.float64)
        self.phase = Round.MIN_MAX_REPORT
        self.normalized: np.ndarray | None = None
        self.radii: np.ndarray | None = None
        self.matrices: list[fuzzy.FuzzySimilarityMatrix] | None = None
        self.selected: list[int] | None = None

    def _expect(self, phase: Round) -> None:
        if self.phase is not phase:
            raise ProtocolError(f"{self.party}: expected round "
                                f"{self.phase.value}, got {phase.value}")

    def report_minmax(self) -> ProtocolMessage:
        self._expect(Round.MIN_MAX_REPORT)
        self.phase = Round.MIN_MAX_BROADCAST
        payload = (self.features.min(axis=0), self.features.max(axis=0))
        return ProtocolMessage(Round.MIN_MAX_REPORT, self.party, SERVER_ID, payload)

    def receive_bounds(self, msg: ProtocolMessage) -> None:
        self._expect(Round.MIN_MAX_BROADCAST)
        mins, maxs = msg.payload
        span = maxs - mins
        safe = np.where(span == 0.0, 1.0, span)
        scaled = (self.features - mins) / safe
        scaled[:, span == 0.0] = 0.0
        self.normalized = scaled
        self.phase = Round.STATS_REPORT

    def report_stats(self) -> ProtocolMessage:
        self._expect(Round.STATS_REPORT)
        self.phase = Round.GLOBAL_STD_BROADCAST
        payload = [FeatureStats.from_column(self.normalized[:, p])
                   for p in range(self.normalized.shape[1])]
        return ProtocolMessage(Round.STATS_REPORT, self.party, SERVER_ID, payload)

    def receive_global_std(self, msg: ProtocolMessage, radius_divisor: float) -> None:
        self._expect(Round.GLOBAL_STD_BROADCAST)
        stds = np.asarray(msg.payload, dtype=np.float64)
        self.radii = np.array([fuzzy.fuzzy_radius(s, radius_divisor) for s in stds])
        self.phase = Round.SIMILARITY_REPORT

    def report_similarities(self) -> ProtocolMessage:
        self._expect(Round.SIMILARITY_REPORT)
        self.phase = Round.DONE
        self.matrices = [
            fuzzy.build_similarity_matrix(self.normalized[:, p], self.radii[p],
                                          feature_id=p)
            for p in range(self.normalized.shape[1])
        ]
        return ProtocolMessage(Round.SIMILARITY_REPORT, self.party, SERVER_ID,
                               self.matrices)

    def receive_selection(self, msg: ProtocolMessage) -> None:
        self._expect(Round.DONE)
        self.selected = list(msg.payload)


class ServerState:
    """The coordinating party: aggregates reports and runs the scoring."""

    def __init__(self, labeled: MultiLabelDataset, m_clients: int, config: "RunConfig"):
        if labeled.labels is None:
            raise ValueError("server dataset must be labeled")
        self.labeled_raw = labeled
        self.m_clients = m_clients
        self.config = config
        self.client_counts: dict[int, int] = {}
        self.global_mins: np.ndarray | None = None
        self.global_maxs: np.ndarray | None = None
        self.labeled_norm: MultiLabelDataset | None = None
        self.global_std: np.ndarray | None = None
        self.radii: np.ndarray | None = None
        self.blocks: dict[int, list[fuzzy.FuzzySimilarityMatrix]] = {}
        self.entropy: fuzzy.EntropyTable | None = None
        self.dependency: relevance.DependencyVector | None = None
        self.server_matrices: list[fuzzy.FuzzySimilarityMatrix] | None = None
        self.ranking: graph.FeatureRanking | None = None
        self.selected: list[int] | None = None

    def _check_complete(self, rnd: Round, messages: list[ProtocolMessage]) -> dict[int, ProtocolMessage]:
        by_client: dict[int, ProtocolMessage] = {}
        for msg in messages:
            if msg.round is not rnd:
                raise ProtocolError(f"round {rnd.value}: stray "
                                    f"{msg.round.value} message from {msg.sender}")
            cid = int(msg.sender.split(":", 1)[1])
            by_client[cid] = msg
        missing = [i for i in range(self.m_clients) if i not in by_client]
        if missing:
            raise ProtocolError(f"round {rnd.value}: missing report from "
                                f"client {missing[0]}")
        return by_client

    def aggregate_bounds(self, messages: list[ProtocolMessage]) -> tuple[np.ndarray, np.ndarray]:
        by_client = self._check_complete(Round.MIN_MAX_REPORT, messages)
        d = self.labeled_raw.d
        mins, maxs = feature_minmax(self.labeled_raw)
        for cid in sorted(by_client):
            lo, hi = by_client[cid].payload
            if lo.shape != (d,):
                raise ProtocolError(f"client {cid}: expected {d} feature "
                                    f"bounds, got {lo.shape[0]}")
            mins = np.minimum(mins, lo)
            maxs = np.maximum(maxs, hi)
        self.global_mins, self.global_maxs = mins, maxs
        self.labeled_norm = normalize_minmax(self.labeled_raw, mins, maxs)
        return mins, maxs

    def aggregate_stats(self, messages: list[ProtocolMessage]) -> np.ndarray:
        by_client = self._check_complete(Round.STATS_REPORT, messages)
        d = self.labeled_raw.d
        per_feature: list[list[FeatureStats]] = [[] for _ in range(d)]
        for cid in sorted(by_client):
            stats = by_client[cid].payload
            if len(stats) != d:
                raise ProtocolError(f"client {cid}: expected {d} feature "
                                    f"stats, got {len(stats)}")
            self.client_counts[cid] = stats[0].count
            for p, s in enumerate(stats):
                per_feature[p].append(s)
        self.global_std = np.array([
            aggregate_std(per_feature[p], mode=self.config.std_agg)
            for p in range(d)
        ])
        self.radii = np.array([
            fuzzy.fuzzy_radius(s, self.config.radius_divisor)
            for s in self.global_std
        ])
        return self.global_std

    def collect_similarities(self, messages: list[ProtocolMessage]) -> None:
        by_client = self._check_complete(Round.SIMILARITY_REPORT, messages)
        d = self.labeled_raw.d
        for cid in sorted(by_client):
            mats = by_client[cid].payload
            if len(mats) != d:
                raise ProtocolError(f"client {cid}: expected {d} matrices, "
                                    f"got {len(mats)}")
            expected_n = self.client_counts.get(cid)
            for p, m in enumerate(mats):
                if m.feature_id != p:
                    raise ProtocolError(f"client {cid}: matrix {p} labeled "
                                        f"feature {m.feature_id}")
                if expected_n is not None and m.n != expected_n:
                    raise ProtocolError(f"client {cid}: matrix size {m.n} does "
                                        f"not match reported count {expected_n}")
                if m.radius != self.radii[p]:
                    raise ProtocolError(f"client {cid}: feature {p} radius "
                                        f"{m.radius} differs from broadcast "
                                        f"{self.radii[p]}")
            self.blocks[cid] = mats

    def score_features(self) -> graph.FeatureRanking:
        if self.config.k_neighbors >= self.labeled_raw.n:
            raise ConfigError(
                f"k={self.config.k_neighbors} needs more labeled instances "
                f"than the server holds ({self.labeled_raw.n}); lower k or "
                "raise the labeled fraction")
        stacks = [np.stack([m.values for m in self.blocks[cid]])
                  for cid in sorted(self.blocks)]
        self.entropy = fuzzy.entropy_table_from_blocks(stacks)
        d = self.labeled_raw.d
        self.server_matrices = [
            fuzzy.build_similarity_matrix(self.labeled_norm.features[:, p],
                                          self.radii[p], feature_id=p)
            for p in range(d)
        ]
        self.dependency = relevance.relevance_vector(
            self.labeled_norm, self.server_matrices,
            k=self.config.k_neighbors,
            radius_divisor=self.config.radius_divisor)
        g = graph.build_graph(self.dependency, self.entropy.corr_dist,
                              damping=self.config.damping)
        self.ranking = graph.weighted_pagerank(g)
        self.selected = graph.select_top(self.ranking, self.config.select_count)
        return self.ranking


# ---------------------------------------------------------------------------
# Orchestration.


@dataclass
class RunConfig:
    select_count: int
    radius_divisor: float = 1.2
    k_neighbors: int = 10
    damping: float = graph.DEFAULT_DAMPING
    std_agg: str = "pooled"
    distances: object = None  # scalar or per-client sequence
    bits_per_value: int = 64

    def validate(self) -> None:
        if self.select_count < 1:
            raise ConfigError("select count must be at least 1")
        if not (fuzzy.RADIUS_DIVISOR_MIN <= self.radius_divisor
                <= fuzzy.RADIUS_DIVISOR_MAX):
            raise ConfigError(f"radius divisor {self.radius_divisor} outside "
                              f"[{fuzzy.RADIUS_DIVISOR_MIN}, "
                              f"{fuzzy.RADIUS_DIVISOR_MAX}]")
        if self.k_neighbors < 1:
            raise ConfigError("neighbor count must be at least 1")
        if not 0.0 < self.damping < 1.0:
            raise ConfigError(f"damping {self.damping} outside (0, 1)")
        if self.std_agg not in ("pooled", "weighted-mean"):
            raise ConfigError(f"unknown std aggregation {self.std_agg!r}")
        if self.bits_per_value < 1:
            raise ConfigError("bits per value must be positive")


@dataclass
class RunResult:
    ranking: graph.FeatureRanking
    ledger: CostLedger
    selected: list[int]
    entropy: fuzzy.EntropyTable
    dependency: relevance.DependencyVector
    global_std: np.ndarray
    radii: np.ndarray
    global_mins: np.ndarray
    global_maxs: np.ndarray
    server: ServerState


def run_protocol(plan: PartitionPlan, ds: MultiLabelDataset,
                 config: RunConfig) -> RunResult:
    """Execute the whole exchange sequentially and deterministically."""
    config.validate()
    if plan.m_clients < 2:
        raise ConfigError("at least two clients are required")
    if not 1 <= config.select_count <= ds.d:
        raise ConfigError(f"select count {config.select_count} outside "
                          f"[1, {ds.d}]")
    if ds.labels is None:
        raise ValueError("the source dataset must be labeled")

    distances = _as_distances(config.distances, plan.m_clients)
    ledger = CostLedger(distances=distances,
                        bits_per_value=config.bits_per_value)

    clients = [ClientState(i, ds.features[np.asarray(shard, dtype=np.intp)])
               for i, shard in enumerate(plan.client_shards)]
    server = ServerState(ds.subset(plan.server_labeled), plan.m_clients, config)

    reports = [c.report_minmax() for c in clients]
    for msg in reports:
        ledger.record(msg)
    bounds = server.aggregate_bounds(reports)
    for c in clients:
        msg = ProtocolMessage(Round.MIN_MAX_BROADCAST, SERVER_ID, c.party, bounds)
        ledger.record(msg)
        c.receive_bounds(msg)

    reports = [c.report_stats() for c in clients]
    for msg in reports:
        ledger.record(msg)
    stds = server.aggregate_stats(reports)
    for c in clients:
        msg = ProtocolMessage(Round.GLOBAL_STD_BROADCAST, SERVER_ID, c.party, stds)
        ledger.record(msg)
        c.receive_global_std(msg, config.radius_divisor)

    reports = [c.report_similarities() for c in clients]
    for msg in reports:
        ledger.record(msg)
    server.collect_similarities(reports)

    ranking = server.score_features()
    for c in clients:
        msg = ProtocolMessage(Round.DONE, SERVER_ID, c.party, server.selected)
        ledger.record(msg)
        c.receive_selection(msg)

    return RunResult(
        ranking=ranking,
        ledger=ledger,
        selected=list(server.selected),
        entropy=server.entropy,
        dependency=server.dependency,
        global_std=server.global_std,
        radii=server.radii,
        global_mins=server.global_mins,
        global_maxs=server.global_maxs,
        server=server,
    )
