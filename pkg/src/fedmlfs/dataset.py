"""Multi-label dataset ingestion, normalization and client partitioning."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from math import floor
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError


@dataclass
class MultiLabelDataset:
    """Dense feature matrix plus an optional binary label matrix."""

    features: np.ndarray                  # (n, d) float64
    labels: np.ndarray | None = None      # (n, L) int8 in {0, 1}
    feature_names: list[str] = field(default_factory=list)
    label_names: list[str] = field(default_factory=list)
    source_id: str = ""

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-d matrix")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int8)
            if self.labels.shape[0] != self.features.shape[0]:
                raise ValueError("label rows do not match feature rows")
            bad = ~np.isin(self.labels, (0, 1))
            if bad.any():
                raise ValueError("label entries must be 0 or 1")
        if not self.feature_names:
            self.feature_names = [f"f{i}" for i in range(self.features.shape[1])]

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def n_labels(self) -> int:
        return 0 if self.labels is None else self.labels.shape[1]

    def subset(self, indices, keep_labels: bool = True) -> "MultiLabelDataset":
        idx = np.asarray(indices, dtype=np.intp)
        labels = self.labels[idx] if (keep_labels and self.labels is not None) else None
        return MultiLabelDataset(
            features=self.features[idx],
            labels=labels,
            feature_names=list(self.feature_names),
            label_names=list(self.label_names) if labels is not None else [],
            source_id=self.source_id,
        )

    def select_features(self, feature_indices) -> "MultiLabelDataset":
        idx = np.asarray(feature_indices, dtype=np.intp)
        return MultiLabelDataset(
            features=self.features[:, idx],
            labels=None if self.labels is None else self.labels.copy(),
            feature_names=[self.feature_names[i] for i in idx],
            label_names=list(self.label_names),
            source_id=self.source_id,
        )


def read_label_names_xml(path) -> list[str]:
    """Label names from a sidecar XML file (<labels><label name=.../>...)."""
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as exc:
        raise DataError(f"{path}: cannot parse label XML: {exc}") from exc
    names = [el.attrib["name"] for el in root.iter()
             if el.tag.rsplit("}", 1)[-1] == "label" and "name" in el.attrib]
    if not names:
        raise DataError(f"{path}: no <label name=...> entries found")
    return names


def _split_columns(names: list[str], label_spec) -> tuple[list[int], list[int]]:
    """Resolve a label spec (trailing count or name list) into column indices."""
    if isinstance(label_spec, int):
        k = label_spec
        if not 0 < k < len(names):
            raise DataError(f"label count {k} out of range for {len(names)} columns")
        label_cols = list(range(len(names) - k, len(names)))
    else:
        wanted = list(label_spec)
        missing = [w for w in wanted if w not in names]
        if missing:
            raise DataError(f"label names not present in the data: {missing}")
        label_cols = [names.index(w) for w in wanted]
    label_set = set(label_cols)
    feature_cols = [i for i in range(len(names)) if i not in label_set]
    if not feature_cols:
        raise DataError("label spec leaves no feature columns")
    return feature_cols, label_cols


def _finish(rows, names, label_spec, source_id, path) -> MultiLabelDataset:
    if not rows:
        raise DataError(f"{path}: empty dataset")
    feature_cols, label_cols = _split_columns(names, label_spec)
    data = np.asarray(rows, dtype=np.float64)
    raw_labels = data[:, label_cols]
    if not np.isin(raw_labels, (0.0, 1.0)).all():
        bad = np.argwhere(~np.isin(raw_labels, (0.0, 1.0)))[0]
        col = names[label_cols[bad[1]]]
        raise DataError(f"{path}: non-binary value in label column {col!r} "
                        f"(row {bad[0] + 1})")
    return MultiLabelDataset(
        features=data[:, feature_cols],
        labels=raw_labels.astype(np.int8),
        feature_names=[names[i] for i in feature_cols],
        label_names=[names[i] for i in label_cols],
        source_id=source_id,
    )


def _parse_arff(path, label_spec) -> MultiLabelDataset:
    names: list[str] = []
    rows: list[list[float]] = []
    relation = Path(path).stem
    in_data = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            low = line.lower()
            if not in_data:
                if low.startswith("@relation"):
                    parts = line.split(None, 1)
                    if len(parts) == 2:
                        relation = parts[1].strip().strip("'\"")
                elif low.startswith("@attribute"):
                    parts = line.split(None, 2)
                    if len(parts) < 3:
                        raise DataError(f"{path}:{lineno}: malformed @attribute")
                    name = parts[1].strip().strip("'\"")
                    decl = parts[2].strip().lower()
                    if decl.startswith("{"):
                        levels = {v.strip().strip("'\"") for v in
                                  decl.strip("{}").split(",")}
                        if not levels <= {"0", "1"}:
                            raise DataError(
                                f"{path}:{lineno}: nominal attribute {name!r} "
                                "is not binary {0,1}")
                    elif decl not in ("numeric", "real", "integer"):
                        raise DataError(f"{path}:{lineno}: unsupported attribute "
                                        f"type {parts[2].strip()!r}")
                    names.append(name)
                elif low.startswith("@data"):
                    if not names:
                        raise DataError(f"{path}:{lineno}: @data before any "
                                        "@attribute")
                    in_data = True
                else:
                    raise DataError(f"{path}:{lineno}: unexpected header line")
                continue
            if line.startswith("{"):
                raise DataError(f"{path}:{lineno}: sparse ARFF rows are not "
                                "supported")
            cells = [c.strip() for c in line.split(",")]
            if len(cells) != len(names):
                raise DataError(f"{path}:{lineno}: expected {len(names)} values, "
                                f"got {len(cells)}")
            row = []
            for name, cell in zip(names, cells):
                if cell in ("?", ""):
                    raise DataError(f"{path}:{lineno}: missing value in "
                                    f"attribute {name!r}")
                try:
                    row.append(float(cell.strip("'\"")))
                except ValueError as exc:
                    raise DataError(f"{path}:{lineno}: non-numeric value "
                                    f"{cell!r} in attribute {name!r}") from exc
            rows.append(row)
    if not in_data:
        raise DataError(f"{path}: no @data section")
    return _finish(rows, names, label_spec, relation, path)


def _parse_csv(path, label_spec) -> MultiLabelDataset:
    import csv

    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            names = [c.strip() for c in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty dataset") from None
        rows = []
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != len(names):
                raise DataError(f"{path}:{lineno}: expected {len(names)} values, "
                                f"got {len(cells)}")
            row = []
            for name, cell in zip(names, cells):
                cell = cell.strip()
                if cell in ("", "?"):
                    raise DataError(f"{path}:{lineno}: missing value in "
                                    f"column {name!r}")
                try:
                    row.append(float(cell))
                except ValueError as exc:
                    raise DataError(f"{path}:{lineno}: non-numeric value "
                                    f"{cell!r} in column {name!r}") from exc
            rows.append(row)
    return _finish(rows, names, label_spec, Path(path).stem, path)


def load_dataset(path, fmt: str | None = None, labels=None) -> MultiLabelDataset:
    """Load a dense ARFF or headered CSV file.

    `labels` is either an int (that many trailing columns are labels) or a
    sequence of column names, typically from `read_label_names_xml`.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    if labels is None:
        raise DataError("a label spec is required (trailing count or name list)")
    fmt = (fmt or path.suffix.lstrip(".")).lower()
    if fmt == "arff":
        return _parse_arff(path, labels)
    if fmt == "csv":
        return _parse_csv(path, labels)
    raise DataError(f"unsupported dataset format {fmt!r}")


def feature_minmax(ds: MultiLabelDataset) -> tuple[np.ndarray, np.ndarray]:
    return ds.features.min(axis=0), ds.features.max(axis=0)


def normalize_minmax(ds: MultiLabelDataset, mins, maxs,
                     clip: bool = False) -> MultiLabelDataset:
    """Scale every feature to [0, 1] using shared bounds.

    Constant columns (max == min) map to all zeros. With `clip`, values
    outside the supplied bounds are clamped into [0, 1]; this is used for
    held-out data normalized under the training scale.
    """
    mins = np.asarray(mins, dtype=np.float64)
    maxs = np.asarray(maxs, dtype=np.float64)
    if mins.shape != (ds.d,) or maxs.shape != (ds.d,):
        raise ValueError(f"bounds must have length {ds.d}")
    if (mins > maxs).any():
        raise ValueError("mins exceed maxs")
    span = maxs - mins
    safe = np.where(span == 0.0, 1.0, span)
    scaled = (ds.features - mins) / safe
    scaled[:, span == 0.0] = 0.0
    if clip:
        scaled = np.clip(scaled, 0.0, 1.0)
    return MultiLabelDataset(
        features=scaled,
        labels=None if ds.labels is None else ds.labels.copy(),
        feature_names=list(ds.feature_names),
        label_names=list(ds.label_names),
        source_id=ds.source_id,
    )


@dataclass
class PartitionPlan:
    """Disjoint instance index sets for clients, server and test."""

    client_shards: list[tuple[int, ...]]
    server_labeled: tuple[int, ...]
    test_set: tuple[int, ...]
    seed: int
    skew_alpha: float
    labeled_fraction: float
    test_fraction: float
    universe_size: int

    @property
    def m_clients(self) -> int:
        return len(self.client_shards)


def anchor_labels(labels: np.ndarray) -> np.ndarray:
    """Lowest-index positive label per instance; L for all-zero rows."""
    labels = np.asarray(labels)
    n, n_lab = labels.shape
    anchors = np.full(n, n_lab, dtype=np.intp)
    has_any = labels.any(axis=1)
    anchors[has_any] = np.argmax(labels[has_any] != 0, axis=1)
    return anchors


def partition_noniid(ds: MultiLabelDataset, m_clients: int, skew_alpha: float,
                     labeled_fraction: float, test_fraction: float,
                     seed: int) -> PartitionPlan:
    """Deterministic single-seed split into test, server-labeled and shards.

    The training side keeps floor((1 - test_fraction) * n) instances and
    the server keeps floor(labeled_fraction * train) of those; the
    remainder is spread across clients with a Dirichlet skew over each
    instance's anchor label, so small alpha concentrates anchor classes
    on few clients.
    """
    if m_clients < 2:
        raise ConfigError("at least two clients are required")
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"test fraction {test_fraction} outside (0, 1)")
    if not 0.0 < labeled_fraction < 1.0:
        raise ConfigError(f"labeled fraction {labeled_fraction} outside (0, 1)")
    if skew_alpha <= 0.0:
        raise ConfigError("skew alpha must be positive")
    if ds.labels is None:
        raise DataError("partitioning needs a labeled dataset")

    n = ds.n
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)

    n_train = floor((1.0 - test_fraction) * n)
    if n_train == 0:
        raise ConfigError("fractions leave no training data")
    test_idx = np.sort(perm[n_train:])

    n_labeled = floor(labeled_fraction * n_train)
    if n_labeled == 0:
        raise ConfigError("labeled fraction leaves the server without data")
    train_idx = perm[:n_train]
    labeled_idx = np.sort(train_idx[:n_labeled])
    rest = train_idx[n_labeled:]
    if rest.size < m_clients:
        raise ConfigError(f"{rest.size} client instances cannot fill "
                          f"{m_clients} shards")

    anchors = anchor_labels(ds.labels[rest])
    shards: list[list[int]] = [[] for _ in range(m_clients)]
    for cls in np.unique(anchors):
        members = rest[anchors == cls]
        props = rng.dirichlet(np.full(m_clients, skew_alpha))
        counts = np.floor(props * members.size).astype(int)
        for i in range(members.size - counts.sum()):
            counts[i % m_clients] += 1
        offsets = np.concatenate(([0], np.cumsum(counts)))
        for m in range(m_clients):
            shards[m].extend(members[offsets[m]:offsets[m + 1]].tolist())

    if any(len(s) == 0 for s in shards):
        empty = [m for m, s in enumerate(shards) if not s]
        raise ConfigError(f"shards {empty} would be empty; lower the client "
                          "count or raise alpha")

    return PartitionPlan(
        client_shards=[tuple(sorted(s)) for s in shards],
        server_labeled=tuple(int(i) for i in labeled_idx),
        test_set=tuple(int(i) for i in test_idx),
        seed=seed,
        skew_alpha=skew_alpha,
        labeled_fraction=labeled_fraction,
        test_fraction=test_fraction,
        universe_size=n,
    )


def write_manifest(plan: PartitionPlan, path) -> None:
    """Human-readable manifest from which the plan can be rebuilt exactly."""
    lines = [
        "# fedmlfs partition manifest",
        f"universe_size={plan.universe_size}",
        f"m_clients={plan.m_clients}",
        f"seed={plan.seed}",
        f"skew_alpha={plan.skew_alpha!r}",
        f"labeled_fraction={plan.labeled_fraction!r}",
        f"test_fraction={plan.test_fraction!r}",
        "test=" + ",".join(map(str, plan.test_set)),
        "server_labeled=" + ",".join(map(str, plan.server_labeled)),
    ]
    for m, shard in enumerate(plan.client_shards):
        lines.append(f"shard_{m:02d}=" + ",".join(map(str, shard)))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_manifest(path) -> PartitionPlan:
    fields: dict[str, str] = {}
    shard_keys: list[str] = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        fields[key] = value
        if key.startswith("shard_"):
            shard_keys.append(key)

    def ints(text: str) -> tuple[int, ...]:
        return tuple(int(t) for t in text.split(",") if t)

    return PartitionPlan(
        client_shards=[ints(fields[k]) for k in sorted(shard_keys)],
        server_labeled=ints(fields["server_labeled"]),
        test_set=ints(fields["test"]),
        seed=int(fields["seed"]),
        skew_alpha=float(fields["skew_alpha"]),
        labeled_fraction=float(fields["labeled_fraction"]),
        test_fraction=float(fields["test_fraction"]),
        universe_size=int(fields["universe_size"]),
    )
