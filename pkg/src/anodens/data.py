"""Labeled tabular data: CSV loading, min-max normalization, dedup, seeded splits."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

CONTINUOUS = "continuous"
BINARY = "binary"

_LABEL_STRINGS = {"normal": 0, "anomaly": 1}


@dataclass
class Dataset:
    """An attribute matrix with binary anomaly labels (0 = normal, 1 = anomaly)."""

    attributes: np.ndarray  # (n_instances, n_attributes) float64
    labels: np.ndarray  # (n_instances,) int64, values in {0, 1}
    attribute_names: tuple[str, ...]
    attribute_kinds: tuple[str, ...]  # CONTINUOUS or BINARY per column

    def __post_init__(self):
        self.attributes = np.asarray(self.attributes, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.attributes.ndim != 2:
            raise ValueError("attributes must be a 2-D matrix")
        n, d = self.attributes.shape
        if n < 1 or d < 1:
            raise ValueError("dataset needs at least one row and one attribute column")
        if self.labels.shape != (n,):
            raise ValueError("labels must be one value per row")
        if not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        if len(self.attribute_names) != d or len(self.attribute_kinds) != d:
            raise ValueError("attribute metadata must have one entry per column")
        for kind in self.attribute_kinds:
            if kind not in (CONTINUOUS, BINARY):
                raise ValueError(f"unknown attribute kind {kind!r}")

    @property
    def n_instances(self) -> int:
        return self.attributes.shape[0]

    @property
    def n_attributes(self) -> int:
        return self.attributes.shape[1]

    def normal_indices(self) -> np.ndarray:
        return np.flatnonzero(self.labels == 0)

    def anomaly_indices(self) -> np.ndarray:
        return np.flatnonzero(self.labels == 1)


@dataclass
class NormStats:
    """Per-attribute min/max used to map columns onto [0, 1].

    Binary columns are stored with (0, 1) so applying the stats leaves
    valid binary values untouched.
    """

    attribute_names: tuple[str, ...]
    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        self.mins = np.asarray(self.mins, dtype=np.float64)
        self.maxs = np.asarray(self.maxs, dtype=np.float64)
        if np.any(self.mins > self.maxs):
            raise ValueError("per-attribute min must not exceed max")

    def apply(self, x: np.ndarray, clip: bool = True) -> np.ndarray:
        """Map rows onto the stored [0, 1] ranges; unseen values are clamped."""
        x = np.asarray(x, dtype=np.float64)
        span = self.maxs - self.mins
        safe = np.where(span > 0, span, 1.0)
        out = (x - self.mins) / safe
        out = np.where(span > 0, out, 0.0)  # constant columns collapse to 0
        if clip:
            out = np.clip(out, 0.0, 1.0)
        return out

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for name, lo, hi in zip(self.attribute_names, self.mins, self.maxs):
                fh.write(f"{name}={float(lo)!r},{float(hi)!r}\n")

    @classmethod
    def load(cls, path: str) -> "NormStats":
        names, mins, maxs = [], [], []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                name, _, rest = line.partition("=")
                lo, _, hi = rest.partition(",")
                names.append(name)
                mins.append(float(lo))
                maxs.append(float(hi))
        return cls(tuple(names), np.array(mins), np.array(maxs))


@dataclass
class SplitBundle:
    """Disjoint train/val/test index sets for normals and anomalies."""

    train_normal: np.ndarray
    val_normal: np.ndarray
    test_normal: np.ndarray
    train_anom: np.ndarray
    val_anom: np.ndarray
    test_anom: np.ndarray
    seed: int

    def parts(self) -> tuple[np.ndarray, ...]:
        return (
            self.train_normal,
            self.val_normal,
            self.test_normal,
            self.train_anom,
            self.val_anom,
            self.test_anom,
        )

    def check_partition(self, n_instances: int) -> None:
        """Raise if the six sets are not a disjoint cover of range(n_instances)."""
        combined = np.concatenate(self.parts())
        if len(combined) != n_instances or len(np.unique(combined)) != n_instances:
            raise ValueError("split does not partition the dataset")
        if combined.min() < 0 or combined.max() >= n_instances:
            raise ValueError("split contains out-of-range indices")


def _resolve_label_column(header: list[str], label_column) -> int:
    if isinstance(label_column, int):
        idx = label_column if label_column >= 0 else len(header) + label_column
        if not 0 <= idx < len(header):
            raise ValueError(f"label column index {label_column} out of range")
        return idx
    name = str(label_column)
    if name in header:
        return header.index(name)
    try:
        return _resolve_label_column(header, int(name))
    except ValueError:
        raise ValueError(f"label column {label_column!r} not found in header") from None


def _parse_label(token: str, line_no: int) -> int:
    key = token.strip().lower()
    if key in _LABEL_STRINGS:
        return _LABEL_STRINGS[key]
    try:
        value = float(key)
    except ValueError:
        raise ValueError(f"unparseable label {token!r} on line {line_no}") from None
    if value not in (0.0, 1.0):
        raise ValueError(f"label value {token!r} on line {line_no} is not 0 or 1")
    return int(value)


def load_csv(path: str, label_column) -> Dataset:
    """Load a headered CSV into a Dataset.

    The label column (selected by name or index) must hold 0/1 values or the
    strings "normal"/"anomaly".  Columns whose observed values are all 0 or 1
    are flagged binary, everything else continuous.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("zero data rows (empty file)") from None
        label_idx = _resolve_label_column(header, label_column)
        rows, labels = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(
                    f"ragged row on line {line_no}: expected {len(header)} fields, got {len(row)}"
                )
            labels.append(_parse_label(row[label_idx], line_no))
            try:
                rows.append(
                    [float(v) for i, v in enumerate(row) if i != label_idx]
                )
            except ValueError:
                raise ValueError(f"non-numeric attribute value on line {line_no}") from None
    if not rows:
        raise ValueError("zero data rows")
    names = tuple(n for i, n in enumerate(header) if i != label_idx)
    if not names:
        raise ValueError("no attribute columns besides the label")
    attributes = np.array(rows, dtype=np.float64)
    kinds = tuple(
        BINARY if np.isin(attributes[:, j], (0.0, 1.0)).all() else CONTINUOUS
        for j in range(attributes.shape[1])
    )
    return Dataset(attributes, np.array(labels), names, kinds)


def normalize_minmax(ds: Dataset) -> tuple[Dataset, NormStats]:
    """Linearly map every continuous column onto [0, 1]; binary columns pass through.

    Stats are computed over the full dataset (before any split), so reusing
    them on training subsets leaks only the column ranges.  Constant columns
    map to all zeros.
    """
    mins = np.zeros(ds.n_attributes)
    maxs = np.ones(ds.n_attributes)
    for j, kind in enumerate(ds.attribute_kinds):
        if kind == CONTINUOUS:
            mins[j] = ds.attributes[:, j].min()
            maxs[j] = ds.attributes[:, j].max()
    stats = NormStats(ds.attribute_names, mins, maxs)
    normalized = stats.apply(ds.attributes, clip=False)
    out = Dataset(normalized, ds.labels.copy(), ds.attribute_names, ds.attribute_kinds)
    return out, stats


def dedup(ds: Dataset) -> Dataset:
    """Drop exact duplicate rows, keyed on (attribute vector, label), keeping the first."""
    keyed = np.column_stack([ds.attributes, ds.labels.astype(np.float64)])
    _, first = np.unique(keyed, axis=0, return_index=True)
    keep = np.sort(first)
    return Dataset(
        ds.attributes[keep].copy(),
        ds.labels[keep].copy(),
        ds.attribute_names,
        ds.attribute_kinds,
    )


def split(ds: Dataset, seed: int, n_train_anom: int = 3, n_val_anom: int = 3) -> SplitBundle:
    """Partition instances into train/val/test index sets.

    Normals are shuffled and cut 80%/10%/rest (floor rounding, remainder to
    test); anomalies are shuffled and cut n_train_anom/n_val_anom/rest.
    Deterministic for a given seed (PCG64 via numpy's default_rng).
    """
    normals = ds.normal_indices()
    anomalies = ds.anomaly_indices()
    if len(anomalies) < n_train_anom + n_val_anom + 1:
        raise ValueError(
            f"insufficient anomalies: need at least {n_train_anom + n_val_anom + 1}, "
            f"have {len(anomalies)}"
        )
    if len(normals) < 10:
        raise ValueError(f"insufficient normals: need at least 10, have {len(normals)}")
    rng = np.random.default_rng(seed)
    normals = rng.permutation(normals)
    anomalies = rng.permutation(anomalies)
    n_train = int(0.8 * len(normals))
    n_val = int(0.1 * len(normals))
    return SplitBundle(
        train_normal=normals[:n_train],
        val_normal=normals[n_train : n_train + n_val],
        test_normal=normals[n_train + n_val :],
        train_anom=anomalies[:n_train_anom],
        val_anom=anomalies[n_train_anom : n_train_anom + n_val_anom],
        test_anom=anomalies[n_train_anom + n_val_anom :],
        seed=seed,
    )
