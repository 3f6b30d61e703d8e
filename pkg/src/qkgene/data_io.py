"""CSV loading, binary label mapping, stratified splits, phase scaling.

Datasets are dense float matrices with one row per sample and labels in
{-1, +1}. Splits and scaling are the two places where train/test leakage
could creep in, so both are explicit: splits return index-disjoint parts
and the scaler follows a fit/apply contract (fit on train, apply to both).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError

POSITIVE = 1
NEGATIVE = -1


@dataclass
class LabeledDataset:
    """Feature matrix plus aligned -1/+1 labels and optional gene names."""

    features: np.ndarray
    labels: np.ndarray
    gene_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise DataError("features must be a 2-d matrix")
        if self.labels.shape != (self.features.shape[0],):
            raise DataError(
                f"labels length {self.labels.shape} does not match "
                f"{self.features.shape[0]} feature rows"
            )
        if not np.all(np.isfinite(self.features)):
            raise DataError("features contain NaN or infinite entries")
        extra = set(np.unique(self.labels).tolist()) - {POSITIVE, NEGATIVE}
        if extra:
            raise DataError(f"labels must be -1 or +1, found {sorted(extra)}")
        if self.gene_names and len(self.gene_names) != self.features.shape[1]:
            raise DataError("gene_names length does not match feature count")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_genes(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> dict[int, int]:
        values, counts = np.unique(self.labels, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}

    def subset(self, rows) -> "LabeledDataset":
        rows = np.asarray(rows, dtype=np.int64)
        return LabeledDataset(self.features[rows], self.labels[rows], list(self.gene_names))

    def select_genes(self, mask) -> "LabeledDataset":
        mask = np.asarray(mask).astype(bool)
        if mask.shape != (self.n_genes,):
            raise DataError("gene mask length does not match feature count")
        if not mask.any():
            raise DataError("gene mask selects no genes")
        names = [n for n, keep in zip(self.gene_names, mask) if keep] if self.gene_names else []
        return LabeledDataset(self.features[:, mask], self.labels, names)


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.25
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction must lie strictly between 0 and 1")


def load_csv(path, label_column, positive_label: str) -> LabeledDataset:
    """Read a header+rows CSV into a LabeledDataset.

    label_column picks the label field by header name (str) or position
    (int). Cells equal to positive_label become +1, everything else -1;
    exactly two distinct raw label values must be present.
    """
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    rows = [r for r in rows if r]
    if len(rows) < 2:
        raise DataError(f"{path}: need a header row and at least one data row")
    header = rows[0]
    width = len(header)
    if isinstance(label_column, int):
        label_idx = label_column if label_column >= 0 else width + label_column
        if not 0 <= label_idx < width:
            raise DataError(f"label column index {label_column} out of range")
    else:
        try:
            label_idx = header.index(label_column)
        except ValueError:
            raise DataError(f"label column {label_column!r} not in header") from None
    gene_names = [h for i, h in enumerate(header) if i != label_idx]

    features = []
    raw_labels = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise DataError(f"{path}:{lineno}: expected {width} fields, got {len(row)}")
        raw_labels.append(row[label_idx].strip())
        sample = []
        for i, cell in enumerate(row):
            if i == label_idx:
                continue
            try:
                sample.append(float(cell))
            except ValueError:
                raise DataError(
                    f"{path}:{lineno}: non-numeric value {cell!r} in column {header[i]!r}"
                ) from None
        features.append(sample)

    if len(features) < 2:
        raise DataError(f"{path}: need at least 2 samples")
    distinct = sorted(set(raw_labels))
    if len(distinct) == 1:
        raise DataError(f"{path}: single-class dataset ({distinct[0]!r})")
    if len(distinct) > 2:
        raise DataError(f"{path}: expected 2 classes, found {len(distinct)}: {distinct}")
    if str(positive_label) not in distinct:
        raise DataError(
            f"{path}: positive label {positive_label!r} not among classes {distinct}"
        )
    labels = np.where(np.array(raw_labels) == str(positive_label), POSITIVE, NEGATIVE)
    return LabeledDataset(np.array(features), labels, gene_names)


def split_indices(labels, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint (train, test) row indices, each sorted ascending."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(spec.seed)
    n = len(labels)
    if spec.stratified:
        train_parts, test_parts = [], []
        for cls in np.unique(labels):
            members = np.flatnonzero(labels == cls)
            if len(members) < 2:
                raise DataError(f"class {cls} has fewer than 2 samples")
            n_test = round(len(members) * spec.test_fraction)
            if n_test == 0 or n_test == len(members):
                raise DataError(
                    f"test_fraction {spec.test_fraction} leaves class {cls} "
                    "absent from one side of the split"
                )
            perm = rng.permutation(members)
            test_parts.append(perm[:n_test])
            train_parts.append(perm[n_test:])
        train = np.sort(np.concatenate(train_parts))
        test = np.sort(np.concatenate(test_parts))
    else:
        n_test = round(n * spec.test_fraction)
        if n_test == 0 or n_test == n:
            raise DataError("test_fraction leaves one side of the split empty")
        perm = rng.permutation(n)
        test = np.sort(perm[:n_test])
        train = np.sort(perm[n_test:])
    return train, test


def stratified_split(ds: LabeledDataset, spec: SplitSpec) -> tuple[LabeledDataset, LabeledDataset]:
    train_idx, test_idx = split_indices(ds.labels, spec)
    return ds.subset(train_idx), ds.subset(test_idx)


@dataclass
class PhaseScaler:
    """Per-column affine map onto [lo, hi], fitted once and reapplied.

    Columns that are constant in the fitted data map to lo. Values outside
    the fitted range (e.g. test data) are clamped before scaling.
    """

    lo: float = 0.0
    hi: float = math.pi
    col_min: np.ndarray | None = None
    col_max: np.ndarray | None = None

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ConfigError("phase range requires hi > lo")

    def fit(self, features) -> "PhaseScaler":
        features = np.asarray(features, dtype=np.float64)
        self.col_min = features.min(axis=0)
        self.col_max = features.max(axis=0)
        return self

    def transform_features(self, features) -> np.ndarray:
        if self.col_min is None:
            raise ValueError("scaler used before fit")
        features = np.asarray(features, dtype=np.float64)
        span = self.col_max - self.col_min
        safe_span = np.where(span > 0, span, 1.0)
        clipped = np.clip(features, self.col_min, self.col_max)
        unit = np.where(span > 0, (clipped - self.col_min) / safe_span, 0.0)
        return self.lo + unit * (self.hi - self.lo)

    def transform(self, ds: LabeledDataset) -> LabeledDataset:
        return LabeledDataset(self.transform_features(ds.features), ds.labels, list(ds.gene_names))


def scale_to_phase(ds: LabeledDataset, lo: float = 0.0, hi: float = math.pi) -> LabeledDataset:
    """Fit the scaler on ds itself and return the scaled copy."""
    return PhaseScaler(lo, hi).fit(ds.features).transform(ds)
