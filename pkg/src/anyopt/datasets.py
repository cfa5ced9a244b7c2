"""Dataset ingestion, preprocessing, and the synthetic benchmark generator.

Preprocessing contract: rows with missing values are dropped, categorical
columns are one-hot expanded, then every feature column is min-max scaled to
[0, 1].  Labels are mapped to 0..k-1 in sorted order of their raw values.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .oracles import child_rng

MISSING_TOKENS = {"", "?", "na", "n/a", "nan", "null"}


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    """Preprocessed features in [0, 1] with integer labels in [0, k)."""

    features: np.ndarray
    labels: np.ndarray
    class_count: int
    feature_names: tuple = ()
    class_names: tuple = ()

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if x.ndim != 2 or y.shape != (x.shape[0],):
            raise DatasetError("features must be (n, d) with one label per row")
        if x.shape[0] == 0:
            raise DatasetError("dataset is empty")
        if np.any(x < -1e-12) or np.any(x > 1.0 + 1e-12):
            raise DatasetError("features must be normalized to [0, 1]")
        if self.class_count < 2 or y.min() < 0 or y.max() >= self.class_count:
            raise DatasetError("labels must lie in [0, class_count) with k >= 2")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    @property
    def n_examples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    @property
    def model_dim(self):
        return self.class_count * self.n_features


def minmax_normalize(columns):
    """Scale each column to [0, 1]; constant columns collapse to 0."""
    x = np.asarray(columns, dtype=np.float64)
    lo = x.min(axis=0)
    span = x.max(axis=0) - lo
    span = np.where(span > 0, span, 1.0)
    return (x - lo) / span


def from_raw_arrays(features, labels, feature_names=()):
    """Build a Dataset from unnormalized numeric features and raw labels."""
    x = np.asarray(features, dtype=np.float64)
    raw_labels = np.asarray(labels)
    classes = sorted(set(raw_labels.tolist()))
    if len(classes) < 2:
        raise DatasetError("need at least two label classes")
    lookup = {c: i for i, c in enumerate(classes)}
    y = np.array([lookup[v] for v in raw_labels.tolist()], dtype=np.int64)
    return Dataset(
        features=minmax_normalize(x),
        labels=y,
        class_count=len(classes),
        feature_names=tuple(feature_names),
        class_names=tuple(str(c) for c in classes),
    )


@dataclass(frozen=True)
class CsvSchema:
    """Column roles for ingestion; columns are named when the file has a
    header, else addressed as col0, col1, ..."""

    label: str
    categorical: tuple = ()
    drop: tuple = ()
    has_header: bool = True


def _is_missing(token):
    return token.strip().lower() in MISSING_TOKENS


def ingest_csv(path, schema):
    """Parse, clean, one-hot expand, and normalize a CSV file.

    Shape or parse failures report the offending 1-based data row number.
    """
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise DatasetError(f"{path}: empty file")

    if schema.has_header:
        header = [name.strip() for name in rows[0]]
        body = rows[1:]
    else:
        header = [f"col{i}" for i in range(len(rows[0]))]
        body = rows
    width = len(header)
    if schema.label not in header:
        raise DatasetError(f"{path}: label column {schema.label!r} not found")
    unknown = (set(schema.categorical) | set(schema.drop)) - set(header)
    if unknown:
        raise DatasetError(f"{path}: unknown columns {sorted(unknown)}")

    label_idx = header.index(schema.label)
    drop_idx = {header.index(c) for c in schema.drop}
    cat_idx = {header.index(c) for c in schema.categorical}
    feat_idx = [i for i in range(width) if i != label_idx and i not in drop_idx]

    kept_rows = []
    labels = []
    for row_no, row in enumerate(body, start=1):
        if len(row) != width:
            raise DatasetError(f"{path}: row {row_no} has {len(row)} fields, expected {width}")
        if any(_is_missing(row[i]) for i in feat_idx + [label_idx]):
            continue
        kept_rows.append(row)
        labels.append(row[label_idx].strip())
    if not kept_rows:
        raise DatasetError(f"{path}: no complete rows after dropping missing values")

    columns = []
    names = []
    for i in feat_idx:
        raw = [r[i].strip() for r in kept_rows]
        if i in cat_idx:
            levels = sorted(set(raw))
            for level in levels:
                columns.append([1.0 if v == level else 0.0 for v in raw])
                names.append(f"{header[i]}={level}")
        else:
            try:
                columns.append([float(v) for v in raw])
            except ValueError:
                bad = next(j for j, v in enumerate(raw, start=1) if not _parses(v))
                raise DatasetError(
                    f"{path}: column {header[i]!r} row {bad}: not numeric "
                    "(declare it categorical?)"
                ) from None
            names.append(header[i])

    features = np.asarray(columns, dtype=np.float64).T
    return from_raw_arrays(features, labels, feature_names=names)


def _parses(token):
    try:
        float(token)
        return True
    except ValueError:
        return False


@dataclass(frozen=True)
class SyntheticSpec:
    """Gaussian class-conditional features with heavy-tailed contamination.

    Class centers sit at 0.5 +- `separation` per coordinate, so clean features
    land mostly inside [0, 1].  A `contamination` fraction of entries receives
    an additive symmetric Pareto(tail_shape) spike before normalization,
    mimicking corrupted measurements; spikes widen the per-column range, so
    heavier contamination also compresses the clean signal after min-max
    scaling.
    """

    n: int = 10_000
    class_count: int = 3
    n_features: int = 20
    separation: float = 0.35
    noise: float = 0.18
    contamination: float = 0.002
    tail_shape: float = 2.1
    spike_scale: float = 0.15
    seed: int = 7

    @classmethod
    def parse(cls, text):
        """Parse 'synthetic:n=...,k=...,d=...' CLI specs; bare 'synthetic' gives
        the defaults."""
        if text == "synthetic":
            return cls()
        body = text.split(":", 1)[1] if text.startswith("synthetic:") else text
        keymap = {
            "n": ("n", int),
            "k": ("class_count", int),
            "d": ("n_features", int),
            "sep": ("separation", float),
            "noise": ("noise", float),
            "contam": ("contamination", float),
            "tail": ("tail_shape", float),
            "spike": ("spike_scale", float),
            "seed": ("seed", int),
        }
        kwargs = {}
        if body.strip():
            for part in body.split(","):
                key, _, value = part.partition("=")
                key = key.strip()
                if key not in keymap:
                    raise DatasetError(
                        f"unknown synthetic parameter {key!r}; known: {sorted(keymap)}"
                    )
                name, cast = keymap[key]
                try:
                    kwargs[name] = cast(value)
                except ValueError:
                    raise DatasetError(f"bad value for synthetic parameter {key!r}: {value!r}")
        return cls(**kwargs)


def make_synthetic(spec):
    """Generate and preprocess a synthetic classification dataset."""
    if spec.n < spec.class_count * 2:
        raise DatasetError("synthetic dataset too small for the class count")
    rng = child_rng(spec.seed, 0xDA7A)
    centers = 0.5 + rng.uniform(-spec.separation, spec.separation,
                                (spec.class_count, spec.n_features))
    labels = rng.integers(0, spec.class_count, size=spec.n)
    features = centers[labels] + spec.noise * rng.standard_normal((spec.n, spec.n_features))
    if spec.contamination > 0:
        mask = rng.random((spec.n, spec.n_features)) < spec.contamination
        spikes = 1.0 + rng.pareto(spec.tail_shape, size=mask.sum())
        spikes *= rng.choice((-1.0, 1.0), size=mask.sum()) * spec.spike_scale
        features[mask] += spikes
    return from_raw_arrays(features, labels)


def load_dataset(source, schema=None):
    """Resolve a CLI dataset argument: 'synthetic:...' spec or a CSV path."""
    if isinstance(source, str) and (source == "synthetic" or source.startswith("synthetic:")):
        return make_synthetic(SyntheticSpec.parse(source))
    if schema is None:
        raise DatasetError("CSV ingestion needs a schema (label column at minimum)")
    return ingest_csv(source, schema)
