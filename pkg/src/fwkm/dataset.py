"""Data model, CSV ingestion, preprocessing and synthetic data generation.

A dataset is stored column-wise: numeric features as float64 arrays,
categorical features as object arrays of category strings. All
operations are pure; they return new Dataset objects and never mutate
their input.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace

import numpy as np

NUMERIC = "numeric"
CATEGORICAL = "categorical"


class ParseError(ValueError):
    """Raised when a data file does not match its schema."""


@dataclass(frozen=True)
class Feature:
    """One column of the schema.

    ``categories`` is the declared category list for categorical
    features (None means "infer from the data on load"). ``noise``
    flags columns added by :func:`inject_noise`.
    """

    name: str
    kind: str = NUMERIC
    categories: tuple[str, ...] | None = None
    noise: bool = False

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if self.kind == NUMERIC and self.categories is not None:
            raise ValueError(f"numeric feature {self.name!r} cannot declare categories")
        if self.categories is not None:
            if len(self.categories) == 0:
                raise ValueError(f"feature {self.name!r}: empty category list")
            if len(set(self.categories)) != len(self.categories):
                raise ValueError(f"feature {self.name!r}: duplicate categories")


@dataclass(frozen=True)
class Schema:
    """Ordered feature list plus an optional label column name."""

    features: tuple[Feature, ...]
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        if self.label is not None and self.label in names:
            raise ValueError(f"label column {self.label!r} also listed as a feature")

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    def to_dict(self) -> dict:
        feats = []
        for f in self.features:
            entry = {"name": f.name, "kind": f.kind}
            if f.categories is not None:
                entry["categories"] = list(f.categories)
            if f.noise:
                entry["noise"] = True
            feats.append(entry)
        return {"features": feats, "label": self.label}

    @classmethod
    def from_dict(cls, d: dict) -> "Schema":
        feats = []
        for entry in d["features"]:
            cats = entry.get("categories")
            feats.append(
                Feature(
                    name=entry["name"],
                    kind=entry.get("kind", NUMERIC),
                    categories=tuple(cats) if cats is not None else None,
                    noise=bool(entry.get("noise", False)),
                )
            )
        return cls(features=tuple(feats), label=d.get("label"))


def load_schema(path) -> Schema:
    with open(path, encoding="utf-8") as fh:
        return Schema.from_dict(json.load(fh))


def save_schema(schema: Schema, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(schema.to_dict(), fh, indent=2)
        fh.write("\n")


@dataclass(frozen=True)
class Dataset:
    """N entities over M features, with optional ground-truth labels."""

    columns: tuple[np.ndarray, ...]
    schema: Schema
    labels: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        if len(self.columns) != len(self.schema.features):
            raise ValueError("column count does not match schema")
        if len(self.columns) == 0:
            raise ValueError("no features")
        n = len(self.columns[0])
        if n == 0:
            raise ValueError("no entities")
        for col, feat in zip(self.columns, self.schema.features):
            if len(col) != n:
                raise ValueError(f"feature {feat.name!r}: ragged column length")
            if feat.kind == CATEGORICAL and feat.categories is not None:
                allowed = set(feat.categories)
                bad = set(col) - allowed
                if bad:
                    raise ValueError(
                        f"feature {feat.name!r}: cells {sorted(bad)!r} outside category list"
                    )
        if self.labels is not None and len(self.labels) != n:
            raise ValueError("label vector length does not match N")

    @property
    def n(self) -> int:
        return len(self.columns[0])

    @property
    def m(self) -> int:
        return len(self.columns)

    @property
    def is_numeric(self) -> bool:
        return all(f.kind == NUMERIC for f in self.schema.features)

    def matrix(self) -> np.ndarray:
        """N x M float matrix; requires an all-numeric schema."""
        if not self.is_numeric:
            raise ValueError("dataset has categorical features; expand them first")
        return np.column_stack(self.columns)

    def n_classes(self) -> int:
        if self.labels is None:
            raise ValueError("dataset has no labels")
        return len(np.unique(self.labels))

    def noise_mask(self) -> np.ndarray:
        """Boolean mask over features marking injected noise columns."""
        return np.array([f.noise for f in self.schema.features], dtype=bool)


def _parse_numeric(cell: str, row: int, name: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ParseError(
            f"row {row}, column {name!r}: could not parse {cell!r} as a number"
        ) from None


def load_dataset(path, schema: Schema) -> Dataset:
    """Read a CSV file (header row required) against ``schema``.

    Cells are coerced per feature kind; the label column is extracted
    when the schema declares one. Unknown extra columns are ignored.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        positions = {}
        for f in schema.features:
            if f.name not in header:
                raise ParseError(f"{path}: missing column {f.name!r}")
            positions[f.name] = header.index(f.name)
        label_pos = None
        if schema.label is not None:
            if schema.label not in header:
                raise ParseError(f"{path}: missing label column {schema.label!r}")
            label_pos = header.index(schema.label)

        raw_cols: list[list] = [[] for _ in schema.features]
        labels: list[str] = []
        for rownum, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < len(header):
                raise ParseError(f"row {rownum}: expected {len(header)} cells, got {len(row)}")
            for j, f in enumerate(schema.features):
                cell = row[positions[f.name]].strip()
                if f.kind == NUMERIC:
                    raw_cols[j].append(_parse_numeric(cell, rownum, f.name))
                else:
                    if f.categories is not None and cell not in f.categories:
                        raise ParseError(
                            f"row {rownum}, column {f.name!r}: unknown category {cell!r}"
                        )
                    raw_cols[j].append(cell)
            if label_pos is not None:
                labels.append(row[label_pos].strip())

    if not raw_cols[0]:
        raise ParseError(f"{path}: no entities")

    columns = []
    features = []
    for f, cells in zip(schema.features, raw_cols):
        if f.kind == NUMERIC:
            columns.append(np.asarray(cells, dtype=np.float64))
            features.append(f)
        else:
            col = np.asarray(cells, dtype=object)
            columns.append(col)
            if f.categories is None:
                f = replace(f, categories=tuple(sorted(set(cells))))
            features.append(f)

    out_schema = Schema(features=tuple(features), label=schema.label)
    lab = np.asarray(labels, dtype=object) if label_pos is not None else None
    return Dataset(columns=tuple(columns), schema=out_schema, labels=lab)


def save_dataset(d: Dataset, csv_path, schema_path=None) -> None:
    """Write the dataset as CSV (+ JSON schema sidecar when given)."""
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = d.schema.names + ([d.schema.label] if d.schema.label else [])
        writer.writerow(header)
        for i in range(d.n):
            row = [
                repr(float(col[i])) if f.kind == NUMERIC else str(col[i])
                for col, f in zip(d.columns, d.schema.features)
            ]
            if d.schema.label:
                row.append(str(d.labels[i]))
            writer.writerow(row)
    if schema_path is not None:
        save_schema(d.schema, schema_path)


def drop_zero_range(d: Dataset) -> Dataset:
    """Remove features that carry no information.

    Numeric features with max == min and categorical features with a
    single observed category are dropped.
    """
    keep_cols, keep_feats = [], []
    for col, f in zip(d.columns, d.schema.features):
        if f.kind == NUMERIC:
            informative = col.max() > col.min()
        else:
            informative = len(set(col)) > 1
        if informative:
            keep_cols.append(col)
            keep_feats.append(f)
    if not keep_cols:
        raise ValueError("no informative features: every column has zero range")
    if len(keep_cols) == d.m:
        return d
    return Dataset(
        columns=tuple(keep_cols),
        schema=Schema(features=tuple(keep_feats), label=d.schema.label),
        labels=d.labels,
    )


def standardize_numeric(d: Dataset) -> Dataset:
    """Shift each numeric column to mean 0 and scale it to range 1.

    Each cell becomes (y - mean) / (max - min). Categorical columns
    pass through untouched.
    """
    columns = []
    for col, f in zip(d.columns, d.schema.features):
        if f.kind != NUMERIC:
            columns.append(col)
            continue
        rng = col.max() - col.min()
        if rng == 0:
            raise ValueError(
                f"feature {f.name!r} has zero range; run drop_zero_range first"
            )
        columns.append((col - col.mean()) / rng)
    return Dataset(columns=tuple(columns), schema=d.schema, labels=d.labels)


def expand_categorical(d: Dataset) -> Dataset:
    """Replace each categorical feature by one centered binary column per
    observed category.

    The indicator for the matching category is 1, others 0; each new
    column is then centered by its mean (the category frequency), so a
    frequent category contributes less than a rare one. Category order
    is lexicographic. The result is an all-numeric dataset.
    """
    if d.is_numeric:
        return d
    columns, features = [], []
    taken = set()
    for col, f in zip(d.columns, d.schema.features):
        if f.kind == NUMERIC:
            columns.append(col)
            features.append(f)
            taken.add(f.name)
            continue
        for cat in sorted(set(col)):
            name = f"{f.name}={cat}"
            if name in taken:
                raise ValueError(f"expanded column name collision: {name!r}")
            taken.add(name)
            binary = (col == cat).astype(np.float64)
            columns.append(binary - binary.mean())
            features.append(Feature(name=name, kind=NUMERIC, noise=f.noise))
    return Dataset(
        columns=tuple(columns),
        schema=Schema(features=tuple(features), label=d.schema.label),
        labels=d.labels,
    )


def inject_noise(d: Dataset, seed: int) -> Dataset:
    """Append one uniform-noise column per existing feature.

    Numeric noise is drawn uniformly over [min, max] of the source
    column; categorical noise is drawn uniformly over the source
    column's observed category set. Doubles M; new features carry the
    ``noise`` flag. Deterministic per seed; original cells unchanged.
    """
    rng = np.random.default_rng(seed)
    noise_cols, noise_feats = [], []
    existing = set(d.schema.names)
    for col, f in zip(d.columns, d.schema.features):
        name = f"{f.name}_noise"
        if name in existing:
            raise ValueError(f"noise column name collision: {name!r}")
        existing.add(name)
        if f.kind == NUMERIC:
            noise_cols.append(rng.uniform(col.min(), col.max(), size=d.n))
            noise_feats.append(Feature(name=name, kind=NUMERIC, noise=True))
        else:
            cats = tuple(sorted(set(col)))
            draws = rng.integers(0, len(cats), size=d.n)
            noise_cols.append(np.asarray([cats[i] for i in draws], dtype=object))
            noise_feats.append(
                Feature(name=name, kind=CATEGORICAL, categories=cats, noise=True)
            )
    return Dataset(
        columns=d.columns + tuple(noise_cols),
        schema=Schema(
            features=d.schema.features + tuple(noise_feats), label=d.schema.label
        ),
        labels=d.labels,
    )


@dataclass(frozen=True)
class SyntheticConfig:
    """Spherical-Gaussian mixture generator settings."""

    n_entities: int
    n_features: int
    n_clusters: int
    min_cluster_size: int = 20
    sigma_sq_range: tuple[float, float] = (0.5, 1.5)

    def __post_init__(self):
        if self.n_entities < 1 or self.n_features < 1 or self.n_clusters < 1:
            raise ValueError("counts must be positive")
        if self.n_clusters * self.min_cluster_size > self.n_entities:
            raise ValueError(
                f"infeasible: {self.n_clusters} clusters x min size "
                f"{self.min_cluster_size} exceeds {self.n_entities} entities"
            )
        lo, hi = self.sigma_sq_range
        if lo <= 0 or hi < lo:
            raise ValueError("sigma_sq_range must be positive and ordered")

    @property
    def name(self) -> str:
        return f"{self.n_entities}x{self.n_features}-{self.n_clusters}"


def parse_synthetic_config(name: str) -> SyntheticConfig:
    """Parse a 'NxM-K' configuration name, e.g. '500x20-4'."""
    try:
        size, k = name.rsplit("-", 1)
        n, m = size.split("x")
        return SyntheticConfig(int(n), int(m), int(k))
    except (ValueError, TypeError):
        raise ValueError(f"bad synthetic config name {name!r}; expected 'NxM-K'") from None


_CARDINALITY_REDRAWS = 1000


def _draw_cardinalities(cfg: SyntheticConfig, rng) -> np.ndarray:
    # Uniform random split with largest-remainder rounding, redrawn until
    # every cluster meets the minimum size.
    for _ in range(_CARDINALITY_REDRAWS):
        w = rng.uniform(0.0, 1.0, cfg.n_clusters)
        target = cfg.n_entities * w / w.sum()
        card = np.floor(target).astype(np.int64)
        frac = target - card
        for i in np.argsort(-frac)[: cfg.n_entities - card.sum()]:
            card[i] += 1
        if (card >= cfg.min_cluster_size).all():
            return card
    raise ValueError(
        "could not satisfy min_cluster_size after "
        f"{_CARDINALITY_REDRAWS} redraws; constraint too tight"
    )


def generate_synthetic(cfg: SyntheticConfig, seed: int) -> tuple[Dataset, dict]:
    """Draw a labelled spherical-Gaussian dataset.

    Per cluster: variance drawn uniformly from ``sigma_sq_range``,
    centroid components i.i.d. standard normal, cardinalities from a
    uniform random split respecting ``min_cluster_size``. Returns the
    dataset plus a provenance dict recording everything that was drawn.
    """
    rng = np.random.default_rng(seed)
    card = _draw_cardinalities(cfg, rng)
    sigma_sq = rng.uniform(*cfg.sigma_sq_range, cfg.n_clusters)
    centroids = rng.normal(0.0, 1.0, (cfg.n_clusters, cfg.n_features))

    blocks, labels = [], []
    for k in range(cfg.n_clusters):
        blocks.append(
            rng.normal(centroids[k], np.sqrt(sigma_sq[k]), (card[k], cfg.n_features))
        )
        labels.extend([f"c{k}"] * card[k])
    values = np.vstack(blocks)

    features = tuple(
        Feature(name=f"x{j + 1}", kind=NUMERIC) for j in range(cfg.n_features)
    )
    d = Dataset(
        columns=tuple(values[:, j] for j in range(cfg.n_features)),
        schema=Schema(features=features, label="class"),
        labels=np.asarray(labels, dtype=object),
    )
    provenance = {
        "seed": int(seed),
        "config": {
            "n_entities": cfg.n_entities,
            "n_features": cfg.n_features,
            "n_clusters": cfg.n_clusters,
            "min_cluster_size": cfg.min_cluster_size,
            "sigma_sq_range": list(cfg.sigma_sq_range),
        },
        "cardinalities": card.tolist(),
        "sigma_sq": sigma_sq.tolist(),
        "centroids": centroids.tolist(),
    }
    return d, provenance
