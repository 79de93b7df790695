"""Distance components and center calculations shared by all algorithms."""

from __future__ import annotations

import numpy as np

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - np.sqrt(5.0)) / 2.0
_GOLDEN_TOL = 1e-9
_GOLDEN_MAX_ITER = 200


def minkowski_component(a: float, b: float, p: float) -> float:
    """|a - b| ** p, the per-feature term of the Minkowski distance."""
    return abs(a - b) ** p


def simple_match(a, b) -> float:
    """0/1 matching dissimilarity between two categories."""
    return 0.0 if a == b else 1.0


def minkowski_centers_bulk(values: np.ndarray, p: float) -> np.ndarray:
    """Column-wise minimizers of sum_i |values[i, v] - c| ** p.

    Exact lower median for p=1, arithmetic mean for p=2, otherwise a
    golden-section search on [column min, column max] (the objective is
    convex in c for p >= 1), resolved to 1e-9 on the argument.
    """
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if values.shape[0] == 0:
        raise ValueError("empty input: a center needs at least one value")
    if p < 1.0:
        raise ValueError(f"exponent must be >= 1, got {p}")
    if p == 1.0:
        return np.sort(values, axis=0)[(values.shape[0] - 1) // 2]
    if p == 2.0:
        return values.mean(axis=0)

    a = values.min(axis=0)
    b = values.max(axis=0)

    def objective(c):
        return (np.abs(values - c[None, :]) ** p).sum(axis=0)

    for _ in range(_GOLDEN_MAX_ITER):
        h = b - a
        if h.max() <= _GOLDEN_TOL:
            break
        c = a + _INVPHI2 * h
        d = a + _INVPHI * h
        shrink_left = objective(c) < objective(d)
        a = np.where(shrink_left, a, c)
        b = np.where(shrink_left, d, b)
    return (a + b) / 2.0


def minkowski_center(values, p: float) -> float:
    """Scalar convenience wrapper around :func:`minkowski_centers_bulk`."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1:
        raise ValueError("minkowski_center expects a 1-D value list")
    return float(minkowski_centers_bulk(values[:, None], p)[0])


def distributed_centroid(cluster_values, feature=None) -> dict:
    """Category -> in-cluster frequency map (the IK-P centroid cell).

    ``feature`` is accepted for symmetry with the categorical data
    model but only the observed values matter.
    """
    values = list(cluster_values)
    if not values:
        raise ValueError("empty cluster: distributed centroid undefined")
    total = len(values)
    weights: dict = {}
    for v in values:
        weights[v] = weights.get(v, 0) + 1
    return {cat: count / total for cat, count in sorted(weights.items())}


def ikp_categorical_distance(value, weights: dict) -> float:
    """Sum of frequencies of all categories other than ``value``.

    Equals 1 - weight(value); a category unseen in the cluster is at
    distance 1.
    """
    return 1.0 - weights.get(value, 0.0)
