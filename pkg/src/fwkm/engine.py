"""The shared iterate-until-converged clustering loop.

All weighted K-Means variants in this package are the same loop with
different distance kernels, center rules and weight updates. The loop
alternates: assign entities to the nearest centroid under the current
weights, re-center each cluster, update the weights, and stops when the
assignment no longer changes (or an iteration cap is hit).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import CATEGORICAL, NUMERIC, Dataset
from .metrics import distributed_centroid, ikp_categorical_distance, minkowski_centers_bulk


class ClusteringError(RuntimeError):
    """A run could not produce or sustain the requested K clusters."""


@dataclass(frozen=True)
class StopRule:
    """Convergence control: stop when assignments are unchanged, with a
    hard iteration cap."""

    max_iterations: int = 100

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class DistanceSpec:
    """How a particular algorithm measures dissimilarity and re-centers.

    power            exponent q applied to |y - c| for numeric features
    weight_exponent  exponent applied to weights in the assignment step
    numeric_center   'mean' or 'minkowski' (minimizer of sum |y-c|**power)
    categorical_center
                     'mode' (paired with 0/1 simple matching) or
                     'distributed' (frequency centroid with its
                     complement-frequency distance)
    """

    power: float = 2.0
    weight_exponent: float = 1.0
    numeric_center: str = "mean"
    categorical_center: str = "mode"

    def __post_init__(self):
        if self.numeric_center not in ("mean", "minkowski"):
            raise ValueError(f"unknown numeric center {self.numeric_center!r}")
        if self.categorical_center not in ("mode", "distributed"):
            raise ValueError(f"unknown categorical center {self.categorical_center!r}")


SQUARED_EUCLIDEAN = DistanceSpec()


@dataclass(eq=False)
class Partition:
    """Crisp assignment of each entity to exactly one of K clusters."""

    assignments: np.ndarray
    k: int

    def __post_init__(self):
        self.assignments = np.asarray(self.assignments, dtype=np.int64)
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.assignments.size == 0:
            raise ValueError("empty partition")
        if self.assignments.min() < 0 or self.assignments.max() >= self.k:
            raise ValueError("assignment index outside [0, K)")

    @property
    def n(self) -> int:
        return len(self.assignments)

    def counts(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)


@dataclass
class RunResult:
    """Outcome of one clustering run.

    ``criterion_trace`` holds the algorithm's criterion after each full
    iteration; ``weight_trace`` and ``assignment_trace`` the matching
    per-iteration states (used by the invariant checks).
    """

    algorithm: str
    params: dict
    seed: int | None
    partition: Partition
    centroids: object
    weights: np.ndarray
    criterion: float
    iterations: int
    converged: bool
    criterion_trace: list = field(default_factory=list)
    weight_trace: list = field(default_factory=list)
    assignment_trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "params": self.params,
            "seed": self.seed,
            "iterations": self.iterations,
            "converged": self.converged,
            "criterion": self.criterion,
            "assignments": self.partition.assignments.tolist(),
            "weights": np.asarray(self.weights).tolist(),
        }


# ---------------------------------------------------------------------------
# computational views


class _DenseEngine:
    """All-numeric fast path: data as an N x M float matrix."""

    def __init__(self, d: Dataset, spec: DistanceSpec):
        self.x = d.matrix()
        self.spec = spec
        self.n, self.m = self.x.shape

    def distances(self, centroids: np.ndarray, eff_weights: np.ndarray) -> np.ndarray:
        q = self.spec.power
        # overflow surfaces as inf and is rejected below
        with np.errstate(over="ignore"):
            diff = np.abs(self.x[:, None, :] - centroids[None, :, :])
            dist = (diff**q * eff_weights[None, :, :]).sum(axis=2)
        if not np.isfinite(dist).all():
            raise ValueError("non-finite distance encountered")
        return dist

    def centroids(self, labels: np.ndarray, k: int) -> np.ndarray:
        out = np.empty((k, self.m))
        for j in range(k):
            members = self.x[labels == j]
            if len(members) == 0:
                raise ClusteringError(f"cluster {j} is empty")
            if self.spec.numeric_center == "mean":
                out[j] = members.mean(axis=0)
            else:
                out[j] = minkowski_centers_bulk(members, self.spec.power)
        return out

    def dispersions(self, labels: np.ndarray, centroids: np.ndarray, k: int) -> np.ndarray:
        q = self.spec.power
        out = np.empty((k, self.m))
        for j in range(k):
            out[j] = (np.abs(self.x[labels == j] - centroids[j]) ** q).sum(axis=0)
        return out

    def row(self, i: int) -> np.ndarray:
        return self.x[i].copy()


class _MixedEngine:
    """General path for datasets with categorical features.

    Centroid cells are floats for numeric features, a category for
    'mode' centers, or a category->frequency dict for 'distributed'
    centers. Distances accumulate feature by feature.
    """

    def __init__(self, d: Dataset, spec: DistanceSpec):
        self.columns = d.columns
        self.kinds = [f.kind for f in d.schema.features]
        self.spec = spec
        self.n = d.n
        self.m = d.m

    def _cat_column_distance(self, col: np.ndarray, cell) -> np.ndarray:
        if self.spec.categorical_center == "mode":
            return (col != cell).astype(np.float64)
        return np.asarray([ikp_categorical_distance(v, cell) for v in col])

    def distances(self, centroids: list, eff_weights: np.ndarray) -> np.ndarray:
        k = len(centroids)
        dist = np.zeros((self.n, k))
        q = self.spec.power
        with np.errstate(over="ignore"):
            for v, (col, kind) in enumerate(zip(self.columns, self.kinds)):
                for j in range(k):
                    cell = centroids[j][v]
                    if kind == NUMERIC:
                        component = np.abs(col - cell) ** q
                    else:
                        component = self._cat_column_distance(col, cell)
                    dist[:, j] += eff_weights[j, v] * component
        if not np.isfinite(dist).all():
            raise ValueError("non-finite distance encountered")
        return dist

    def centroids(self, labels: np.ndarray, k: int) -> list:
        out = []
        for j in range(k):
            mask = labels == j
            if not mask.any():
                raise ClusteringError(f"cluster {j} is empty")
            row = []
            for col, kind in zip(self.columns, self.kinds):
                members = col[mask]
                if kind == NUMERIC:
                    if self.spec.numeric_center == "mean":
                        row.append(float(members.mean()))
                    else:
                        row.append(float(minkowski_centers_bulk(members[:, None], self.spec.power)[0]))
                elif self.spec.categorical_center == "mode":
                    cats, counts = np.unique(members.astype(str), return_counts=True)
                    row.append(cats[np.argmax(counts)])  # ties: lexicographic min
                else:
                    row.append(distributed_centroid(members))
            out.append(row)
        return out

    def dispersions(self, labels: np.ndarray, centroids: list, k: int) -> np.ndarray:
        q = self.spec.power
        out = np.zeros((k, self.m))
        for v, (col, kind) in enumerate(zip(self.columns, self.kinds)):
            for j in range(k):
                members = col[labels == j]
                cell = centroids[j][v]
                if kind == NUMERIC:
                    out[j, v] = (np.abs(members - cell) ** q).sum()
                else:
                    out[j, v] = self._cat_column_distance(members, cell).sum()
        return out

    def row(self, i: int) -> list:
        return [
            _normalize_categorical_cell(col[i], kind, self.spec)
            for col, kind in zip(self.columns, self.kinds)
        ]


def _make_engine(d: Dataset, spec: DistanceSpec):
    return _DenseEngine(d, spec) if d.is_numeric else _MixedEngine(d, spec)


# ---------------------------------------------------------------------------
# public single-step operations


def uniform_weights(k: int, m: int) -> np.ndarray:
    return np.full((k, m), 1.0 / m)


def init_random(d: Dataset, k: int, seed: int):
    """Copy K distinct entity rows as the initial centroids."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > d.n:
        raise ClusteringError(f"K={k} exceeds the {d.n} available entities")
    rng = np.random.default_rng(seed)
    idx = rng.choice(d.n, size=k, replace=False)
    if d.is_numeric:
        return d.matrix()[idx].copy()
    return [[col[i] for col in d.columns] for i in idx]


def assign(d: Dataset, centroids, weights: np.ndarray, spec: DistanceSpec) -> Partition:
    """Nearest-centroid assignment under the spec's weighted dissimilarity.

    Weights enter as w ** spec.weight_exponent; ties go to the lowest
    cluster index.
    """
    engine = _make_engine(d, spec)
    k = len(centroids)
    eff = np.asarray(weights, dtype=np.float64) ** spec.weight_exponent
    labels = engine.distances(_as_centroid_array(centroids, d), eff).argmin(axis=1)
    return Partition(assignments=labels, k=k)


def _as_centroid_array(centroids, d: Dataset):
    if d.is_numeric and not isinstance(centroids, np.ndarray):
        return np.asarray(centroids, dtype=np.float64)
    return centroids


def update_centroids(d: Dataset, partition: Partition, spec: DistanceSpec):
    """Per-cluster centers under the spec: mean, Minkowski center, mode,
    or distributed centroid. Raises on empty clusters."""
    engine = _make_engine(d, spec)
    return engine.centroids(partition.assignments, partition.k)


def _normalize_categorical_cell(cell, kind, spec: DistanceSpec):
    # a raw category seeding a distributed centroid is the degenerate
    # frequency map with all mass on that category
    if kind == CATEGORICAL and spec.categorical_center == "distributed" and not isinstance(cell, dict):
        return {cell: 1.0}
    return cell


def _fix_empty_clusters(engine, labels, centroids, counts, dist):
    """Re-seed each empty cluster with the entity farthest from its own
    centroid (among clusters that can spare a member)."""
    n = len(labels)
    own = dist[np.arange(n), labels]
    for j in range(len(counts)):
        while counts[j] == 0:
            eligible = counts[labels] >= 2
            if not eligible.any():
                raise ClusteringError("unable to find K clusters")
            masked = np.where(eligible, own, -np.inf)
            i = int(np.argmax(masked))
            counts[labels[i]] -= 1
            labels[i] = j
            counts[j] += 1
            own[i] = 0.0
            centroids[j] = engine.row(i)
    return labels, centroids


def init_anomalous(d: Dataset, k: int, p: float):
    """Deterministic seeding by iterative anomalous-pattern extraction.

    With uniform feature weights: take the entity farthest from the
    grand center, grow the cluster of entities closer to it than to the
    grand center (re-centering until stable), set it aside, and repeat
    until no entity remains. The centroids of the K most populous
    patterns are returned. All-numeric data only.
    """
    if not d.is_numeric:
        raise ValueError("anomalous initialization requires all-numeric data")
    if k > d.n:
        raise ClusteringError(f"K={k} exceeds the {d.n} available entities")
    x = d.matrix()
    n, m = x.shape
    w = np.full(m, 1.0 / m) ** p

    def wdist(rows, center):
        return (w * np.abs(rows - center) ** p).sum(axis=1)

    grand = minkowski_centers_bulk(x, p)
    remaining = np.arange(n)
    patterns = []  # (size, extraction order, centroid)
    order = 0
    while remaining.size:
        rows = x[remaining]
        to_grand = wdist(rows, grand)
        centroid = rows[int(np.argmax(to_grand))].copy()
        members = None
        for _ in range(200):
            closer = wdist(rows, centroid) < to_grand
            if not closer.any():
                closer = np.zeros(len(remaining), dtype=bool)
                closer[int(np.argmax(to_grand))] = True
            if members is not None and np.array_equal(closer, members):
                break
            members = closer
            centroid = minkowski_centers_bulk(rows[members], p)
        patterns.append((int(members.sum()), order, centroid))
        order += 1
        remaining = remaining[~members]
    if len(patterns) < k:
        raise ClusteringError(f"anomalous init yielded k={len(patterns)} < K={k}")
    patterns.sort(key=lambda t: (-t[0], t[1]))
    return np.vstack([c for _, _, c in patterns[:k]])


# ---------------------------------------------------------------------------
# the shared loop


def run_loop(
    d: Dataset,
    k: int,
    spec: DistanceSpec,
    initial_centroids,
    stop: StopRule,
    weight_update=None,
    criterion=None,
    algorithm: str = "",
    params: dict | None = None,
    seed: int | None = None,
    initial_weights: np.ndarray | None = None,
) -> RunResult:
    """Alternate assignment, re-centering and weight updates to convergence.

    ``weight_update(disp, labels, counts)`` returns the new K x M weight
    matrix given raw per-cluster-per-feature dispersions;
    ``criterion(disp, weights)`` evaluates the algorithm's objective for
    the end-of-iteration state. The criterion of a full iteration is
    recorded after all three partial steps.
    """
    engine = _make_engine(d, spec)
    if d.is_numeric:
        centroids = np.array(initial_centroids, dtype=np.float64)
    else:
        centroids = [
            [
                _normalize_categorical_cell(cell, f.kind, spec)
                for cell, f in zip(row, d.schema.features)
            ]
            for row in initial_centroids
        ]
    weights = uniform_weights(k, engine.m) if initial_weights is None else initial_weights.copy()
    if criterion is None:
        criterion = lambda disp, w: float(disp.sum())

    labels = None
    converged = False
    crit_trace: list[float] = []
    weight_trace: list[np.ndarray] = []
    assign_trace: list[np.ndarray] = []
    iterations = 0

    for _ in range(stop.max_iterations):
        eff = weights**spec.weight_exponent
        dist = engine.distances(centroids, eff)
        new_labels = dist.argmin(axis=1)
        counts = np.bincount(new_labels, minlength=k)
        if (counts == 0).any():
            new_labels, centroids = _fix_empty_clusters(
                engine, new_labels, centroids, counts, dist
            )
        iterations += 1
        if labels is not None and np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels
        centroids = engine.centroids(labels, k)
        disp = engine.dispersions(labels, centroids, k)
        if weight_update is not None:
            weights = weight_update(disp, labels, np.bincount(labels, minlength=k))
        value = criterion(disp, weights)
        if not np.isfinite(value):
            raise ValueError("criterion is not finite")
        crit_trace.append(value)
        weight_trace.append(weights.copy())
        assign_trace.append(labels.copy())

    return RunResult(
        algorithm=algorithm,
        params=dict(params or {}),
        seed=seed,
        partition=Partition(assignments=labels, k=k),
        centroids=centroids,
        weights=weights,
        criterion=crit_trace[-1],
        iterations=iterations,
        converged=converged,
        criterion_trace=crit_trace,
        weight_trace=weight_trace,
        assignment_trace=assign_trace,
    )


def run_kmeans(d: Dataset, k: int, seed: int, stop: StopRule = StopRule()) -> RunResult:
    """Plain K-Means: squared Euclidean distance, mean centroids, all
    features weighted equally."""
    if not d.is_numeric:
        raise ValueError("kmeans requires an all-numeric dataset; expand categoricals first")
    spec = DistanceSpec(power=2.0, weight_exponent=0.0)
    centroids = init_random(d, k, seed)
    return run_loop(
        d,
        k,
        spec,
        centroids,
        stop,
        weight_update=None,
        criterion=lambda disp, w: float(disp.sum()),
        algorithm="kmeans",
        params={},
        seed=seed,
    )
