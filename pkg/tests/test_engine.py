import json

import numpy as np
import pytest

from fwkm import (
    ClusteringError,
    Dataset,
    DistanceSpec,
    Feature,
    Partition,
    Schema,
    StopRule,
    assign,
    ari,
    generate_synthetic,
    init_anomalous,
    init_random,
    run_kmeans,
    standardize_numeric,
    update_centroids,
    SyntheticConfig,
)
from fwkm.engine import SQUARED_EUCLIDEAN, uniform_weights
from oracles import exhaustive_assignment


def small_numeric(values):
    values = np.asarray(values, dtype=float)
    feats = tuple(Feature(f"x{i}") for i in range(values.shape[1]))
    return Dataset(
        columns=tuple(values[:, j] for j in range(values.shape[1])),
        schema=Schema(features=feats),
    )


def two_blobs(seed=0, n=60, sep=12.0):
    rng = np.random.default_rng(seed)
    a = rng.normal(0.0, 1.0, (n // 2, 2))
    b = rng.normal(sep, 1.0, (n - n // 2, 2))
    values = np.vstack([a, b])
    labels = np.array(["a"] * (n // 2) + ["b"] * (n - n // 2), dtype=object)
    d = small_numeric(values)
    return Dataset(
        columns=d.columns,
        schema=Schema(features=d.schema.features, label="class"),
        labels=labels,
    )


class TestPartition:
    def test_validates_index_range(self):
        with pytest.raises(ValueError, match="outside"):
            Partition(assignments=[0, 3], k=2)

    def test_counts_cover_all_entities(self):
        p = Partition(assignments=[0, 1, 1, 2], k=4)
        assert p.counts().sum() == p.n
        np.testing.assert_array_equal(p.counts(), [1, 2, 1, 0])


class TestInitRandom:
    def test_deterministic_per_seed(self, iris):
        a = init_random(iris, 3, seed=7)
        b = init_random(iris, 3, seed=7)
        np.testing.assert_array_equal(a, b)

    def test_rows_are_distinct_over_many_seeds(self):
        # continuous data, so equal values identify equal row indices
        d, _ = generate_synthetic(SyntheticConfig(150, 4, 3), seed=77)
        x = d.matrix()
        for seed in range(1000):
            cents = np.asarray(init_random(d, 3, seed=seed))
            idx = [np.flatnonzero((x == c).all(axis=1))[0] for c in cents]
            assert len(set(idx)) == 3

    def test_k_equals_n_is_a_permutation(self):
        d = small_numeric([[0.0], [1.0], [2.0]])
        cents = np.asarray(init_random(d, 3, seed=1)).ravel()
        assert sorted(cents) == [0.0, 1.0, 2.0]

    def test_k_above_n_rejected(self):
        d = small_numeric([[0.0], [1.0]])
        with pytest.raises(ClusteringError, match="exceeds"):
            init_random(d, 3, seed=0)

    def test_mixed_data_rows_copied(self):
        feats = (Feature("h"), Feature("c", "categorical"))
        d = Dataset(
            columns=(np.array([1.0, 2.0]), np.array(["a", "b"], dtype=object)),
            schema=Schema(features=feats),
        )
        cents = init_random(d, 2, seed=0)
        assert sorted((c[0], c[1]) for c in cents) == [(1.0, "a"), (2.0, "b")]


class TestInitAnomalous:
    def test_blob_centers_recovered(self):
        d = two_blobs(seed=3)
        cents = init_anomalous(d, 2, p=2.0)
        true_centers = np.array([[0.0, 0.0], [12.0, 12.0]])
        for tc in true_centers:
            nearest = np.abs(cents - tc).sum(axis=1).min()
            assert nearest < 2.0  # inside the blob (sigma = 1)

    def test_k1_returns_single_centroid(self):
        d = two_blobs(seed=4)
        cents = init_anomalous(d, 1, p=2.0)
        assert cents.shape == (1, 2)

    def test_byte_identical_repeat(self, iris):
        a = init_anomalous(iris, 3, p=1.1)
        b = init_anomalous(iris, 3, p=1.1)
        assert a.tobytes() == b.tobytes()

    def test_requires_numeric_data(self):
        feats = (Feature("c", "categorical"),)
        d = Dataset(
            columns=(np.array(["a", "b"], dtype=object),),
            schema=Schema(features=feats),
        )
        with pytest.raises(ValueError, match="all-numeric"):
            init_anomalous(d, 1, p=2.0)


class TestAssign:
    def test_entity_equal_to_centroid(self):
        d = small_numeric([[5.0, 5.0]])
        cents = np.array([[0.0, 0.0], [9.0, 9.0], [5.0, 5.0]])
        p = assign(d, cents, uniform_weights(3, 2), SQUARED_EUCLIDEAN)
        assert p.assignments[0] == 2

    def test_uniform_weights_match_unweighted_euclidean(self, rng):
        values = rng.normal(size=(40, 3))
        d = small_numeric(values)
        cents = values[:4].copy()
        p = assign(d, cents, uniform_weights(4, 3), SQUARED_EUCLIDEAN)
        plain = np.linalg.norm(values[:, None, :] - cents[None], axis=2).argmin(axis=1)
        np.testing.assert_array_equal(p.assignments, plain)

    def test_matches_exhaustive_distance_table(self, rng):
        values = rng.normal(size=(5, 3))
        d = small_numeric(values)
        cents = rng.normal(size=(2, 3))
        weights = rng.dirichlet(np.ones(3), size=2)
        spec = DistanceSpec(power=2.0, weight_exponent=3.0)
        p = assign(d, cents, weights, spec)
        expected = exhaustive_assignment(values, cents, weights, 2.0, 3.0)
        np.testing.assert_array_equal(p.assignments, expected)

    def test_tie_breaks_to_lowest_index(self):
        d = small_numeric([[0.0]])
        cents = np.array([[1.0], [-1.0]])
        p = assign(d, cents, uniform_weights(2, 1), SQUARED_EUCLIDEAN)
        assert p.assignments[0] == 0

    def test_nonfinite_distance_rejected(self):
        d = small_numeric([[1e308]])
        cents = np.array([[-1e308]])
        with pytest.raises(ValueError, match="non-finite"):
            assign(d, cents, uniform_weights(1, 1), SQUARED_EUCLIDEAN)


class TestUpdateCentroids:
    def test_singleton_cluster_is_its_entity(self):
        d = small_numeric([[1.0, 2.0], [5.0, 6.0]])
        part = Partition(assignments=[0, 1], k=2)
        cents = update_centroids(d, part, SQUARED_EUCLIDEAN)
        np.testing.assert_allclose(cents, [[1.0, 2.0], [5.0, 6.0]])

    def test_mean_for_squared_euclidean(self):
        d = small_numeric([[0.0], [2.0]])
        part = Partition(assignments=[0, 0], k=1)
        cents = update_centroids(d, part, SQUARED_EUCLIDEAN)
        assert cents[0][0] == 1.0

    def test_median_for_p1_minkowski(self):
        d = small_numeric([[1.0], [2.0], [9.0]])
        part = Partition(assignments=[0, 0, 0], k=1)
        spec = DistanceSpec(power=1.0, numeric_center="minkowski")
        cents = update_centroids(d, part, spec)
        assert cents[0][0] == 2.0

    def test_mode_for_simple_match(self):
        feats = (Feature("c", "categorical"),)
        d = Dataset(
            columns=(np.array(["a", "b", "b"], dtype=object),),
            schema=Schema(features=feats),
        )
        part = Partition(assignments=[0, 0, 0], k=1)
        cents = update_centroids(d, part, DistanceSpec(categorical_center="mode"))
        assert cents[0][0] == "b"

    def test_empty_cluster_rejected(self):
        d = small_numeric([[1.0], [2.0]])
        part = Partition(assignments=[0, 0], k=2)
        with pytest.raises(ClusteringError, match="empty"):
            update_centroids(d, part, SQUARED_EUCLIDEAN)

    def test_squared_objective_minimized_at_returned_center(self, rng):
        values = rng.normal(size=(30, 2))
        d = small_numeric(values)
        part = Partition(assignments=rng.integers(0, 2, size=30), k=2)
        cents = np.asarray(update_centroids(d, part, SQUARED_EUCLIDEAN))
        for k in range(2):
            members = values[part.assignments == k]
            for v in range(2):
                base = ((members[:, v] - cents[k, v]) ** 2).sum()
                for eps in (-1e-4, 1e-4):
                    assert base <= ((members[:, v] - (cents[k, v] + eps)) ** 2).sum()


class TestRunKmeans:
    def test_separable_blobs_recovered(self):
        d = two_blobs(seed=5)
        r = run_kmeans(standardize_numeric(d), 2, seed=0)
        assert ari(r.partition, d.labels) == 1.0

    def test_k1_gives_global_mean_and_total_scatter(self, rng):
        values = rng.normal(size=(25, 3))
        d = small_numeric(values)
        r = run_kmeans(d, 1, seed=0)
        np.testing.assert_allclose(np.asarray(r.centroids)[0], values.mean(axis=0))
        assert r.criterion == pytest.approx(((values - values.mean(axis=0)) ** 2).sum())

    def test_criterion_trace_non_increasing_100_seeds(self, iris):
        for seed in range(100):
            r = run_kmeans(iris, 3, seed=seed)
            trace = np.asarray(r.criterion_trace)
            rel = np.diff(trace) / np.abs(trace[:-1])
            assert (rel <= 1e-9).all()

    def test_iteration_cap_honored(self, iris):
        r = run_kmeans(iris, 3, seed=1, stop=StopRule(max_iterations=2))
        assert r.iterations <= 2
        assert not r.converged

    def test_crisp_partition_every_iteration(self, iris):
        r = run_kmeans(iris, 3, seed=2)
        for labels in r.assignment_trace:
            counts = np.bincount(labels, minlength=3)
            assert counts.sum() == iris.n
            assert (counts > 0).all()

    def test_result_serializes_to_json(self, iris):
        r = run_kmeans(iris, 3, seed=3)
        payload = json.loads(json.dumps(r.to_dict()))
        assert payload["algorithm"] == "kmeans"
        assert payload["converged"] is True
        assert len(payload["assignments"]) == iris.n
        assert len(payload["weights"]) == 3

    def test_requires_numeric(self):
        feats = (Feature("c", "categorical"),)
        d = Dataset(
            columns=(np.array(["a", "b"], dtype=object),),
            schema=Schema(features=feats),
        )
        with pytest.raises(ValueError, match="all-numeric"):
            run_kmeans(d, 1, seed=0)


class TestEmptyClusterPolicy:
    def test_far_entity_reseeds_empty_cluster(self):
        # K=3 on data where one initial centroid attracts nothing: the
        # run must still end with three non-empty clusters
        values = np.array([[0.0], [0.1], [0.2], [10.0], [10.1], [50.0]])
        d = small_numeric(values)
        for seed in range(40):
            r = run_kmeans(d, 3, seed=seed)
            assert (r.partition.counts() > 0).all()

    def test_k_equals_n_each_entity_its_own_cluster(self):
        values = np.array([[0.0], [1.0], [5.0], [9.0]])
        d = small_numeric(values)
        r = run_kmeans(d, 4, seed=0)
        assert sorted(r.partition.assignments) == [0, 1, 2, 3]
        assert r.criterion == pytest.approx(0.0)
