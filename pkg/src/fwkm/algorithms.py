"""The six feature-weighting K-Means variants.

Each algorithm is the shared engine loop plus its own weight-update
rule. Weight updates are pure functions of the dispersion matrix (the
per-cluster, per-feature sum of distances between members and their
centroid); runners wire them together with the right distance spec.

Stable identifiers: kmeans, awk, wkm, ewkm, ikp, imwk, fwsa.
Parameter names: beta (awk, wkm, ikp), gamma (ewkm), p (imwk).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .engine import (
    DistanceSpec,
    RunResult,
    StopRule,
    init_anomalous,
    init_random,
    run_kmeans,
    run_loop,
    uniform_weights,
)

WKM_SHARED = "shared"
WKM_CLUSTER = "cluster-dependent"


def _inverse_dispersion_rows(disp: np.ndarray, exponent: float) -> np.ndarray:
    """Row-wise w_v = 1 / sum_j (D_v / D_j) ** exponent with zero handling:
    inside a row, zero-dispersion features (exact minimizers) share all the
    weight equally."""
    disp = np.atleast_2d(np.asarray(disp, dtype=np.float64))
    out = np.empty_like(disp)
    for r in range(disp.shape[0]):
        row = disp[r]
        zero = row == 0.0
        if zero.any():
            out[r] = zero / zero.sum()
            continue
        # normalize by the row minimum before exponentiating to avoid
        # overflow at exponents near 1/(beta-1) ~ 10
        t = (row / row.min()) ** (-exponent)
        out[r] = t / t.sum()
    return out


def awk_update_weights(disp: np.ndarray, beta: float) -> np.ndarray:
    """Cluster-dependent weights inversely tied to dispersion.

    Zero-dispersion features in a cluster share that cluster's weight
    equally; otherwise w_kv = 1 / sum_j (D_kv / D_kj) ** (1/(beta-1)).
    """
    if beta <= 1.0:
        raise ValueError(f"awk requires beta > 1, got {beta}")
    return _inverse_dispersion_rows(disp, 1.0 / (beta - 1.0))


def wkm_update_weights(disp: np.ndarray, beta: float, mode: str = WKM_SHARED) -> np.ndarray:
    """Weighted K-Means update.

    Shared mode takes a length-M dispersion vector D_v and yields one
    weight row: features with D_v = 0 get weight 0, the rest are
    normalized inversely. At beta = 1 all the mass goes to the feature
    with the smallest dispersion (ties: lowest index). The
    cluster-dependent mode applies the same formula per cluster row
    (callers fold the smoothing constant into ``disp``).
    """
    if beta < 1.0:
        raise ValueError(f"wkm requires beta >= 1, got {beta}")
    disp = np.asarray(disp, dtype=np.float64)
    rows = np.atleast_2d(disp)
    if mode == WKM_SHARED and rows.shape[0] != 1:
        raise ValueError("shared mode expects a single dispersion row")
    if mode not in (WKM_SHARED, WKM_CLUSTER):
        raise ValueError(f"unknown wkm mode {mode!r}")

    if beta == 1.0:
        out = np.zeros_like(rows)
        out[np.arange(rows.shape[0]), rows.argmin(axis=1)] = 1.0
        return out[0] if disp.ndim == 1 else out

    exponent = 1.0 / (beta - 1.0)
    out = np.empty_like(rows)
    for r in range(rows.shape[0]):
        row = rows[r]
        nonzero = row > 0.0
        w = np.zeros_like(row)
        if not nonzero.any():
            w[:] = 1.0 / len(row)
        else:
            t = (row[nonzero] / row[nonzero].min()) ** (-exponent)
            w[nonzero] = t / t.sum()
        out[r] = w
    return out[0] if disp.ndim == 1 else out


def ewkm_update_weights(disp: np.ndarray, gamma: float) -> np.ndarray:
    """Entropy-regularized softmax weights, w_kv proportional to
    exp(-D_kv / gamma), computed shift-invariantly for overflow safety."""
    if gamma <= 0.0:
        raise ValueError(f"ewkm requires gamma > 0, got {gamma}")
    disp = np.atleast_2d(np.asarray(disp, dtype=np.float64))
    shifted = disp - disp.min(axis=1, keepdims=True)
    e = np.exp(-shifted / gamma)
    return e / e.sum(axis=1, keepdims=True)


def imwk_update_weights(disp: np.ndarray, p: float) -> np.ndarray:
    """Minkowski-exponent weights, w_kv = 1 / sum_u (D_kvp/D_kup)^(1/(p-1)).

    ``disp`` should already include the smoothing constant.
    """
    if p <= 1.0:
        raise ValueError(f"imwk requires p > 1, got {p}")
    return _inverse_dispersion_rows(disp, 1.0 / (p - 1.0))


def fwsa_update_weights(a: np.ndarray, b: np.ndarray, w_prev: np.ndarray) -> np.ndarray:
    """Self-adjustment step: move halfway from the current weights toward
    the normalized between/within separation ratios."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    w_prev = np.asarray(w_prev, dtype=np.float64)
    if (a <= 0.0).any():
        raise ValueError("fwsa: zero within-cluster separation for some feature")
    ratio = b / a
    total = ratio.sum()
    if total == 0.0:
        return w_prev.copy()
    return 0.5 * (w_prev + ratio / total)


# ---------------------------------------------------------------------------
# runners


def _weighted_criterion(exponent: float):
    def criterion(disp, weights):
        return float(((weights**exponent) * disp).sum())

    return criterion


def _require_numeric(d: Dataset, algo: str):
    if not d.is_numeric:
        raise ValueError(f"{algo} requires an all-numeric dataset; expand categoricals first")


def run_awk(d: Dataset, k: int, beta: float, seed: int, stop: StopRule = StopRule()) -> RunResult:
    """Attribute-weighting K-Means: cluster-dependent weights with
    exponent beta, squared Euclidean / simple-matching distances. Mixed
    numeric and categorical data is handled without expansion."""
    if beta <= 1.0:
        raise ValueError(f"awk requires beta > 1, got {beta}")
    spec = DistanceSpec(power=2.0, weight_exponent=beta, categorical_center="mode")
    centroids = init_random(d, k, seed)

    def update(disp, labels, counts):
        return awk_update_weights(disp, beta)

    return run_loop(
        d, k, spec, centroids, stop,
        weight_update=update,
        criterion=_weighted_criterion(beta),
        algorithm="awk", params={"beta": beta}, seed=seed,
    )


def run_wkmeans(
    d: Dataset,
    k: int,
    beta: float,
    seed: int,
    stop: StopRule = StopRule(),
    mode: str = WKM_SHARED,
    smoothing: float | str = "auto",
) -> RunResult:
    """Weighted K-Means with exponent beta on the weights.

    Shared mode (the default) keeps one weight per feature and each
    partial step is an exact minimizer, so the criterion trace is
    non-increasing for beta > 1. The cluster-dependent mode keeps one
    weight per (cluster, feature) and adds a smoothing constant to each
    member's distance before the update; ``smoothing`` is that constant
    ("auto" recomputes it each iteration as the mean distance over all
    (entity, feature) pairs). At beta = 0 the weights have no effect and
    the run reproduces plain K-Means exactly.
    """
    _require_numeric(d, "wkm")
    if beta != 0.0 and beta < 1.0:
        raise ValueError(f"wkm requires beta = 0 or beta >= 1, got {beta}")
    if mode not in (WKM_SHARED, WKM_CLUSTER):
        raise ValueError(f"unknown wkm mode {mode!r}")
    spec = DistanceSpec(power=2.0, weight_exponent=beta)
    centroids = init_random(d, k, seed)
    n = d.n

    update = None
    if beta != 0.0:
        if mode == WKM_SHARED:
            def update(disp, labels, counts):
                w = wkm_update_weights(disp.sum(axis=0), beta, WKM_SHARED)
                return np.tile(w, (k, 1))
        else:
            def update(disp, labels, counts):
                c = disp.sum() / (n * disp.shape[1]) if smoothing == "auto" else float(smoothing)
                smoothed = disp + counts[:, None] * c
                return wkm_update_weights(smoothed, beta, WKM_CLUSTER)

    return run_loop(
        d, k, spec, centroids, stop,
        weight_update=update,
        criterion=_weighted_criterion(beta),
        algorithm="wkm", params={"beta": beta, "mode": mode}, seed=seed,
    )


def run_ewkm(d: Dataset, k: int, gamma: float, seed: int, stop: StopRule = StopRule()) -> RunResult:
    """Entropy-weighted K-Means; the reported criterion is the weighted
    dispersion plus the gamma-scaled negative weight entropy."""
    _require_numeric(d, "ewkm")
    if gamma <= 0.0:
        raise ValueError(f"ewkm requires gamma > 0, got {gamma}")
    spec = DistanceSpec(power=2.0, weight_exponent=1.0)
    centroids = init_random(d, k, seed)

    def update(disp, labels, counts):
        return ewkm_update_weights(disp, gamma)

    def criterion(disp, weights):
        entropy = np.where(weights > 0.0, weights * np.log(weights), 0.0).sum()
        return float((weights * disp).sum() + gamma * entropy)

    return run_loop(
        d, k, spec, centroids, stop,
        weight_update=update,
        criterion=criterion,
        algorithm="ewkm", params={"gamma": gamma}, seed=seed,
    )


def run_ikp(d: Dataset, k: int, beta: float, seed: int, stop: StopRule = StopRule()) -> RunResult:
    """Improved K-Prototypes: shared beta-exponent weights; numeric
    features use Manhattan distance with mean centroids (the original
    method's mismatch, kept deliberately), categorical features use
    frequency-distributed centroids with complement-frequency distance.
    May stop at the iteration cap without converging."""
    if beta <= 1.0:
        raise ValueError(f"ikp requires beta > 1, got {beta}")
    spec = DistanceSpec(
        power=1.0,
        weight_exponent=beta,
        numeric_center="mean",
        categorical_center="distributed",
    )
    centroids = init_random(d, k, seed)

    def update(disp, labels, counts):
        w = wkm_update_weights(disp.sum(axis=0), beta, WKM_SHARED)
        return np.tile(w, (k, 1))

    return run_loop(
        d, k, spec, centroids, stop,
        weight_update=update,
        criterion=_weighted_criterion(beta),
        algorithm="ikp", params={"beta": beta}, seed=seed,
    )


def run_imwk(d: Dataset, k: int, p: float, stop: StopRule = StopRule()) -> RunResult:
    """Intelligent Minkowski Weighted K-Means. Deterministic: centroids
    come from anomalous-pattern extraction, not from a random draw.

    The weight update smooths each dispersion by a constant c; c is set
    on the first iteration to the mean per-(cluster, feature) dispersion
    and then kept fixed, which makes the reported criterion — the
    smoothed weighted dispersion sum_kv w_kv^p (D_kvp + c) — provably
    non-increasing across iterations.
    """
    _require_numeric(d, "imwk")
    if not 1.0 < p <= 5.0:
        raise ValueError(f"imwk requires p in (1, 5], got {p}")
    spec = DistanceSpec(power=p, weight_exponent=p, numeric_center="minkowski")
    centroids = init_anomalous(d, k, p)
    frozen_c: list[float] = []

    def update(disp, labels, counts):
        if not frozen_c:
            frozen_c.append(float(disp.sum() / disp.size))
        return imwk_update_weights(disp + frozen_c[0], p)

    def criterion(disp, weights):
        return float(((weights**p) * (disp + frozen_c[0])).sum())

    return run_loop(
        d, k, spec, centroids, stop,
        weight_update=update,
        criterion=criterion,
        algorithm="imwk", params={"p": p}, seed=None,
    )


def run_fwsa(d: Dataset, k: int, seed: int, stop: StopRule = StopRule()) -> RunResult:
    """Feature-weight self-adjustment K-Means: shared weights nudged each
    iteration toward the features separating clusters best. Takes no
    extra parameter."""
    _require_numeric(d, "fwsa")
    spec = DistanceSpec(power=2.0, weight_exponent=1.0)
    centroids = init_random(d, k, seed)
    x = d.matrix()
    global_center = x.mean(axis=0)
    state = {"w": uniform_weights(k, d.m)[0]}

    def update(disp, labels, counts):
        a = disp.sum(axis=0)
        cent = np.asarray(
            [x[labels == j].mean(axis=0) for j in range(k)], dtype=np.float64
        )
        b = (counts[:, None] * (cent - global_center) ** 2).sum(axis=0)
        state["w"] = fwsa_update_weights(a, b, state["w"])
        return np.tile(state["w"], (k, 1))

    return run_loop(
        d, k, spec, centroids, stop,
        weight_update=update,
        criterion=_weighted_criterion(1.0),
        algorithm="fwsa", params={}, seed=seed,
    )


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class AlgorithmInfo:
    """CLI/bench metadata for one algorithm."""

    id: str
    param: str | None  # flag name of the scalar parameter, if any
    deterministic: bool
    grid_start: float  # default sweep grid lower bound
    grid_stop: float = 5.0

    def validate_param(self, value: float | None):
        if self.param is None:
            if value is not None:
                raise ValueError(f"{self.id} takes no parameter")
            return
        if value is None:
            raise ValueError(f"{self.id} requires parameter {self.param!r}")
        if self.id in ("awk", "ikp") and value <= 1.0:
            raise ValueError(f"{self.id}: {self.param} must be > 1")
        if self.id == "wkm" and value < 1.0:
            raise ValueError("wkm: beta < 1 rejected except explicit beta = 1")
        if self.id == "ewkm" and value <= 0.0:
            raise ValueError("ewkm: gamma must be > 0")
        if self.id == "imwk" and not 1.0 < value <= 5.0:
            raise ValueError("imwk: p must lie in (1, 5]")


ALGORITHMS = {
    "kmeans": AlgorithmInfo("kmeans", None, False, 1.1),
    "awk": AlgorithmInfo("awk", "beta", False, 1.1),
    "wkm": AlgorithmInfo("wkm", "beta", False, 1.1),
    "ewkm": AlgorithmInfo("ewkm", "gamma", False, 0.1),
    "ikp": AlgorithmInfo("ikp", "beta", False, 1.1),
    "imwk": AlgorithmInfo("imwk", "p", True, 1.1),
    "fwsa": AlgorithmInfo("fwsa", None, False, 1.1),
}


def run_algorithm(
    algo: str,
    d: Dataset,
    k: int,
    param: float | None = None,
    seed: int | None = None,
    stop: StopRule = StopRule(),
) -> RunResult:
    """Dispatch a single run by algorithm identifier."""
    if algo not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algo!r}; choose from {sorted(ALGORITHMS)}")
    info = ALGORITHMS[algo]
    info.validate_param(param)
    if algo == "kmeans":
        return run_kmeans(d, k, seed, stop)
    if algo == "awk":
        return run_awk(d, k, param, seed, stop)
    if algo == "wkm":
        return run_wkmeans(d, k, param, seed, stop)
    if algo == "ewkm":
        return run_ewkm(d, k, param, seed, stop)
    if algo == "ikp":
        return run_ikp(d, k, param, seed, stop)
    if algo == "imwk":
        return run_imwk(d, k, param, stop)
    return run_fwsa(d, k, seed, stop)
