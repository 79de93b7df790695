"""Benchmark orchestration: parameter sweeps, restarts, synthetic batches
and report rendering.

Per-run seeds are derived purely from (master seed, grid index, run
index), so results are identical whatever the execution order or degree
of parallelism.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .algorithms import ALGORITHMS, run_algorithm
from .dataset import (
    Dataset,
    SyntheticConfig,
    drop_zero_range,
    generate_synthetic,
    inject_noise,
    parse_synthetic_config,
    standardize_numeric,
)
from .engine import ClusteringError, StopRule
from .evaluation import ari


class BenchError(RuntimeError):
    """A sweep could not produce any successful run."""


@dataclass(frozen=True)
class Grid:
    """Inclusive arithmetic parameter grid."""

    start: float
    stop: float
    step: float

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("grid step must be positive")
        if self.stop < self.start:
            raise ValueError("grid stop below start")

    def values(self) -> list[float]:
        count = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [round(self.start + i * self.step, 10) for i in range(count)]


def default_grid(algorithm: str) -> Grid | None:
    """Paper protocol grid: 0.1-5.0 for ewkm, 1.1-5.0 for the exponent
    algorithms (the update rules are singular at 1), none for the
    parameter-free ones."""
    info = ALGORITHMS[algorithm]
    if info.param is None:
        return None
    return Grid(info.grid_start, info.grid_stop, 0.1)


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: an algorithm, its parameter grid and the restart count."""

    algorithm: str
    grid: Grid | None = None
    restarts: int = 100
    master_seed: int = 0
    extra_params: tuple[float, ...] = ()
    max_iterations: int = 100

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")

    def param_values(self) -> list[float | None]:
        if ALGORITHMS[self.algorithm].param is None:
            return [None]
        grid = self.grid if self.grid is not None else default_grid(self.algorithm)
        values = sorted(set(grid.values()) | set(self.extra_params))
        return values

    def effective_restarts(self) -> int:
        # a deterministic algorithm gains nothing from restarts
        return 1 if ALGORITHMS[self.algorithm].deterministic else self.restarts


@dataclass
class SweepRow:
    """Aggregate over the restarts at one grid point."""

    param: float | None
    mean: float | None
    std: float | None
    max: float | None
    failures: int
    n_runs: int

    def to_dict(self) -> dict:
        return {
            "param": self.param,
            "mean": self.mean,
            "std": self.std,
            "max": self.max,
            "failures": self.failures,
            "n_runs": self.n_runs,
        }


@dataclass
class SweepReport:
    """Full sweep outcome; the optimum is the grid point with the highest
    mean ARI (ties: smallest parameter)."""

    dataset_id: str
    algorithm: str
    restarts: int
    master_seed: int
    rows: list[SweepRow]
    optimum: SweepRow
    grid: Grid | None = None

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset_id,
            "algorithm": self.algorithm,
            "grid": (
                {"min": self.grid.start, "max": self.grid.stop, "step": self.grid.step}
                if self.grid is not None
                else None
            ),
            "restarts": self.restarts,
            "master_seed": self.master_seed,
            "rows": [r.to_dict() for r in self.rows],
            "optimum": self.optimum.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def run_seed(master_seed: int, grid_index: int, run_index: int) -> int:
    """Deterministic per-run seed; depends only on its three arguments."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(grid_index, run_index))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _sweep_point(args) -> tuple[int, list[float], int]:
    """Run all restarts at one grid point; returns (grid index, ARIs of
    successful runs, failure count). Top level so process pools can pick
    it up."""
    d, algorithm, param, grid_index, restarts, master_seed, k, max_iterations = args
    stop = StopRule(max_iterations=max_iterations)
    scores: list[float] = []
    failures = 0
    for run_index in range(restarts):
        seed = run_seed(master_seed, grid_index, run_index)
        try:
            result = run_algorithm(algorithm, d, k, param=param, seed=seed, stop=stop)
        except ClusteringError:
            failures += 1
            continue
        scores.append(ari(result.partition, d.labels))
    return grid_index, scores, failures


def sweep(d: Dataset, cfg: SweepConfig, dataset_id: str = "dataset", n_jobs: int = 1) -> SweepReport:
    """Run the full restart protocol over the parameter grid and score
    every run against the dataset's ground-truth labels."""
    if d.labels is None:
        raise ValueError("sweep requires a dataset with ground-truth labels")
    k = d.n_classes()
    params = cfg.param_values()
    restarts = cfg.effective_restarts()
    tasks = [
        (d, cfg.algorithm, param, gi, restarts, cfg.master_seed, k, cfg.max_iterations)
        for gi, param in enumerate(params)
    ]

    results: dict[int, tuple[list[float], int]] = {}
    if n_jobs <= 1:
        for task in tasks:
            gi, scores, failures = _sweep_point(task)
            results[gi] = (scores, failures)
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            for gi, scores, failures in pool.map(_sweep_point, tasks):
                results[gi] = (scores, failures)

    rows = []
    for gi, param in enumerate(params):
        scores, failures = results[gi]
        if scores:
            arr = np.asarray(scores)
            rows.append(
                SweepRow(
                    param=param,
                    mean=float(arr.mean()),
                    std=float(arr.std()),
                    max=float(arr.max()),
                    failures=failures,
                    n_runs=restarts,
                )
            )
        else:
            rows.append(
                SweepRow(param=param, mean=None, std=None, max=None,
                         failures=failures, n_runs=restarts)
            )

    scored = [r for r in rows if r.mean is not None]
    if not scored:
        raise BenchError("every run at every grid point failed")
    optimum = max(scored, key=lambda r: (r.mean, -(r.param if r.param is not None else 0.0)))
    grid = cfg.grid
    if grid is None and ALGORITHMS[cfg.algorithm].param is not None:
        grid = default_grid(cfg.algorithm)
    return SweepReport(
        dataset_id=dataset_id,
        algorithm=cfg.algorithm,
        restarts=restarts,
        master_seed=cfg.master_seed,
        rows=rows,
        optimum=optimum,
        grid=grid,
    )


# ---------------------------------------------------------------------------
# synthetic batches


@dataclass
class BatchRow:
    """Table-6-style aggregation of per-dataset sweep optima."""

    config: str
    n_datasets: int
    mean_of_means: float
    std_of_means: float
    mean_of_max: float
    std_of_max: float
    mean_param: float | None
    std_param: float | None

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "n_datasets": self.n_datasets,
            "mean_of_means": self.mean_of_means,
            "std_of_means": self.std_of_means,
            "mean_of_max": self.mean_of_max,
            "std_of_max": self.std_of_max,
            "mean_param": self.mean_param,
            "std_param": self.std_param,
        }


@dataclass
class BatchReport:
    algorithm: str
    noise: bool
    rows: list[BatchRow]
    reports: dict = field(default_factory=dict)  # config -> list[SweepReport]

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "noise": self.noise,
            "rows": [r.to_dict() for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def dataset_seed(master_seed: int, config_index: int, dataset_index: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(1000 + config_index, dataset_index))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def prepare_synthetic(cfg: SyntheticConfig, seed: int, noise: bool) -> Dataset:
    """Generate, drop empty-range columns, range-standardize and (optio-
    nally) append uniform noise columns drawn from the standardized
    domains."""
    d, _ = generate_synthetic(cfg, seed)
    d = standardize_numeric(drop_zero_range(d))
    if noise:
        d = inject_noise(d, seed=seed + 1)
    return d


def batch_synthetic(
    config_names: list[str],
    per_config: int,
    cfg: SweepConfig,
    seed: int,
    noise: bool = False,
    n_jobs: int = 1,
) -> BatchReport:
    """Sweep `per_config` fresh synthetic datasets for each configuration
    and aggregate the per-dataset optima: mean/std of the optimum means,
    of the optimum maxima, and of the selected parameters."""
    if per_config < 1:
        raise ValueError("per_config must be >= 1")
    rows = []
    reports: dict[str, list[SweepReport]] = {}
    for ci, name in enumerate(config_names):
        syn = parse_synthetic_config(name) if isinstance(name, str) else name
        per_ds = []
        for di in range(per_config):
            ds_seed = dataset_seed(seed, ci, di)
            d = prepare_synthetic(syn, ds_seed, noise)
            sweep_cfg = SweepConfig(
                algorithm=cfg.algorithm,
                grid=cfg.grid,
                restarts=cfg.restarts,
                master_seed=run_seed(seed, 2000 + ci, di),
                extra_params=cfg.extra_params,
                max_iterations=cfg.max_iterations,
            )
            report = sweep(d, sweep_cfg, dataset_id=f"{syn.name}#{di}", n_jobs=n_jobs)
            per_ds.append(report)
        reports[syn.name] = per_ds
        means = np.asarray([r.optimum.mean for r in per_ds])
        maxes = np.asarray([r.optimum.max for r in per_ds])
        params = [r.optimum.param for r in per_ds]
        has_param = params[0] is not None
        rows.append(
            BatchRow(
                config=syn.name,
                n_datasets=per_config,
                mean_of_means=float(means.mean()),
                std_of_means=float(means.std()),
                mean_of_max=float(maxes.mean()),
                std_of_max=float(maxes.std()),
                mean_param=float(np.mean(params)) if has_param else None,
                std_param=float(np.std(params)) if has_param else None,
            )
        )
    return BatchReport(algorithm=cfg.algorithm, noise=noise, rows=rows, reports=reports)


# ---------------------------------------------------------------------------
# rendering


def round2(x: float | None) -> str:
    """Two-decimal formatting with ties rounded away from zero, so 0.805
    renders as 0.81 (binary float repr notwithstanding)."""
    if x is None:
        return "-"
    return str(Decimal(repr(float(x))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _param_str(p: float | None) -> str:
    return "-" if p is None else f"{p:g}"


def render_report(report, fmt: str = "markdown") -> str:
    """Render a SweepReport or BatchReport as markdown, CSV or JSON.

    Markdown and CSV round to two decimals the way the reference tables
    do; JSON keeps full precision.
    """
    if fmt not in ("markdown", "csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    if isinstance(report, SweepReport):
        return _render_sweep(report, fmt)
    if isinstance(report, BatchReport):
        return _render_batch(report, fmt)
    raise TypeError(f"cannot render {type(report).__name__}")


def _render_sweep(report: SweepReport, fmt: str) -> str:
    if fmt == "json":
        return report.to_json()
    header = ["param", "mean", "std", "max", "failures"]
    lines = []
    rows = [
        [
            _param_str(r.param),
            round2(r.mean),
            round2(r.std),
            round2(r.max),
            str(r.failures),
        ]
        for r in report.rows
    ]
    if fmt == "csv":
        lines.append(",".join(header))
        lines.extend(",".join(r) for r in rows)
        o = report.optimum
        lines.append(f"optimum,{_param_str(o.param)},{round2(o.mean)},{round2(o.std)},{round2(o.max)}")
        return "\n".join(lines) + "\n"
    lines.append(f"## {report.algorithm} on {report.dataset_id} ({report.restarts} restarts)")
    lines.append("")
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "---|" * len(header))
    lines.extend("| " + " | ".join(r) + " |" for r in rows)
    o = report.optimum
    lines.append("")
    lines.append(
        f"optimum: param {_param_str(o.param)}, mean {round2(o.mean)}/"
        f"{round2(o.std)}, max {round2(o.max)}"
    )
    return "\n".join(lines) + "\n"


def _render_batch(report: BatchReport, fmt: str) -> str:
    if fmt == "json":
        return report.to_json()
    header = ["config", "mean", "max", "par"]
    rows = []
    for r in report.rows:
        mean_cell = f"{round2(r.mean_of_means)}/{round2(r.std_of_means)}"
        max_cell = f"{round2(r.mean_of_max)}/{round2(r.std_of_max)}"
        par_cell = (
            "-"
            if r.mean_param is None
            else f"{round2(r.mean_param)}/{round2(r.std_param)}"
        )
        rows.append([r.config, mean_cell, max_cell, par_cell])
    if fmt == "csv":
        lines = [",".join(header)]
        lines.extend(",".join(r) for r in rows)
        return "\n".join(lines) + "\n"
    noise = "with noise" if report.noise else "no noise"
    lines = [f"## {report.algorithm} on synthetic data ({noise})", ""]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "---|" * len(header))
    lines.extend("| " + " | ".join(r) + " |" for r in rows)
    return "\n".join(lines) + "\n"
