"""fwkm: feature-weighted K-Means algorithms and their benchmark harness."""

from .algorithms import (
    ALGORITHMS,
    run_algorithm,
    run_awk,
    run_ewkm,
    run_fwsa,
    run_ikp,
    run_imwk,
    run_wkmeans,
)
from .bench import Grid, SweepConfig, SweepReport, batch_synthetic, render_report, sweep
from .dataset import (
    Dataset,
    Feature,
    ParseError,
    Schema,
    SyntheticConfig,
    drop_zero_range,
    expand_categorical,
    generate_synthetic,
    inject_noise,
    load_dataset,
    load_schema,
    parse_synthetic_config,
    save_dataset,
    save_schema,
    standardize_numeric,
)
from .engine import (
    ClusteringError,
    DistanceSpec,
    Partition,
    RunResult,
    StopRule,
    assign,
    init_anomalous,
    init_random,
    run_kmeans,
    update_centroids,
)
from .evaluation import Contingency, ari, contingency

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "Contingency",
    "ClusteringError",
    "Dataset",
    "DistanceSpec",
    "Feature",
    "Grid",
    "ParseError",
    "Partition",
    "RunResult",
    "Schema",
    "StopRule",
    "SweepConfig",
    "SweepReport",
    "SyntheticConfig",
    "ari",
    "assign",
    "batch_synthetic",
    "contingency",
    "drop_zero_range",
    "expand_categorical",
    "generate_synthetic",
    "init_anomalous",
    "init_random",
    "inject_noise",
    "load_dataset",
    "load_schema",
    "parse_synthetic_config",
    "render_report",
    "run_algorithm",
    "run_awk",
    "run_ewkm",
    "run_fwsa",
    "run_ikp",
    "run_imwk",
    "run_kmeans",
    "run_wkmeans",
    "save_dataset",
    "save_schema",
    "standardize_numeric",
    "sweep",
    "update_centroids",
]
