"""Command-line surface: generate, prep, run, sweep, bench-synthetic, report.

Exit codes: 0 success, 2 usage or validation error, 3 algorithm failure
at runtime. All commands are deterministic given their flags and seeds;
FWKM_SEED provides the default master seed.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import bench
from .algorithms import ALGORITHMS, run_algorithm
from .dataset import (
    ParseError,
    drop_zero_range,
    expand_categorical,
    inject_noise,
    load_dataset,
    load_schema,
    parse_synthetic_config,
    save_dataset,
    generate_synthetic,
    standardize_numeric,
    SyntheticConfig,
)
from .engine import ClusteringError
from .evaluation import ari


class AlgorithmFailure(click.ClickException):
    exit_code = 3


def _load(data_path, schema_path):
    try:
        schema = load_schema(schema_path)
        return load_dataset(data_path, schema)
    except (ParseError, OSError, KeyError, ValueError) as exc:
        raise click.UsageError(str(exc)) from exc


def _write_text(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=not text.endswith("\n"))


@click.group()
def main():
    """Feature-weighted K-Means toolkit."""


@main.command()
@click.option("--config", "config_str", required=True,
              help="Synthetic configuration, either 'NxM-K' or a JSON object.")
@click.option("--count", type=int, required=True, help="Number of datasets to generate.")
@click.option("--seed", type=int, envvar="FWKM_SEED", default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
def generate(config_str, count, seed, out_dir):
    """Write COUNT synthetic dataset triples (CSV, schema, provenance)."""
    if count < 1:
        raise click.UsageError("--count must be >= 1")
    try:
        if config_str.strip().startswith("{"):
            cfg = SyntheticConfig(**json.loads(config_str))
        else:
            cfg = parse_synthetic_config(config_str)
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"bad --config: {exc}") from exc
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(count):
        ds_seed = bench.dataset_seed(seed, 0, i)
        d, provenance = generate_synthetic(cfg, ds_seed)
        stem = out / f"{cfg.name}-{i:03d}"
        save_dataset(d, f"{stem}.csv", f"{stem}.schema.json")
        with open(f"{stem}.provenance.json", "w", encoding="utf-8") as fh:
            json.dump(provenance, fh, indent=2, sort_keys=True)
            fh.write("\n")
    click.echo(f"wrote {count} dataset(s) under {out}")


@main.command()
@click.option("--data", "data_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--schema", "schema_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--standardize", is_flag=True, help="Range-standardize numeric features.")
@click.option("--expand", is_flag=True, help="Expand categoricals to centered binaries.")
@click.option("--noise", is_flag=True, help="Append one uniform noise column per feature.")
@click.option("--seed", type=int, envvar="FWKM_SEED", default=0, show_default=True)
@click.option("--out", "out_base", required=True,
              help="Output base path; writes <out>.csv and <out>.schema.json.")
def prep(data_path, schema_path, standardize, expand, noise, seed, out_base):
    """Preprocess a dataset: drop zero-range features, then standardize /
    expand / inject noise as flagged."""
    d = _load(data_path, schema_path)
    try:
        d = drop_zero_range(d)
        if standardize:
            d = standardize_numeric(d)
        if expand:
            d = expand_categorical(d)
        if noise:
            d = inject_noise(d, seed)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    save_dataset(d, f"{out_base}.csv", f"{out_base}.schema.json")
    click.echo(f"wrote {out_base}.csv ({d.n} x {d.m})")


@main.command()
@click.option("--algo", type=click.Choice(sorted(ALGORITHMS)), required=True)
@click.option("--param", type=float, default=None,
              help="beta (awk/wkm/ikp), gamma (ewkm) or p (imwk).")
@click.option("--k", type=int, required=True)
@click.option("--data", "data_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--schema", "schema_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--seed", type=int, envvar="FWKM_SEED", default=0, show_default=True)
@click.option("--out", "out_path", default=None, help="Write the result JSON here instead of stdout.")
def run(algo, param, k, data_path, schema_path, seed, out_path):
    """Run one algorithm once and emit its result as JSON."""
    info = ALGORITHMS[algo]
    try:
        info.validate_param(param)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    if k < 1:
        raise click.UsageError("--k must be >= 1")
    seed_given = any(a == "--seed" or a.startswith("--seed=") for a in sys.argv)
    if info.deterministic and seed_given:
        click.echo(f"warning: {algo} is deterministic; --seed ignored", err=True)
    d = _load(data_path, schema_path)
    try:
        result = run_algorithm(algo, d, k, param=param, seed=seed)
    except ClusteringError as exc:
        raise AlgorithmFailure(str(exc)) from exc
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    payload = result.to_dict()
    if d.labels is not None:
        payload["ari"] = ari(result.partition, d.labels)
    _write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", out_path)


def _grid_from_flags(algo, grid_min, grid_max, grid_step):
    default = bench.default_grid(algo)
    if default is None:
        if any(v is not None for v in (grid_min, grid_max, grid_step)):
            raise click.UsageError(f"{algo} takes no parameter; grid flags not allowed")
        return None
    return bench.Grid(
        grid_min if grid_min is not None else default.start,
        grid_max if grid_max is not None else default.stop,
        grid_step if grid_step is not None else default.step,
    )


@main.command()
@click.option("--algo", type=click.Choice(sorted(ALGORITHMS)), required=True)
@click.option("--data", "data_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--schema", "schema_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--grid-min", type=float, default=None)
@click.option("--grid-max", type=float, default=None)
@click.option("--grid-step", type=float, default=None)
@click.option("--extra-point", "extra_points", type=float, multiple=True,
              help="Additional explicit grid values (e.g. the exact beta=1 rule).")
@click.option("--restarts", type=int, default=100, show_default=True)
@click.option("--seed", type=int, envvar="FWKM_SEED", default=0, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["markdown", "csv", "json"]), default="json")
@click.option("--out", "out_path", default=None)
def sweep(algo, data_path, schema_path, grid_min, grid_max, grid_step,
          extra_points, restarts, seed, jobs, fmt, out_path):
    """Sweep an algorithm's parameter grid with restarts, scoring each run
    against the dataset labels."""
    d = _load(data_path, schema_path)
    grid = _grid_from_flags(algo, grid_min, grid_max, grid_step)
    try:
        cfg = bench.SweepConfig(
            algorithm=algo, grid=grid, restarts=restarts,
            master_seed=seed, extra_params=tuple(extra_points),
        )
        report = bench.sweep(d, cfg, dataset_id=Path(data_path).stem, n_jobs=jobs)
    except (ValueError, bench.BenchError) as exc:
        if isinstance(exc, bench.BenchError):
            raise AlgorithmFailure(str(exc)) from exc
        raise click.UsageError(str(exc)) from exc
    _write_text(bench.render_report(report, fmt), out_path)


@main.command("bench-synthetic")
@click.option("--algo", type=click.Choice(sorted(ALGORITHMS)), required=True)
@click.option("--configs", multiple=True, default=("500x4-2", "500x10-3", "500x20-4", "500x50-5"),
              show_default=True)
@click.option("--per-config", type=int, default=20, show_default=True)
@click.option("--restarts", type=int, default=100, show_default=True)
@click.option("--grid-min", type=float, default=None)
@click.option("--grid-max", type=float, default=None)
@click.option("--grid-step", type=float, default=None)
@click.option("--noise", is_flag=True, help="Benchmark on datasets with injected noise features.")
@click.option("--seed", type=int, envvar="FWKM_SEED", default=0, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["markdown", "csv", "json"]), default="markdown")
@click.option("--out", "out_path", default=None)
def bench_synthetic(algo, configs, per_config, restarts, grid_min, grid_max,
                    grid_step, noise, seed, jobs, fmt, out_path):
    """Aggregate sweeps over freshly generated synthetic dataset batches."""
    grid = _grid_from_flags(algo, grid_min, grid_max, grid_step)
    try:
        for name in configs:
            parse_synthetic_config(name)
        cfg = bench.SweepConfig(algorithm=algo, grid=grid, restarts=restarts, master_seed=seed)
        report = bench.batch_synthetic(
            list(configs), per_config, cfg, seed, noise=noise, n_jobs=jobs
        )
    except bench.BenchError as exc:
        raise AlgorithmFailure(str(exc)) from exc
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    _write_text(bench.render_report(report, fmt), out_path)


@main.command()
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="A sweep report previously saved as JSON.")
@click.option("--format", "fmt", type=click.Choice(["markdown", "csv", "json"]), default="markdown")
@click.option("--out", "out_path", default=None)
def report(in_path, fmt, out_path):
    """Re-render a saved sweep report in another format."""
    try:
        payload = json.loads(Path(in_path).read_text(encoding="utf-8"))
        rows = [bench.SweepRow(**r) for r in payload["rows"]]
        optimum = bench.SweepRow(**payload["optimum"])
        grid_dict = payload.get("grid")
        grid = (
            bench.Grid(grid_dict["min"], grid_dict["max"], grid_dict["step"])
            if grid_dict
            else None
        )
        rep = bench.SweepReport(
            dataset_id=payload["dataset"],
            algorithm=payload["algorithm"],
            restarts=payload["restarts"],
            master_seed=payload["master_seed"],
            rows=rows,
            optimum=optimum,
            grid=grid,
        )
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"{in_path}: not a sweep report ({exc})") from exc
    _write_text(bench.render_report(rep, fmt), out_path)


if __name__ == "__main__":
    main()
