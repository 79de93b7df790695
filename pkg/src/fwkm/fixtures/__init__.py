"""Bundled benchmark datasets (CSV + JSON schema pairs).

Shipped fixtures:

  iris           150 x 4 numeric, 3 classes (UCI Iris)
  wine           178 x 13 numeric, 3 classes (UCI Wine)
  breast_cancer  569 x 30 numeric, 2 classes (UCI Breast Cancer
                 Wisconsin, Diagnostic variant -- see note below)

The classic survey benchmarks also use the *original* Breast Cancer
Wisconsin table (699 x 9) and Soybean-small (47 x 35 categorical).
Neither can be redistributed from this environment; scripts/fetch_uci.py
downloads them into this directory as ``breast_cancer_699x9`` and
``soybean`` when network access is available.
"""

from __future__ import annotations

from pathlib import Path

from ..dataset import Dataset, load_dataset, load_schema

_HERE = Path(__file__).parent


def fixture_path(name: str) -> Path:
    return _HERE / f"{name}.csv"


def list_fixtures() -> list[str]:
    return sorted(p.stem for p in _HERE.glob("*.csv"))


def has_fixture(name: str) -> bool:
    return fixture_path(name).exists()


def load_fixture(name: str) -> Dataset:
    csv_path = fixture_path(name)
    if not csv_path.exists():
        raise FileNotFoundError(
            f"no bundled fixture {name!r}; available: {list_fixtures()}"
        )
    schema = load_schema(_HERE / f"{name}.schema.json")
    return load_dataset(csv_path, schema)
