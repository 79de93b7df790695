"""Fetch the UCI datasets that cannot be bundled with the package and
write them as fixture CSV/schema pairs. Requires network access to
archive.ics.uci.edu; never run at test time.

    python scripts/fetch_uci.py [--out src/fwkm/fixtures]

Datasets:

  breast_cancer_699x9  Breast Cancer Wisconsin (Original), 699 rows of
                       9 integer-valued features. The 16 rows with a
                       missing bare-nuclei cell are dropped (683 rows
                       kept) since this toolkit does no imputation.
  soybean              Soybean (Small), 47 rows of 35 categorical
                       features, 4 classes.
"""

import argparse
import json
from pathlib import Path
from urllib.request import urlopen

BASE = "https://archive.ics.uci.edu/ml/machine-learning-databases"

BREAST_URL = f"{BASE}/breast-cancer-wisconsin/breast-cancer-wisconsin.data"
SOYBEAN_URL = f"{BASE}/soybean/soybean-small.data"

BREAST_FEATURES = [
    "clump_thickness",
    "uniformity_of_cell_size",
    "uniformity_of_cell_shape",
    "marginal_adhesion",
    "single_epithelial_cell_size",
    "bare_nuclei",
    "bland_chromatin",
    "normal_nucleoli",
    "mitoses",
]


def fetch(url: str) -> list[str]:
    with urlopen(url, timeout=60) as resp:
        text = resp.read().decode("utf-8")
    return [line.strip() for line in text.splitlines() if line.strip()]


def write_pair(out: Path, name: str, header, rows, schema: dict):
    with open(out / f"{name}.csv", "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    with open(out / f"{name}.schema.json", "w", encoding="utf-8") as fh:
        json.dump(schema, fh, indent=2)
        fh.write("\n")
    print(f"wrote {name}: {len(rows)} rows")


def fetch_breast(out: Path):
    rows = []
    dropped = 0
    for line in fetch(BREAST_URL):
        cells = line.split(",")  # id, 9 features, class (2=benign, 4=malignant)
        if "?" in cells:
            dropped += 1
            continue
        label = "benign" if cells[-1] == "2" else "malignant"
        rows.append(cells[1:-1] + [label])
    print(f"breast cancer: dropped {dropped} rows with missing cells")
    schema = {
        "features": [{"name": n, "kind": "numeric"} for n in BREAST_FEATURES],
        "label": "class",
    }
    write_pair(out, "breast_cancer_699x9", BREAST_FEATURES + ["class"], rows, schema)


def fetch_soybean(out: Path):
    names = [f"a{i + 1}" for i in range(35)]
    rows = []
    for line in fetch(SOYBEAN_URL):
        cells = line.split(",")  # 35 categorical codes, class D1..D4
        rows.append(cells[:-1] + [cells[-1]])
    schema = {
        "features": [{"name": n, "kind": "categorical"} for n in names],
        "label": "class",
    }
    write_pair(out, "soybean", names + ["class"], rows, schema)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    default_out = Path(__file__).resolve().parent.parent / "src" / "fwkm" / "fixtures"
    parser.add_argument("--out", type=Path, default=default_out)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    fetch_breast(args.out)
    fetch_soybean(args.out)


if __name__ == "__main__":
    main()
