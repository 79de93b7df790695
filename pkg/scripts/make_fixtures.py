"""Regenerate the bundled fixture CSV/schema pairs from scikit-learn's
copies of the UCI datasets. Run once at packaging time; scikit-learn is
not a runtime dependency of fwkm.

    python scripts/make_fixtures.py
"""

import json
from pathlib import Path

import numpy as np
from sklearn.datasets import load_breast_cancer, load_iris, load_wine

OUT = Path(__file__).resolve().parent.parent / "src" / "fwkm" / "fixtures"


def write(name, data, labels, feature_names, label_names):
    csv_path = OUT / f"{name}.csv"
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(",".join(list(feature_names) + ["class"]) + "\n")
        for row, lab in zip(data, labels):
            cells = [repr(float(v)) for v in row]
            cells.append(str(label_names[lab]))
            fh.write(",".join(cells) + "\n")
    schema = {
        "features": [{"name": n, "kind": "numeric"} for n in feature_names],
        "label": "class",
    }
    with open(OUT / f"{name}.schema.json", "w", encoding="utf-8") as fh:
        json.dump(schema, fh, indent=2)
        fh.write("\n")
    print(f"wrote {name}: {data.shape[0]} x {data.shape[1]}")


def clean(names):
    return [
        n.replace(" ", "_").replace("/", "_").replace("(", "").replace(")", "")
        for n in names
    ]


def main():
    iris = load_iris()
    write(
        "iris",
        iris.data,
        iris.target,
        ["sepal_length", "sepal_width", "petal_length", "petal_width"],
        list(iris.target_names),
    )

    wine = load_wine()
    write("wine", wine.data, wine.target, clean(wine.feature_names), ["1", "2", "3"])

    bc = load_breast_cancer()
    write(
        "breast_cancer",
        bc.data,
        bc.target,
        clean(bc.feature_names),
        list(bc.target_names),
    )


if __name__ == "__main__":
    main()
