"""Cluster-recovery scoring: contingency tables and the adjusted Rand index."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _as_labels(p) -> np.ndarray:
    if hasattr(p, "assignments"):
        p = p.assignments
    return np.asarray(p)


@dataclass(frozen=True)
class Contingency:
    """Overlap counts between two partitions of the same entities."""

    table: np.ndarray  # |rows of p| x |rows of q| overlap counts
    row_sums: np.ndarray
    col_sums: np.ndarray
    n: int


def contingency(p, q) -> Contingency:
    """Exact overlap counts |P_i ∩ Q_j| between the blocks of two
    partitions (given as label sequences or Partition objects)."""
    a = _as_labels(p)
    b = _as_labels(q)
    if len(a) != len(b):
        raise ValueError(f"partition lengths differ: {len(a)} vs {len(b)}")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    return Contingency(
        table=table,
        row_sums=table.sum(axis=1),
        col_sums=table.sum(axis=0),
        n=len(a),
    )


def _comb2(x: int) -> int:
    return x * (x - 1) // 2


def ari(p, q) -> float:
    """Adjusted Rand index between two partitions.

    Binomial terms are accumulated in exact integer arithmetic; the
    single final division produces the float result. When the
    denominator degenerates (both partitions trivial) the value is 1.0
    if the partitions coincide as set partitions and 0.0 otherwise.
    """
    c = contingency(p, q)
    sum_cells = sum(_comb2(int(v)) for v in c.table.ravel())
    sum_rows = sum(_comb2(int(v)) for v in c.row_sums)
    sum_cols = sum(_comb2(int(v)) for v in c.col_sums)
    total = _comb2(c.n)

    # scale both sides by 2*total to stay in integers
    numerator = 2 * (total * sum_cells - sum_rows * sum_cols)
    denominator = total * (sum_rows + sum_cols) - 2 * sum_rows * sum_cols
    if denominator == 0:
        # each block of p must map onto exactly one block of q and vice versa
        nonzero_per_row = (c.table > 0).sum(axis=1)
        nonzero_per_col = (c.table > 0).sum(axis=0)
        same = (nonzero_per_row == 1).all() and (nonzero_per_col == 1).all()
        return 1.0 if same else 0.0
    return numerator / denominator
