"""Distance matrices, mutual-nearest-neighbor pairs, and the buddy-count score.

The score between point sets ``P`` and ``Q`` is the number of pairs that are
each other's nearest neighbor (under the measure's polarity), divided by
``min(N_P, N_Q)``. Ties in any row or column extremum resolve to the lowest
index, which makes every result deterministic and reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .pointset import Measure, MeasureKind, PointSet, inner_table, sq_dist_table


@dataclass(frozen=True)
class DistanceMatrix:
    """N_P x N_Q pairwise table plus per-row/per-column extremum caches.

    ``minimize`` carries the measure's polarity: True when the extremum is
    the minimum (smaller = closer). ``row_best_idx[i]`` is the column index
    of row i's extremum (lowest index on ties), ``row_best_val[i]`` its
    value; ``col_best_*`` likewise per column.
    """

    values: np.ndarray
    minimize: bool
    row_best_idx: np.ndarray
    row_best_val: np.ndarray
    col_best_idx: np.ndarray
    col_best_val: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def matrix_from_values(values: np.ndarray, minimize: bool) -> DistanceMatrix:
    """Build a DistanceMatrix (with extremum caches) from a raw table."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.size == 0:
        raise DimensionError(f"distance table must be 2-D and non-empty, got {values.shape}")
    arg = np.argmin if minimize else np.argmax
    row_idx = arg(values, axis=1)
    col_idx = arg(values, axis=0)
    return DistanceMatrix(
        values=values,
        minimize=minimize,
        row_best_idx=row_idx,
        row_best_val=values[np.arange(values.shape[0]), row_idx],
        col_best_idx=col_idx,
        col_best_val=values[col_idx, np.arange(values.shape[1])],
    )


def measure_table(P: PointSet, Q: PointSet, m: Measure) -> np.ndarray:
    """Raw pairwise table d(p_i, q_j) under the measure."""
    if P.d != Q.d:
        raise DimensionError(f"appearance dims differ: {P.d} vs {Q.d}")
    if m.kind is MeasureKind.COLOR_SQDIST:
        return sq_dist_table(P.appearance, Q.appearance) + m.lam * sq_dist_table(
            P.locations, Q.locations
        )
    return inner_table(P.appearance, Q.appearance) + np.exp(
        -m.lam * sq_dist_table(P.locations, Q.locations)
    )


def distance_matrix(P: PointSet, Q: PointSet, m: Measure) -> DistanceMatrix:
    """Full pairwise table with row/column extremum caches."""
    return matrix_from_values(measure_table(P, Q, m), m.minimize)


def best_buddies(D: DistanceMatrix) -> list[tuple[int, int]]:
    """Index pairs (i, j) where row i and column j are mutual extrema."""
    rows = np.arange(D.values.shape[0])
    mutual = D.col_best_idx[D.row_best_idx] == rows
    return [(int(i), int(D.row_best_idx[i])) for i in rows[mutual]]


def count_best_buddies(D: DistanceMatrix) -> int:
    rows = np.arange(D.values.shape[0])
    return int(np.count_nonzero(D.col_best_idx[D.row_best_idx] == rows))


def bbs_score(D: DistanceMatrix) -> float:
    """Fraction of mutual-nearest-neighbor pairs: |pairs| / min(N_P, N_Q)."""
    n_p, n_q = D.values.shape
    return count_best_buddies(D) / min(n_p, n_q)
