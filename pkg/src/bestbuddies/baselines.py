"""Classic window-scoring baselines: SSD, SAD, NCC, chi-square histogram
matching, and bidirectional similarity.

SSD/SAD/NCC operate directly on same-size feature grids. Histogram matching
builds a joint color histogram per window (appearance only; it deliberately
carries no spatial information). Bidirectional similarity is computed in the
same location-appearance point space as the buddy score and reuses the same
distance matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .bbs import DistanceMatrix, distance_matrix
from .errors import DimensionError
from .pointset import Measure, PointSet


class BaselineKind(Enum):
    SSD = "ssd"
    SAD = "sad"
    NCC = "ncc"
    HM_CHI2 = "hm-chi2"
    BDS = "bds"


@dataclass(frozen=True)
class BaselineConfig:
    kind: BaselineKind
    hm_bins: int = 8

    def __post_init__(self):
        if self.hm_bins < 2:
            raise ValueError(f"hm_bins must be >= 2, got {self.hm_bins}")


def _check_same_shape(t, w):
    if t.data.shape != w.data.shape:
        raise DimensionError(f"shape mismatch: {t.data.shape} vs {w.data.shape}")


def score_ssd(t, w) -> float:
    """Sum of squared differences over all cells and channels."""
    _check_same_shape(t, w)
    diff = t.data.astype(np.float64) - w.data.astype(np.float64)
    return float((diff * diff).sum())


def score_sad(t, w) -> float:
    """Sum of absolute differences over all cells and channels."""
    _check_same_shape(t, w)
    diff = t.data.astype(np.float64) - w.data.astype(np.float64)
    return float(np.abs(diff).sum())


def score_ncc(t, w) -> float:
    """Per-channel zero-mean unit-norm correlation, averaged over channels.

    Constant channels have undefined correlation and contribute 0.
    """
    _check_same_shape(t, w)
    td = t.data.reshape(-1, t.channels).astype(np.float64)
    wd = w.data.reshape(-1, w.channels).astype(np.float64)
    td = td - td.mean(axis=0)
    wd = wd - wd.mean(axis=0)
    tn = np.linalg.norm(td, axis=0)
    wn = np.linalg.norm(wd, axis=0)
    valid = (tn > 1e-12) & (wn > 1e-12)
    corr = np.zeros(t.channels)
    if valid.any():
        corr[valid] = (td[:, valid] * wd[:, valid]).sum(axis=0) / (tn[valid] * wn[valid])
    return float(corr.mean())


def color_histogram(grid, bins: int) -> np.ndarray:
    """Normalized joint 3-D color histogram (bins^3 cells, sums to 1)."""
    if grid.channels != 3:
        raise DimensionError(f"histogram requires 3 channels, got {grid.channels}")
    vals = grid.data.reshape(-1, 3).astype(np.float64)
    idx = np.clip((vals * bins).astype(np.int64), 0, bins - 1)
    flat = (idx[:, 0] * bins + idx[:, 1]) * bins + idx[:, 2]
    hist = np.bincount(flat, minlength=bins**3).astype(np.float64)
    return hist / hist.sum()


def chi2_histogram_distance(h1: np.ndarray, h2: np.ndarray) -> float:
    """Chi-square distance sum (h1-h2)^2 / (h1+h2), skipping empty bins."""
    total = h1 + h2
    mask = total > 0
    diff = h1[mask] - h2[mask]
    return float((diff * diff / total[mask]).sum())


def score_hm_chi2(t, w, bins: int = 8) -> float:
    """Chi-square distance between joint color histograms of two windows."""
    return chi2_histogram_distance(color_histogram(t, bins), color_histogram(w, bins))


def bds_from_matrix(D: DistanceMatrix) -> float:
    """Bidirectional similarity from a precomputed distance matrix.

    Mean best-match value per row plus mean best-match value per column;
    with a min-polarity measure this is a dissimilarity (0 on identical
    sets), with a max-polarity measure a similarity.
    """
    return float(D.row_best_val.mean() + D.col_best_val.mean())


def score_bds(P: PointSet, Q: PointSet, m: Measure) -> float:
    """Bidirectional similarity in the same location-appearance space."""
    return bds_from_matrix(distance_matrix(P, Q, m))
