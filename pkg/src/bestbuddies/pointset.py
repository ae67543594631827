"""Points in joint location-appearance space and the point-wise distance measures.

A window (template or candidate) is converted into a set of points, one per
non-overlapping ``k x k`` patch. Each point carries the patch's normalized
center location within the window and the concatenated channel values of the
patch as its appearance vector.

Two measures are supported:

* ``COLOR_SQDIST``: squared appearance distance plus a weighted squared
  location distance; lower is closer.
* ``SIMILARITY_IP``: appearance inner product plus a Gaussian location
  affinity; higher is closer.

All downstream nearest-neighbor logic asks the measure for its polarity
instead of negating values, so float comparisons stay exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DimensionError
from .features import FeatureGrid


class MeasureKind(Enum):
    COLOR_SQDIST = "color-sqdist"
    SIMILARITY_IP = "similarity-ip"


_DEFAULT_LAMBDA = {
    MeasureKind.COLOR_SQDIST: 0.25,
    MeasureKind.SIMILARITY_IP: 1.0,
}


@dataclass(frozen=True)
class Measure:
    """Point-wise measure: a kind plus the non-negative location weight."""

    kind: MeasureKind
    lam: float | None = None

    def __post_init__(self):
        lam = self.lam if self.lam is not None else _DEFAULT_LAMBDA[self.kind]
        if lam < 0:
            raise ValueError(f"lambda must be non-negative, got {lam}")
        object.__setattr__(self, "lam", float(lam))

    @property
    def minimize(self) -> bool:
        """True when smaller values mean closer points."""
        return self.kind is MeasureKind.COLOR_SQDIST

    @property
    def placement_invariant(self) -> bool:
        """True when the measure ignores point locations entirely (lam == 0).

        Only then do point-wise distances survive unchanged as a sliding
        window moves, which is what the min-cache repair path relies on.
        """
        return self.lam == 0.0


def color_measure(lam: float = 0.25) -> Measure:
    return Measure(MeasureKind.COLOR_SQDIST, lam)


def similarity_measure(lam: float = 1.0) -> Measure:
    return Measure(MeasureKind.SIMILARITY_IP, lam)


@dataclass(frozen=True)
class Point:
    """One point: 2-vector location in [0,1]^2 and a d-vector appearance."""

    location: np.ndarray
    appearance: np.ndarray

    @property
    def d(self) -> int:
        return self.appearance.shape[0]


@dataclass(frozen=True)
class PointSet:
    """Ordered, immutable set of points sharing one appearance dimensionality.

    ``locations`` is (N, 2) and ``appearance`` is (N, d); ordering is the
    row-major order of construction and is stable.
    """

    locations: np.ndarray
    appearance: np.ndarray

    def __post_init__(self):
        loc = np.ascontiguousarray(self.locations, dtype=np.float64)
        app = np.ascontiguousarray(self.appearance, dtype=np.float64)
        if loc.ndim != 2 or loc.shape[1] != 2:
            raise DimensionError(f"locations must be (N, 2), got {loc.shape}")
        if app.ndim != 2 or app.shape[0] != loc.shape[0]:
            raise DimensionError(
                f"appearance {app.shape} inconsistent with locations {loc.shape}"
            )
        if loc.shape[0] == 0:
            raise DimensionError("point set must be non-empty")
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "appearance", app)

    def __len__(self) -> int:
        return self.locations.shape[0]

    def __getitem__(self, i: int) -> Point:
        return Point(self.locations[i], self.appearance[i])

    @property
    def d(self) -> int:
        return self.appearance.shape[1]


def build_point_set(grid: FeatureGrid, patch_size: int) -> PointSet:
    """Convert a feature grid into one point per non-overlapping k x k patch.

    The grid is truncated to ``floor(H/k) x floor(W/k)`` patches. A point's
    appearance is the concatenation of all ``d*k^2`` channel values of its
    patch (row-major cells, channel-interleaved); its location is the
    continuous patch center divided by the window width/height, so both
    components lie in [0, 1]. Points are emitted row-major.
    """
    k = int(patch_size)
    if k < 1:
        raise ValueError(f"patch size must be positive, got {k}")
    H, W, d = grid.data.shape
    if H < k or W < k:
        raise DimensionError(f"grid {H}x{W} smaller than patch size {k}")
    ph, pw = H // k, W // k
    data = grid.data[: ph * k, : pw * k].astype(np.float64)
    patches = data.reshape(ph, k, pw, k, d).transpose(0, 2, 1, 3, 4)
    appearance = np.ascontiguousarray(patches).reshape(ph * pw, k * k * d)

    cols, rows = np.meshgrid(np.arange(pw), np.arange(ph))
    cx = (cols.ravel() * k + k / 2.0) / W
    cy = (rows.ravel() * k + k / 2.0) / H
    locations = np.stack([cx, cy], axis=1)
    return PointSet(locations, appearance)


def sq_dist_table(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise squared euclidean distances, (n, d) x (m, d) -> (n, m).

    Accumulates one feature dimension at a time, in order, so every entry is
    bit-for-bit reproducible no matter how the inputs are sliced or batched;
    the cached matcher's exact-equivalence guarantee relies on this.
    """
    out = np.zeros((a.shape[0], b.shape[0]), dtype=np.float64)
    buf = np.empty_like(out)
    for j in range(a.shape[1]):
        np.subtract(a[:, j, None], b[None, :, j], out=buf)
        np.multiply(buf, buf, out=buf)
        out += buf
    return out


def inner_table(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise inner products with the same determinism guarantee."""
    out = np.zeros((a.shape[0], b.shape[0]), dtype=np.float64)
    buf = np.empty_like(out)
    for j in range(a.shape[1]):
        np.multiply(a[:, j, None], b[None, :, j], out=buf)
        out += buf
    return out


def pointwise_distance(p: Point, q: Point, m: Measure) -> float:
    """Distance (or similarity) between two points under the given measure."""
    if p.d != q.d:
        raise DimensionError(f"appearance dims differ: {p.d} vs {q.d}")
    loc_sq = sq_dist_table(p.location[None], q.location[None])[0, 0]
    if m.kind is MeasureKind.COLOR_SQDIST:
        app_sq = sq_dist_table(p.appearance[None], q.appearance[None])[0, 0]
        return float(app_sq + m.lam * loc_sq)
    ip = inner_table(p.appearance[None], q.appearance[None])[0, 0]
    return float(ip + np.exp(-m.lam * loc_sq))
