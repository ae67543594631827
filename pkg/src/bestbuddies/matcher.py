"""Sliding-window matching: naive reference scorer and the exact cached scorer.

Both matchers score every valid (fully contained) template placement; there
is no padding. The naive matcher rebuilds point sets and the full pairwise
table per window. The cached matcher slides column stripes down the image,
computes the point-wise distances for each image patch exactly once, and
reuses every surviving distance; its likelihood maps are bit-for-bit
identical to the naive matcher's.

Two internal strategies back ``match_cached``:

* distance-reuse path (the general case): per-stripe assembly of the window
  table from the shared distance cache plus the fixed location-term table.
  One new column of distances is computed per window once the cache is warm.
* min-repair path (location weight zero): point-wise values are placement
  invariant, so per-column extrema are cached per patch and per-row extrema
  are repaired only when a row's previous extremum is evicted. Instrumented
  counters expose how many full row rescans each window needed.

The location term ties a point's distance to its position inside the current
window, so surviving table entries shift in value as the window moves; only
the appearance part is placement invariant. That is why the min-repair path
requires ``lambda == 0`` and the general path re-derives extrema per window
from cached ingredients instead.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .baselines import BaselineConfig, BaselineKind, score_hm_chi2, score_ncc, score_sad, score_ssd
from .bbs import bbs_score, distance_matrix, matrix_from_values
from .baselines import bds_from_matrix
from .errors import ConfigError, DimensionError
from .features import FeatureGrid, normalize_per_window
from .pointset import (
    Measure,
    MeasureKind,
    build_point_set,
    color_measure,
    inner_table,
    sq_dist_table,
)


class Algorithm(Enum):
    NAIVE = "naive"
    CACHED = "cached"


@dataclass(frozen=True)
class MatcherConfig:
    """Sliding-window configuration.

    ``stride`` defaults to ``patch_size`` so window point grids stay aligned
    with patch boundaries; stride 1 with patch size 1 scores every pixel
    placement. ``normalize_windows`` applies per-window zero-mean/unit-var
    feature normalization (the deep-feature convention); it makes distances
    window-dependent and is therefore rejected by the cached matcher.
    """

    patch_size: int = 1
    measure: Measure = field(default_factory=color_measure)
    stride: int | None = None
    algorithm: Algorithm = Algorithm.CACHED
    normalize_windows: bool = False

    def __post_init__(self):
        if self.patch_size < 1:
            raise ConfigError(f"patch_size must be >= 1, got {self.patch_size}")
        stride = self.stride if self.stride is not None else self.patch_size
        if stride < 1:
            raise ConfigError(f"stride must be >= 1, got {stride}")
        object.__setattr__(self, "stride", int(stride))


@dataclass(frozen=True)
class LikelihoodMap:
    """Per-placement score grid; cell (ty, tx) scores the window whose
    top-left pixel is (tx * stride, ty * stride)."""

    scores: np.ndarray
    window_size: tuple[int, int]  # (w, h) in pixels
    stride: int

    def to_feature_grid(self) -> FeatureGrid:
        return FeatureGrid(self.scores[:, :, None].astype(np.float32))


@dataclass(frozen=True)
class MatchResult:
    box: tuple[int, int, int, int]  # (x, y, w, h) in image pixels
    score: float
    rank: int


@dataclass
class CacheStats:
    """Instrumentation filled in by ``match_cached``.

    ``fresh_entries[i]`` is the number of pairwise distance entries computed
    from scratch for the i-th window (stripes left to right, windows top to
    bottom within a stripe). ``row_rescans[i]`` counts full row-extremum
    rescans triggered by evictions (min-repair path only; cold-start windows
    at the top of a stripe are excluded).
    """

    path: str = ""
    fresh_entries: list = field(default_factory=list)
    row_rescans: list = field(default_factory=list)


def _window_origins(image_extent: int, window_extent: int, stride: int) -> np.ndarray:
    return np.arange(0, image_extent - window_extent + 1, stride)


def _check_match_inputs(template: FeatureGrid, image: FeatureGrid, cfg: MatcherConfig):
    if template.channels != image.channels:
        raise DimensionError(
            f"channel mismatch: template {template.channels}, image {image.channels}"
        )
    if template.height > image.height or template.width > image.width:
        raise DimensionError(
            f"template {template.width}x{template.height} larger than image "
            f"{image.width}x{image.height}"
        )
    if template.height < cfg.patch_size or template.width < cfg.patch_size:
        raise DimensionError("template smaller than patch size")


def match_naive(template: FeatureGrid, image: FeatureGrid, cfg: MatcherConfig) -> LikelihoodMap:
    """Score every placement from scratch; the correctness oracle.

    Builds both point sets and the full pairwise table per window.
    """
    _check_match_inputs(template, image, cfg)
    k, stride, m = cfg.patch_size, cfg.stride, cfg.measure
    tpl = normalize_per_window(template) if cfg.normalize_windows else template
    P = build_point_set(tpl, k)
    xs = _window_origins(image.width, template.width, stride)
    ys = _window_origins(image.height, template.height, stride)
    scores = np.empty((len(ys), len(xs)), dtype=np.float64)
    for ty, y in enumerate(ys):
        for tx, x in enumerate(xs):
            win = image.crop(int(x), int(y), template.width, template.height)
            if cfg.normalize_windows:
                win = normalize_per_window(win)
            Q = build_point_set(win, k)
            scores[ty, tx] = bbs_score(distance_matrix(P, Q, m))
    return LikelihoodMap(scores, (template.width, template.height), stride)


def _grid_patch_appearance(image: FeatureGrid, k: int) -> np.ndarray:
    """(PH, PW, k*k*d) appearance vectors of the image's global patch grid.

    Uses the same cell/channel ordering as ``build_point_set`` so cached
    distances are bit-identical to per-window recomputation.
    """
    H, W, d = image.data.shape
    ph, pw = H // k, W // k
    data = image.data[: ph * k, : pw * k].astype(np.float64)
    patches = data.reshape(ph, k, pw, k, d).transpose(0, 2, 1, 3, 4)
    return np.ascontiguousarray(patches).reshape(ph, pw, k * k * d)


def _app_term(tapp: np.ndarray, papp: np.ndarray, kind: MeasureKind) -> np.ndarray:
    if kind is MeasureKind.COLOR_SQDIST:
        return sq_dist_table(tapp, papp)
    return inner_table(tapp, papp)


def match_cached(
    template: FeatureGrid,
    image: FeatureGrid,
    cfg: MatcherConfig,
    stats: CacheStats | None = None,
) -> LikelihoodMap:
    """Exact incremental sliding matcher; identical scores to ``match_naive``.

    Requires a window-independent measure (no per-window renormalization)
    and a stride that is a multiple of the patch size so window patch grids
    stay aligned with the shared patch cache.
    """
    _check_match_inputs(template, image, cfg)
    if cfg.normalize_windows:
        raise ConfigError(
            "per-window normalization makes distances window-dependent; "
            "the cached matcher cannot be used (run match_naive)"
        )
    k, stride, m = cfg.patch_size, cfg.stride, cfg.measure
    if stride % k != 0:
        raise ConfigError(
            f"cached matcher requires stride ({stride}) to be a multiple of "
            f"patch size ({k}) so patch grids align across windows"
        )
    if stats is not None:
        stats.fresh_entries.clear()
        stats.row_rescans.clear()

    P = build_point_set(template, k)
    l = len(P)
    tapp = P.appearance
    # Window point locations are identical to the template's (same window
    # dims, same patch size), so the location term is one fixed l x l table.
    loc_sq = sq_dist_table(P.locations, P.locations)
    if m.kind is MeasureKind.COLOR_SQDIST:
        loc_term = m.lam * loc_sq
        minimize = True
    else:
        loc_term = np.exp(-m.lam * loc_sq)
        minimize = False

    ph, pw = template.height // k, template.width // k
    grid_app = _grid_patch_appearance(image, k)
    PH, PW = grid_app.shape[:2]
    step = stride // k
    xs = _window_origins(image.width, template.width, stride)
    ys = _window_origins(image.height, template.height, stride)
    col_starts = (xs // k).astype(int)
    row_starts = (ys // k).astype(int)

    app_cache = np.empty((l, PH, PW), dtype=np.float64)
    computed = np.zeros((PH, PW), dtype=bool)

    def compute_patches(rows: np.ndarray, cols: np.ndarray) -> int:
        """Fill the cache for the given (row, col) patch list; returns count."""
        if rows.size == 0:
            return 0
        app_cache[:, rows, cols] = _app_term(tapp, grid_app[rows, cols], m.kind)
        computed[rows, cols] = True
        return int(rows.size)

    if m.placement_invariant:
        scores = _run_repair_path(
            app_cache, computed, compute_patches, loc_term, l, ph, pw, step,
            row_starts, col_starts, minimize, stats,
        )
    else:
        scores = _run_assembly_path(
            app_cache, computed, compute_patches, loc_term, l, ph, pw, step,
            row_starts, col_starts, minimize, stats,
        )
    return LikelihoodMap(scores, (template.width, template.height), stride)


def _fresh_patches_for_window(computed, R0, C0, ph, pw):
    block = computed[R0 : R0 + ph, C0 : C0 + pw]
    rr, cc = np.nonzero(~block)
    return rr + R0, cc + C0


def _run_assembly_path(
    app_cache, computed, compute_patches, loc_term, l, ph, pw, step,
    row_starts, col_starts, minimize, stats,
):
    """General cached path: reuse every cached appearance distance, rebuild
    the window table by adding the fixed location-term table, and take
    extrema per window (vectorized over each stripe)."""
    arg = np.argmin if minimize else np.argmax
    n_rows, n_cols = len(row_starts), len(col_starts)
    scores = np.empty((n_rows, n_cols), dtype=np.float64)
    rows_idx = np.arange(l)
    # Cap the per-chunk workspace at ~32M doubles.
    chunk = max(1, int(32e6 // (l * l)))
    for s, C0 in enumerate(col_starts):
        if stats is None:
            # Fill everything this stripe touches in one shot.
            lo_r, hi_r = row_starts[0], row_starts[-1] + ph
            block = computed[lo_r:hi_r, C0 : C0 + pw]
            rr, cc = np.nonzero(~block)
            compute_patches(rr + lo_r, cc + C0)
        else:
            # Lazy cache fill, window by window, so the per-window accounting
            # reflects the scheme: one new patch column per warm window.
            for t, R0 in enumerate(row_starts):
                rr, cc = _fresh_patches_for_window(computed, R0, C0, ph, pw)
                n_new = compute_patches(rr, cc)
                stats.fresh_entries.append(n_new * l)
        stripe = app_cache[:, :, C0 : C0 + pw]  # (l, PH, pw)
        view = sliding_window_view(stripe, ph, axis=1)  # (l, PH-ph+1, pw, ph)
        for lo in range(0, n_rows, chunk):
            hi = min(lo + chunk, n_rows)
            sel = row_starts[lo:hi]
            # (T, l, ph, pw) -> (T, l, l), row-major window point order
            table = view[:, sel].transpose(1, 0, 3, 2).reshape(hi - lo, l, l)
            table += loc_term
            row_best = arg(table, axis=2)
            col_best = arg(table, axis=1)
            mutual = np.take_along_axis(col_best, row_best, axis=1) == rows_idx[None]
            scores[lo:hi, s] = mutual.sum(axis=1) / l
    if stats is not None:
        stats.path = "distance-reuse"
    return scores


def _run_repair_path(
    app_cache, computed, compute_patches, loc_term, l, ph, pw, step,
    row_starts, col_starts, minimize, stats,
):
    """Min-repair path for placement-invariant measures (lambda == 0).

    Per-patch column extrema are computed once when a patch's distances are
    first cached. Row extrema persist across the slide; a row is fully
    rescanned only when the patch holding its extremum is evicted.
    """
    # The location term is constant here (0 for the squared-distance
    # measure, exp(0)=1 for the inner-product measure).
    const = float(loc_term[0, 0])
    PH, PW = computed.shape
    colbest_val = np.empty((PH, PW), dtype=np.float64)
    colbest_idx = np.empty((PH, PW), dtype=np.int64)
    have_colbest = np.zeros((PH, PW), dtype=bool)
    arg = np.argmin if minimize else np.argmax

    def ensure_patches(R0, C0):
        rr, cc = _fresh_patches_for_window(computed, R0, C0, ph, pw)
        n_new = compute_patches(rr, cc)
        block = computed[R0 : R0 + ph, C0 : C0 + pw]
        rr2, cc2 = np.nonzero(~have_colbest[R0 : R0 + ph, C0 : C0 + pw] & block)
        if rr2.size:
            cols = app_cache[:, rr2 + R0, cc2 + C0] + const
            colbest_idx[rr2 + R0, cc2 + C0] = arg(cols, axis=0)
            colbest_val[rr2 + R0, cc2 + C0] = cols[
                colbest_idx[rr2 + R0, cc2 + C0], np.arange(rr2.size)
            ]
        return n_new

    n_rows, n_cols = len(row_starts), len(col_starts)
    scores = np.empty((n_rows, n_cols), dtype=np.float64)
    better = np.less if minimize else np.greater

    for s, C0 in enumerate(col_starts):
        rb_val = None  # row extremum value per template point
        rb_R = None  # patch row of the extremum
        rb_C = None  # patch col of the extremum
        prev_R0 = None
        for t, R0 in enumerate(row_starts):
            n_new = ensure_patches(R0, C0)
            if stats is not None:
                stats.fresh_entries.append(n_new * l)

            if t == 0:
                # Cold start for this stripe: scan all rows.
                block = (
                    app_cache[:, R0 : R0 + ph, C0 : C0 + pw].reshape(l, l) + const
                )
                j = arg(block, axis=1)
                rb_val = block[np.arange(l), j]
                rb_R = R0 + j // pw
                rb_C = C0 + j % pw
                if stats is not None:
                    stats.row_rescans.append(0)
            else:
                evicted = (rb_R >= prev_R0) & (rb_R < prev_R0 + step)
                n_rescans = int(np.count_nonzero(evicted))
                # Entering patch rows sit at the end of the window in
                # row-major point order, so a tie never displaces the
                # current (lower-index) extremum.
                ent_R0 = R0 + ph - step
                entering = (
                    app_cache[:, ent_R0 : R0 + ph, C0 : C0 + pw].reshape(l, step * pw)
                    + const
                )
                je = arg(entering, axis=1)
                ev = entering[np.arange(l), je]
                update = ~evicted & better(ev, rb_val)
                rb_val[update] = ev[update]
                rb_R[update] = ent_R0 + je[update] // pw
                rb_C[update] = C0 + je[update] % pw
                if n_rescans:
                    ridx = np.nonzero(evicted)[0]
                    block = (
                        app_cache[ridx, R0 : R0 + ph, C0 : C0 + pw].reshape(
                            len(ridx), l
                        )
                        + const
                    )
                    j = arg(block, axis=1)
                    rb_val[ridx] = block[np.arange(len(ridx)), j]
                    rb_R[ridx] = R0 + j // pw
                    rb_C[ridx] = C0 + j % pw
                if stats is not None:
                    stats.row_rescans.append(n_rescans)

            mutual = colbest_idx[rb_R, rb_C] == np.arange(l)
            scores[t, s] = int(np.count_nonzero(mutual)) / l
            prev_R0 = R0
    if stats is not None:
        stats.path = "min-repair"
    return scores


def match_baseline(
    template: FeatureGrid,
    image: FeatureGrid,
    cfg: MatcherConfig,
    baseline: BaselineConfig | BaselineKind,
) -> LikelihoodMap:
    """Score every placement with a baseline; higher is always better in the
    emitted map (dissimilarities are negated)."""
    if isinstance(baseline, BaselineKind):
        baseline = BaselineConfig(baseline)
    _check_match_inputs(template, image, cfg)
    k, stride, m = cfg.patch_size, cfg.stride, cfg.measure
    kind = baseline.kind
    tpl = normalize_per_window(template) if cfg.normalize_windows else template
    P = build_point_set(tpl, k) if kind is BaselineKind.BDS else None
    xs = _window_origins(image.width, template.width, stride)
    ys = _window_origins(image.height, template.height, stride)
    scores = np.empty((len(ys), len(xs)), dtype=np.float64)
    for ty, y in enumerate(ys):
        for tx, x in enumerate(xs):
            win = image.crop(int(x), int(y), template.width, template.height)
            if cfg.normalize_windows:
                win = normalize_per_window(win)
            if kind is BaselineKind.SSD:
                val = -score_ssd(tpl, win)
            elif kind is BaselineKind.SAD:
                val = -score_sad(tpl, win)
            elif kind is BaselineKind.NCC:
                val = score_ncc(tpl, win)
            elif kind is BaselineKind.HM_CHI2:
                val = -score_hm_chi2(tpl, win, baseline.hm_bins)
            else:
                Q = build_point_set(win, k)
                bds = bds_from_matrix(distance_matrix(P, Q, m))
                val = -bds if m.minimize else bds
            scores[ty, tx] = val
    return LikelihoodMap(scores, (template.width, template.height), stride)


def top_modes(
    lmap: LikelihoodMap,
    kmodes: int,
    nms_radius: tuple[float, float] | None = None,
) -> list[MatchResult]:
    """Greedy mode extraction with axis-aligned non-maximum suppression.

    Repeatedly takes the global argmax (ties resolved by row-major cell
    position), emits a result, and suppresses all cells whose window origin
    lies within ``nms_radius`` pixels of the peak's, until ``kmodes`` results
    or the map is exhausted. The default radius is half the window footprint.
    """
    if kmodes < 1:
        raise ValueError(f"kmodes must be >= 1, got {kmodes}")
    w, h = lmap.window_size
    rx, ry = nms_radius if nms_radius is not None else (w / 2.0, h / 2.0)
    work = lmap.scores.astype(np.float64).copy()
    n_rows, n_cols = work.shape
    xs = np.arange(n_cols) * lmap.stride
    ys = np.arange(n_rows) * lmap.stride
    results: list[MatchResult] = []
    for rank in range(1, kmodes + 1):
        flat = int(np.argmax(work))
        ty, tx = divmod(flat, n_cols)
        peak = work[ty, tx]
        if not np.isfinite(peak):
            break
        x, y = int(xs[tx]), int(ys[ty])
        results.append(MatchResult((x, y, w, h), float(peak), rank))
        suppress = (np.abs(xs[None, :] - x) <= rx) & (np.abs(ys[:, None] - y) <= ry)
        work[suppress] = -np.inf
    return results


def benchmark_naive_vs_cached(
    image_size: tuple[int, int],
    template_size: tuple[int, int],
    cfg: MatcherConfig,
    repeats: int = 5,
    seed: int = 0,
):
    """Median wall-clock of both matchers on one random input; returns
    (naive_seconds, cached_seconds, speedup)."""
    rng = np.random.default_rng(seed)
    W, H = image_size
    w, h = template_size
    image = FeatureGrid(rng.random((H, W, 3), dtype=np.float32))
    template = FeatureGrid(image.data[:h, :w].copy())
    naive_times, cached_times = [], []
    for _ in range(repeats):
        t0 = time.perf_counter()
        ref = match_naive(template, image, cfg)
        naive_times.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        out = match_cached(template, image, cfg)
        cached_times.append(time.perf_counter() - t0)
    assert np.array_equal(ref.scores, out.scores)
    tn = float(np.median(naive_times))
    tc = float(np.median(cached_times))
    return tn, tc, tn / tc
