"""Evaluation harness: box overlap, success curves, mAP, and pair scoring.

Annotated template/target pairs arrive as JSON Lines, one object per line::

    {"id": "...", "template_image": "t.ppm", "target_image": "q.ppm",
     "template_box": [x, y, w, h], "gt_box": [x, y, w, h]}

Image paths are resolved relative to the annotation file. The harness crops
the template, runs the requested matcher, extracts the top-k modes, and
aggregates best-of-k overlap into a success curve and its area (mAP).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import BaselineKind
from .errors import ConfigError
from .features import FeatureGrid, load_image, rgb_to_hsv
from .matcher import MatcherConfig, match_baseline, match_cached, match_naive, top_modes

DEFAULT_THRESHOLDS = np.linspace(0.0, 1.0, 101)

METHODS = ("bbs",) + tuple(k.value for k in BaselineKind)


@dataclass(frozen=True)
class Box:
    """Closed integer pixel rectangle: top-left (x, y), size w x h >= 1."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"box size must be >= 1, got {self.w}x{self.h}")

    def area(self) -> int:
        return self.w * self.h


@dataclass(frozen=True)
class PairAnnotation:
    id: str
    template_image: str
    target_image: str
    template_box: Box
    gt_box: Box


def overlap(a: Box, b: Box) -> float:
    """Intersection-over-union of two boxes, in exact integer arithmetic."""
    ix = max(0, min(a.x + a.w, b.x + b.w) - max(a.x, b.x))
    iy = max(0, min(a.y + a.h, b.y + b.h) - max(a.y, b.y))
    inter = ix * iy
    union = a.area() + b.area() - inter
    return inter / union


def success_curve(overlaps, thresholds=None) -> tuple[np.ndarray, np.ndarray]:
    """Fraction of examples succeeding at each overlap threshold.

    Success at threshold TH is ``overlap >= TH`` for TH > 0 and
    ``overlap > 0`` at TH = 0, so a perfect set scores 1 across the whole
    grid and an all-miss set scores 0. Returns (thresholds, fractions);
    fractions are monotone non-increasing.
    """
    ov = np.asarray(list(overlaps), dtype=np.float64)
    if ov.size == 0:
        raise ValueError("need at least one overlap value")
    th = DEFAULT_THRESHOLDS if thresholds is None else np.asarray(thresholds, dtype=np.float64)
    frac = np.empty_like(th)
    for i, t in enumerate(th):
        frac[i] = np.mean(ov > 0.0) if t == 0.0 else np.mean(ov >= t)
    return th, frac


def map_score(thresholds: np.ndarray, fractions: np.ndarray) -> float:
    """Area under the success curve over [0, 1] (trapezoidal)."""
    return float(np.trapezoid(fractions, thresholds))


def load_annotations(path) -> list[PairAnnotation]:
    """Read a JSON Lines annotation file."""
    path = Path(path)
    out = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            out.append(
                PairAnnotation(
                    id=str(rec.get("id", f"pair-{lineno}")),
                    template_image=rec["template_image"],
                    target_image=rec["target_image"],
                    template_box=Box(*rec["template_box"]),
                    gt_box=Box(*rec["gt_box"]),
                )
            )
    return out


@dataclass
class PairResult:
    pair_id: str
    method: str
    rank1_overlap: float
    best_of_k_overlap: float
    error: str | None = None


@dataclass
class EvalReport:
    method: str
    kmodes: int
    results: list
    thresholds: np.ndarray
    fractions: np.ndarray
    map_value: float
    failures: int


def _match_method(template: FeatureGrid, image: FeatureGrid, method: str, cfg: MatcherConfig):
    if method == "bbs":
        try:
            return match_cached(template, image, cfg)
        except ConfigError:
            return match_naive(template, image, cfg)
    kind = BaselineKind(method)
    return match_baseline(template, image, cfg, kind)


def evaluate_pairs(
    annotations,
    method: str,
    kmodes: int = 1,
    cfg: MatcherConfig | None = None,
    base_dir=None,
    use_hsv: bool = False,
) -> EvalReport:
    """Score each annotated pair and aggregate best-of-top-k overlap.

    An unreadable or malformed pair is recorded as a failure (overlap 0)
    rather than aborting the run.
    """
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; valid: {', '.join(METHODS)}")
    cfg = cfg or MatcherConfig()
    base = Path(base_dir) if base_dir is not None else Path(".")
    results = []
    failures = 0
    for ann in annotations:
        try:
            tpl_img = load_image(base / ann.template_image)
            target = load_image(base / ann.target_image)
            if use_hsv:
                tpl_img = rgb_to_hsv(tpl_img)
                target = rgb_to_hsv(target)
            tb = ann.template_box
            template = tpl_img.crop(tb.x, tb.y, tb.w, tb.h)
            lmap = _match_method(template, target, method, cfg)
            modes = top_modes(lmap, kmodes)
            ovs = [overlap(Box(*m.box), ann.gt_box) for m in modes]
            results.append(
                PairResult(ann.id, method, ovs[0], max(ovs))
            )
        except (OSError, ValueError) as exc:
            failures += 1
            results.append(PairResult(ann.id, method, 0.0, 0.0, error=str(exc)))
    th, frac = success_curve([r.best_of_k_overlap for r in results])
    return EvalReport(
        method=method,
        kmodes=kmodes,
        results=results,
        thresholds=th,
        fractions=frac,
        map_value=map_score(th, frac),
        failures=failures,
    )


def write_report_csv(reports, path) -> None:
    """Per-pair CSV: pair id, method, rank-1 overlap, best-of-k overlap."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["pair_id", "method", "rank1_overlap", "best_of_k_overlap", "error"])
        for rep in reports:
            for r in rep.results:
                writer.writerow(
                    [r.pair_id, r.method, f"{r.rank1_overlap:.6f}",
                     f"{r.best_of_k_overlap:.6f}", r.error or ""]
                )


def write_summary_json(reports, path) -> None:
    """Summary JSON: per-method mAP and failure counts."""
    summary = {
        rep.method: {
            "map": rep.map_value,
            "kmodes": rep.kmodes,
            "pairs": len(rep.results),
            "failures": rep.failures,
        }
        for rep in reports
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
