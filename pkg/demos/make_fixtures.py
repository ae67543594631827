"""Regenerate the committed test fixtures under fixtures/.

Two sets are produced, both fully deterministic:

* fixtures/synthetic: three template/target pairs where the template crop is
  pasted verbatim into the target, so an exact matcher must recover every
  location and the evaluation harness must report a perfect score.
* fixtures/robustness: a single hard pair. The template shows an object on
  one background; the target shows the same object on a completely different
  background, with roughly 30% of the object hidden behind an occluder.
  Appearance-only scores get pulled away from the object, while
  mutual-neighbor counting still locks onto the visible object patches.

Run from the repository root:

    python3 demos/make_fixtures.py
"""

import json
from pathlib import Path

import numpy as np

from bestbuddies import (
    Box,
    MatcherConfig,
    color_measure,
    evaluate_pairs,
    load_annotations,
)

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


def write_ppm(path: Path, pixels: np.ndarray) -> None:
    assert pixels.dtype == np.uint8 and pixels.ndim == 3 and pixels.shape[2] == 3
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(b"P6\n%d %d\n255\n" % (pixels.shape[1], pixels.shape[0]))
        f.write(pixels.tobytes())


def texture(rng: np.random.Generator, h: int, w: int, base, spread: int) -> np.ndarray:
    """Noisy single-hue texture, clipped to valid 8-bit."""
    base = np.asarray(base, dtype=np.int32)
    noise = rng.integers(-spread, spread + 1, size=(h, w, 3))
    return np.clip(base[None, None] + noise, 0, 255).astype(np.uint8)


def object_pattern(rng: np.random.Generator, size: int) -> np.ndarray:
    """Distinctive quilt of saturated 4x4 color blocks."""
    palette = np.array(
        [
            [230, 40, 40],
            [40, 40, 230],
            [240, 240, 240],
            [230, 40, 230],
            [240, 180, 30],
            [30, 220, 220],
        ],
        dtype=np.int32,
    )
    cells = -(-size // 4)
    picks = rng.integers(0, len(palette), size=(cells, cells))
    quilt = palette[picks].repeat(4, axis=0).repeat(4, axis=1)
    noise = rng.integers(-12, 13, size=quilt.shape)
    return np.clip(quilt + noise, 0, 255).astype(np.uint8)[:size, :size]


def make_synthetic() -> None:
    out = FIXTURES / "synthetic"
    rng = np.random.default_rng(7)
    records = []
    pastes = [(12, 34), (40, 8), (26, 26)]
    for i, (px, py) in enumerate(pastes, 1):
        tpl_img = rng.integers(0, 256, size=(40, 40, 3)).astype(np.uint8)
        target = rng.integers(0, 256, size=(64, 64, 3)).astype(np.uint8)
        tb = Box(8, 8, 16, 16)
        target[py : py + tb.h, px : px + tb.w] = tpl_img[
            tb.y : tb.y + tb.h, tb.x : tb.x + tb.w
        ]
        write_ppm(out / f"template_{i}.ppm", tpl_img)
        write_ppm(out / f"target_{i}.ppm", target)
        records.append(
            {
                "id": f"synthetic-{i}",
                "template_image": f"template_{i}.ppm",
                "target_image": f"target_{i}.ppm",
                "template_box": [tb.x, tb.y, tb.w, tb.h],
                "gt_box": [px, py, tb.w, tb.h],
            }
        )
    with open(out / "pairs.jsonl", "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")


def make_robustness() -> None:
    out = FIXTURES / "robustness"
    obj = object_pattern(np.random.default_rng(21), 46)

    # Template: object on a green background ring.
    template = texture(np.random.default_rng(3), 48, 48, (60, 150, 60), 25)
    template[1:47, 1:47] = obj

    # Target: the object reappears darkened (70% brightness) on an unrelated
    # gray background whose mean matches the template's, and a 25x25 occluder
    # hides 625 of its 2116 pixels (just under 30%). The global brightness
    # change plus the mean-matched background is what pulls pixel-difference
    # scores into the background, while enough visible patches still pair up
    # mutually for the buddy count to stay anchored on the object.
    rng = np.random.default_rng(5)
    tmean = template.reshape(-1, 3).mean(axis=0).astype(np.int32)
    target = np.clip(
        tmean[None, None] + rng.integers(-18, 19, size=(96, 96, 3)), 0, 255
    ).astype(np.uint8)
    px, py = 36, 28
    dark = np.clip(obj.astype(np.float64) * 0.70, 0, 255).astype(np.uint8)
    target[py + 1 : py + 47, px + 1 : px + 47] = dark
    target[py + 21 : py + 46, px + 21 : px + 46] = np.clip(
        np.array([25, 25, 30])[None, None] + rng.integers(-8, 9, size=(25, 25, 3)),
        0,
        255,
    ).astype(np.uint8)

    write_ppm(out / "template.ppm", template)
    write_ppm(out / "target.ppm", target)
    rec = {
        "id": "robustness-1",
        "template_image": "template.ppm",
        "target_image": "target.ppm",
        "template_box": [0, 0, 48, 48],
        "gt_box": [px, py, 48, 48],
    }
    with open(out / "pairs.jsonl", "w", encoding="utf-8") as f:
        f.write(json.dumps(rec) + "\n")


def verify() -> None:
    cfg = MatcherConfig(patch_size=2, measure=color_measure(0.25))

    ann = load_annotations(FIXTURES / "synthetic" / "pairs.jsonl")
    rep = evaluate_pairs(ann, "bbs", cfg=cfg, base_dir=FIXTURES / "synthetic")
    print(f"synthetic: bbs mAP={rep.map_value:.3f} "
          f"overlaps={[round(r.rank1_overlap, 3) for r in rep.results]}")
    assert rep.map_value == 1.0, "synthetic set must be solved perfectly"

    ann = load_annotations(FIXTURES / "robustness" / "pairs.jsonl")
    base = FIXTURES / "robustness"
    bbs = evaluate_pairs(ann, "bbs", cfg=cfg, base_dir=base)
    ssd = evaluate_pairs(ann, "ssd", cfg=cfg, base_dir=base)
    print(f"robustness: bbs overlap={bbs.results[0].rank1_overlap:.3f} "
          f"ssd overlap={ssd.results[0].rank1_overlap:.3f}")
    assert bbs.results[0].rank1_overlap >= 0.8, "mutual-neighbor match must hit"
    assert bbs.results[0].rank1_overlap >= ssd.results[0].rank1_overlap


if __name__ == "__main__":
    make_synthetic()
    make_robustness()
    verify()
    print("fixtures written to", FIXTURES)
