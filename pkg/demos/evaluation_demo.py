"""Walkthrough: the evaluation harness on the bundled fixtures.

Scores every method on the synthetic annotation set (exact copies of the
template planted in clean backgrounds) and on the robustness pair (replaced
background, darkened object, 30% occlusion), then prints per-method mAP and
overlaps.

Run from the repository root:

    python3 demos/evaluation_demo.py
"""

from pathlib import Path

from bestbuddies import (
    METHODS,
    MatcherConfig,
    color_measure,
    evaluate_pairs,
    load_annotations,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def run_set(name):
    base = FIXTURES / name
    anns = load_annotations(base / "pairs.jsonl")
    cfg = MatcherConfig(patch_size=2, measure=color_measure(0.25))
    print(f"{name} ({len(anns)} pairs)")
    for method in METHODS:
        rep = evaluate_pairs(anns, method, kmodes=1, cfg=cfg, base_dir=base)
        overlaps = ", ".join(f"{r.rank1_overlap:.2f}" for r in rep.results)
        print(f"  {method:8s} mAP={rep.map_value:.3f}  overlaps: {overlaps}")


if __name__ == "__main__":
    run_set("synthetic")
    run_set("robustness")
