"""Walkthrough: naive vs cached sliding matcher timings.

The two matchers produce bit-identical likelihood maps; the cached one
computes every point-wise appearance distance once per image patch instead
of once per window. This script times both on a few sizes and reports the
ratio.

Run from the repository root:

    python3 demos/benchmark_demo.py
"""

from bestbuddies import MatcherConfig, benchmark_naive_vs_cached

SIZES = [
    ((64, 64), (16, 16)),
    ((96, 96), (20, 20)),
    ((128, 128), (24, 24)),
]


def main():
    cfg = MatcherConfig(patch_size=2)
    print(f"{'image':>10} {'template':>10} {'naive':>9} {'cached':>9} {'speedup':>9}")
    for image_size, template_size in SIZES:
        tn, tc, speedup = benchmark_naive_vs_cached(
            image_size, template_size, cfg, repeats=3, seed=0
        )
        img = f"{image_size[0]}x{image_size[1]}"
        tpl = f"{template_size[0]}x{template_size[1]}"
        print(f"{img:>10} {tpl:>10} {tn:8.2f}s {tc:8.2f}s {speedup:8.1f}x")


if __name__ == "__main__":
    main()
