"""Command-line entry point: matching, simulation, evaluation, benchmarking.

Exit codes: 0 success, 2 bad flags or configuration, 3 I/O failure,
4 dimension mismatch. Output files are written to a temporary name and
renamed on success, so a failed run never leaves partial outputs behind.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import statsim
from .errors import ConfigError, DimensionError, FormatError
from .evaluation import (
    METHODS,
    evaluate_pairs,
    load_annotations,
    write_report_csv,
    write_summary_json,
)
from .features import (
    FeatureGrid,
    load_feature_grid,
    load_image,
    rgb_to_hsv,
    save_feature_grid,
    save_pgm,
)
from .matcher import (
    Algorithm,
    MatcherConfig,
    benchmark_naive_vs_cached,
    match_cached,
    match_naive,
    top_modes,
)
from .pointset import color_measure, similarity_measure

EXIT_OK = 0
EXIT_FLAGS = 2
EXIT_IO = 3
EXIT_DIMS = 4


def _atomic_write(path: Path, write_fn) -> None:
    """Write via temp file + rename so failures leave no partial output."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    os.close(fd)
    try:
        write_fn(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_grid(path: str, mode: str) -> FeatureGrid:
    if mode == "feature-grid":
        return load_feature_grid(path)
    grid = load_image(path)
    if mode == "color-hsv":
        grid = rgb_to_hsv(grid)
    return grid


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bbs",
        description="Mutual-nearest-neighbor template matching toolbox",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get("BBS_THREADS", "1")),
        help="worker thread budget (advisory; current kernels are single-threaded)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("match", help="score template placements in an image")
    p.add_argument("--template", required=True)
    p.add_argument("--image", required=True)
    p.add_argument(
        "--measure", choices=["color-hsv", "color-rgb", "feature-grid"], default="color-hsv"
    )
    p.add_argument("--k", type=int, default=2, help="patch size")
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="location weight")
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--algorithm", choices=["naive", "cached"], default="cached")
    p.add_argument("--kmodes", type=int, default=3)
    p.add_argument("--nms-rx", type=float, default=None)
    p.add_argument("--nms-ry", type=float, default=None)
    p.add_argument("--normalize-windows", action="store_true")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("simulate", help="statistical experiments, CSV output")
    p.add_argument(
        "--experiment", required=True, choices=["fig4", "fig5", "theorem1", "ssd_sad"]
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("eval", help="evaluate methods on annotated pairs")
    p.add_argument("--annotations", required=True)
    p.add_argument("--methods", required=True, help="comma-separated method names")
    p.add_argument("--kmodes", type=int, default=1)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--hsv", action="store_true", help="convert images to HSV")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("bench", help="time naive vs cached matching")
    p.add_argument(
        "--sizes",
        default="128x128:24x24",
        help="comma-separated WxH:wxh entries, e.g. 128x128:24x24",
    )
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="optional CSV path")
    return parser


def _cmd_match(args) -> int:
    template = _load_grid(args.template, args.measure)
    image = _load_grid(args.image, args.measure)
    if args.measure == "feature-grid":
        measure = similarity_measure(args.lam if args.lam is not None else 1.0)
    else:
        measure = color_measure(args.lam if args.lam is not None else 0.25)
    cfg = MatcherConfig(
        patch_size=args.k,
        measure=measure,
        stride=args.stride,
        algorithm=Algorithm(args.algorithm),
        normalize_windows=args.normalize_windows,
    )
    if cfg.algorithm is Algorithm.NAIVE:
        lmap = match_naive(template, image, cfg)
    else:
        lmap = match_cached(template, image, cfg)
    nms = None
    if args.nms_rx is not None or args.nms_ry is not None:
        w, h = lmap.window_size
        nms = (
            args.nms_rx if args.nms_rx is not None else w / 2.0,
            args.nms_ry if args.nms_ry is not None else h / 2.0,
        )
    modes = top_modes(lmap, args.kmodes, nms)

    out = Path(args.out)
    _atomic_write(out / "likelihood.bfm", lambda p: save_feature_grid(lmap.to_feature_grid(), p))
    _atomic_write(out / "likelihood.pgm", lambda p: save_pgm(lmap.scores, p))
    payload = {
        "template": args.template,
        "image": args.image,
        "measure": args.measure,
        "k": args.k,
        "lambda": measure.lam,
        "stride": cfg.stride,
        "algorithm": args.algorithm,
        "matches": [
            {"box": list(m.box), "score": m.score, "rank": m.rank} for m in modes
        ],
    }
    _atomic_write(
        out / "matches.json",
        lambda p: Path(p).write_text(json.dumps(payload, indent=2) + "\n"),
    )
    return EXIT_OK


def _write_csv(path: str, header, rows, meta: dict) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        for key, val in meta.items():
            f.write(f"# {key}: {val}\n")
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)


def _cmd_simulate(args) -> int:
    meta = {
        "experiment": args.experiment,
        "seed": args.seed,
        "rng": statsim.RNG_ALGORITHM,
    }
    if args.experiment == "fig4":
        header, rows = statsim.run_expectation_grid(
            mus=np.arange(0.0, 10.5, 0.5),
            sigmas=np.concatenate([[0.5], np.arange(1.0, 10.5, 0.5)]),
            n=args.n,
            samples=args.samples,
            seed=args.seed,
        )
        meta.update(n=args.n, samples=args.samples)
    elif args.experiment == "fig5":
        header, rows = statsim.run_lemma1_curves(
            p_grid=np.linspace(-10.0, 10.0, 41),
            sizes=[10, 100, 1000, 10_000],
            trials=args.trials,
            seed=args.seed,
        )
        meta.update(trials=args.trials)
    elif args.experiment == "theorem1":
        p1, q1 = statsim.fig_mixtures()
        configs = [
            ("standard-mixtures", p1, q1),
            ("matched-gaussian", statsim.gaussian(0, 1), statsim.gaussian(0, 1)),
            ("shifted-gaussian", statsim.gaussian(0, 1), statsim.gaussian(2, 1)),
        ]
        header, rows = statsim.run_limit_comparison(
            configs, n=args.n, trials=args.trials, seed=args.seed
        )
        meta.update(n=args.n, trials=args.trials)
    else:
        header, rows = statsim.run_ssd_sad_table(
            [(0.0, 1.0), (3.0, 2.0), (5.0, 0.5)], samples=args.samples, seed=args.seed
        )
        meta.update(samples=args.samples)
    _atomic_write(Path(args.out), lambda p: _write_csv(p, header, rows, meta))
    return EXIT_OK


def _cmd_eval(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS:
            print(
                f"error: unknown method {m!r}; valid methods: {', '.join(METHODS)}",
                file=sys.stderr,
            )
            return EXIT_FLAGS
    annotations = load_annotations(args.annotations)
    base_dir = Path(args.annotations).parent
    cfg = MatcherConfig(patch_size=args.k, measure=color_measure(args.lam or 0.25))
    reports = [
        evaluate_pairs(
            annotations, m, kmodes=args.kmodes, cfg=cfg, base_dir=base_dir, use_hsv=args.hsv
        )
        for m in methods
    ]
    out = Path(args.out)
    _atomic_write(out / "report.csv", lambda p: write_report_csv(reports, p))
    _atomic_write(out / "summary.json", lambda p: write_summary_json(reports, p))
    for rep in reports:
        print(f"{rep.method}: mAP={rep.map_value:.4f} (kmodes={rep.kmodes}, "
              f"pairs={len(rep.results)}, failures={rep.failures})")
    return EXIT_OK


def _parse_sizes(spec: str):
    out = []
    for entry in spec.split(","):
        img, tpl = entry.strip().split(":")
        iw, ih = (int(v) for v in img.split("x"))
        tw, th = (int(v) for v in tpl.split("x"))
        out.append(((iw, ih), (tw, th)))
    return out


def _cmd_bench(args) -> int:
    try:
        sizes = _parse_sizes(args.sizes)
    except ValueError:
        print(f"error: bad --sizes value {args.sizes!r}", file=sys.stderr)
        return EXIT_FLAGS
    cfg = MatcherConfig(patch_size=args.k)
    header = ["image", "template", "k", "naive_s", "cached_s", "speedup"]
    rows = []
    for image_size, template_size in sizes:
        tn, tc, speedup = benchmark_naive_vs_cached(
            image_size, template_size, cfg, repeats=args.repeats, seed=args.seed
        )
        rows.append(
            [
                f"{image_size[0]}x{image_size[1]}",
                f"{template_size[0]}x{template_size[1]}",
                args.k,
                f"{tn:.4f}",
                f"{tc:.4f}",
                f"{speedup:.2f}",
            ]
        )
    print(" | ".join(header))
    for row in rows:
        print(" | ".join(str(v) for v in row))
    if args.out:
        _atomic_write(
            Path(args.out),
            lambda p: _write_csv(p, header, rows, {"repeats": args.repeats, "seed": args.seed}),
        )
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "match": _cmd_match,
        "simulate": _cmd_simulate,
        "eval": _cmd_eval,
        "bench": _cmd_bench,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FLAGS
    except DimensionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMS
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: cannot read {exc.filename or exc}", file=sys.stderr)
        return EXIT_IO
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
