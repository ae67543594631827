"""End-to-end acceptance gate.

Thirteen numbered criteria covering exactness of the cached matcher, the
definitional score oracle, the closed-form and Monte-Carlo statistics, cache
accounting, performance, and the bundled fixtures. Each test prints a single
summary line; tolerances are pinned constants, and every randomized check
runs from a frozen seed so the whole gate is reproducible bit for bit.
"""

import time
from pathlib import Path

import numpy as np
import pytest

from bestbuddies import (
    Box,
    CacheStats,
    FeatureGrid,
    MatcherConfig,
    PointSet,
    bbs_score,
    benchmark_naive_vs_cached,
    color_measure,
    distance_matrix,
    evaluate_pairs,
    load_annotations,
    match_cached,
    match_naive,
    overlap_integral,
    pointwise_distance,
    similarity_measure,
    theorem1_limit,
)
from bestbuddies import statsim as st

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def random_pair(seed):
    rng = np.random.default_rng(seed)
    img = FeatureGrid(rng.random((64, 64, 3), dtype=np.float32))
    y, x = (int(v) for v in rng.integers(0, 48, 2))
    tpl = FeatureGrid(img.data[y : y + 16, x : x + 16].copy())
    return tpl, img


def test_criterion_01_cache_exactness():
    """Cached likelihood maps are bit-identical to the naive matcher's."""
    t0 = time.perf_counter()
    checked = 0
    for seed in range(20):
        tpl, img = random_pair(seed)
        for k, stride in ((1, 4), (2, 2)):
            cfg = MatcherConfig(patch_size=k, stride=stride)
            ref = match_naive(tpl, img, cfg)
            out = match_cached(tpl, img, cfg)
            assert np.array_equal(ref.scores, out.scores)
            checked += 1
    # One full-density configuration on top of the seed sweep.
    tpl, img = random_pair(100)
    cfg = MatcherConfig(patch_size=1, stride=1)
    assert np.array_equal(
        match_naive(tpl, img, cfg).scores, match_cached(tpl, img, cfg).scores
    )
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    print(
        f"criterion 01 cache exactness: PASS "
        f"({checked + 1} configs bitwise equal, {elapsed:.1f}s)"
    )


def _oracle_bbs(P: PointSet, Q: PointSet, m) -> float:
    """Definitional reimplementation: explicit loops over point-wise values."""
    table = [
        [pointwise_distance(P[i], Q[j], m) for j in range(len(Q))]
        for i in range(len(P))
    ]
    better = (lambda a, b: a < b) if m.minimize else (lambda a, b: a > b)

    def argbest(values):
        best = 0
        for idx in range(1, len(values)):
            if better(values[idx], values[best]):
                best = idx
        return best

    count = 0
    for i in range(len(P)):
        j = argbest(table[i])
        if argbest([table[ii][j] for ii in range(len(P))]) == i:
            count += 1
    return count / min(len(P), len(Q))


def test_criterion_02_definitional_oracle():
    """Score equals a from-scratch loop implementation on random sets."""
    rng = np.random.default_rng(7)
    for seed in range(200):
        n_p, n_q = (int(v) for v in rng.integers(1, 11, 2))
        P = PointSet(rng.random((n_p, 2)), rng.standard_normal((n_p, 3)))
        Q = PointSet(rng.random((n_q, 2)), rng.standard_normal((n_q, 3)))
        m = color_measure() if seed % 2 == 0 else similarity_measure()
        assert bbs_score(distance_matrix(P, Q, m)) == _oracle_bbs(P, Q, m)
    print("criterion 02 definitional oracle: PASS (200 random set pairs, exact)")


def test_criterion_03_identity_and_existence():
    """Self-similarity is exactly 1; every pair of sets shares a buddy."""
    rng = np.random.default_rng(11)
    for _ in range(50):
        n = int(rng.integers(1, 15))
        P = PointSet(rng.random((n, 2)), rng.standard_normal((n, 3)))
        assert bbs_score(distance_matrix(P, P, color_measure())) == 1.0
    for _ in range(100):
        n_p, n_q = (int(v) for v in rng.integers(1, 12, 2))
        P = PointSet(rng.random((n_p, 2)), rng.standard_normal((n_p, 3)))
        Q = PointSet(rng.random((n_q, 2)), rng.standard_normal((n_q, 3)))
        assert bbs_score(distance_matrix(P, Q, color_measure())) > 0.0
    print("criterion 03 identity and existence: PASS (150 random sets, exact)")


SSD_SAD_GRID = ((0.0, 1.0), (3.0, 2.0), (5.0, 0.5))


def test_criterion_04_expected_ssd():
    """Monte-Carlo squared-difference mean within 1% of 1 + mu^2 + sigma^2."""
    rng = np.random.default_rng(13)
    worst = 0.0
    for mu, sigma in SSD_SAD_GRID:
        p = rng.standard_normal(1_000_000)
        q = rng.standard_normal(1_000_000) * sigma + mu
        mc = float(((p - q) ** 2).mean())
        closed = st.expected_ssd(mu, sigma)
        rel = abs(mc - closed) / closed
        worst = max(worst, rel)
        assert rel <= 0.01
    print(f"criterion 04 expected SSD: PASS (worst relative error {worst:.4f})")


def test_criterion_05_expected_sad():
    """Monte-Carlo absolute-difference mean within 2% of the folded-normal mean."""
    rng = np.random.default_rng(17)
    worst = 0.0
    for mu, sigma in SSD_SAD_GRID:
        p = rng.standard_normal(1_000_000)
        q = rng.standard_normal(1_000_000) * sigma + mu
        mc = float(np.abs(p - q).mean())
        closed = st.expected_sad(mu, sigma)
        rel = abs(mc - closed) / closed
        worst = max(worst, rel)
        assert rel <= 0.02
    print(f"criterion 05 expected SAD: PASS (worst relative error {worst:.4f})")


def test_criterion_06_expectation_peak():
    """The expected score over a (mu, sigma) grid peaks at identical
    distributions and decays along mu."""
    mus = [0.0, 1.0, 2.0, 3.0, 4.0]
    sigmas = [0.5, 1.0, 2.0, 3.0]
    _, rows = st.run_expectation_grid(mus, sigmas, n=100, samples=100_000, seed=0)
    vals = {(mu, sigma): v for mu, sigma, v in rows}
    best = max(vals, key=vals.get)
    assert best == (0.0, 1.0)
    for mu in mus[:-1]:
        assert vals[(mu, 1.0)] > vals[(mu + 1.0, 1.0)]
    print(
        f"criterion 06 expectation peak: PASS "
        f"(argmax at mu=0 sigma=1, value {vals[best]:.4f}, decreasing in mu)"
    )


def test_criterion_07_estimator_cross_check():
    """Sampled-score and integral estimators agree within 3 standard errors."""
    cfg = st.SimConfig(st.gaussian(0, 1), st.gaussian(0, 1), n=100, trials=1000, seed=11)
    emp, se_emp = st.empirical_ebbs(cfg, return_stderr=True)
    ebbp, se_int = st.integral_ebbp(cfg, samples=200_000, return_stderr=True)
    scale = st.ebbs_scale(cfg)
    delta = abs(emp - scale * ebbp)
    bound = 3.0 * float(np.hypot(se_emp, scale * se_int))
    assert delta <= bound
    print(
        f"criterion 07 estimator cross-check: PASS "
        f"(|{emp:.4f} - {scale * ebbp:.4f}| = {delta:.4f} <= {bound:.4f})"
    )


def test_criterion_08_pinned_point_convergence():
    """Pinned-point mutual probability matches its density-ratio limit at
    N=10^4 and is visibly unconverged at N=10."""
    dist_p, dist_q = st.fig_mixtures()
    grid = np.linspace(-8.0, 8.0, 41)

    def max_deviation(n):
        dev = 0.0
        for i, p in enumerate(grid):
            analytic = st.lemma1_analytic(dist_p, dist_q, float(p))
            emp = st.lemma1_empirical(dist_p, dist_q, float(p), n, 500, seed=i)
            dev = max(dev, abs(emp - analytic))
        return dev

    dev_large = max_deviation(10_000)
    dev_small = max_deviation(10)
    assert dev_large <= 0.05
    assert dev_small > dev_large
    print(
        f"criterion 08 pinned-point convergence: PASS "
        f"(max dev {dev_large:.4f} at N=10^4 vs {dev_small:.4f} at N=10)"
    )


def test_criterion_09_large_n_limit():
    """Empirical large-N score matches 1/2 - chi^2/4; both algebraic forms of
    the limit agree to 1e-6."""
    mix_p, mix_q = st.fig_mixtures()
    configs = [
        ("standard-mixtures", mix_p, mix_q),
        ("matched-gaussian", st.gaussian(0, 1), st.gaussian(0, 1)),
        ("shifted-gaussian", st.gaussian(0, 1), st.gaussian(2, 1)),
    ]
    worst = 0.0
    for name, dp, dq in configs:
        cfg = st.SimConfig(dp, dq, n=10_000, trials=30, seed=42)
        emp = st.empirical_ebbs(cfg)
        limit = theorem1_limit(dp, dq)
        assert abs(limit - overlap_integral(dp, dq)) <= 1e-6
        delta = abs(emp - limit)
        worst = max(worst, delta)
        assert delta <= 0.05, name
    print(f"criterion 09 large-N limit: PASS (3 configs, worst |delta| {worst:.4f})")


def test_criterion_10_min_repair_accounting():
    """With a placement-invariant measure, full row rescans average about one
    per window."""
    rng = np.random.default_rng(0)
    img = FeatureGrid(rng.random((292, 64, 3), dtype=np.float32))
    tpl = FeatureGrid(rng.random((32, 4, 3), dtype=np.float32))
    cfg = MatcherConfig(patch_size=4, measure=color_measure(0.0))
    stats = CacheStats()
    out = match_cached(tpl, img, cfg, stats=stats)
    assert stats.path == "min-repair"
    assert np.array_equal(out.scores, match_naive(tpl, img, cfg).scores)
    rescans = np.array(stats.row_rescans, dtype=np.float64)
    assert len(rescans) >= 1000
    mean = float(rescans.mean())
    assert 0.5 <= mean <= 2.0
    print(
        f"criterion 10 min-repair accounting: PASS "
        f"({len(rescans)} windows, mean rescans/window {mean:.3f})"
    )


def test_criterion_11_performance():
    """Cached matcher at least 5x faster than naive (median of 5 runs)."""
    cfg = MatcherConfig(patch_size=2)
    tn, tc, speedup = benchmark_naive_vs_cached(
        (128, 128), (24, 24), cfg, repeats=5, seed=0
    )
    assert speedup >= 5.0
    print(
        f"criterion 11 performance: PASS "
        f"(naive {tn:.2f}s, cached {tc:.2f}s, speedup {speedup:.1f}x)"
    )


def test_criterion_12_robustness_fixture():
    """On the occluded, background-swapped pair, the buddy score localizes the
    object and the squared-difference baseline does not do better."""
    base = FIXTURES / "robustness"
    anns = load_annotations(base / "pairs.jsonl")
    cfg = MatcherConfig(patch_size=2, measure=color_measure(0.25))
    bbs = evaluate_pairs(anns, "bbs", cfg=cfg, base_dir=base)
    ssd = evaluate_pairs(anns, "ssd", cfg=cfg, base_dir=base)
    ov_bbs = bbs.results[0].rank1_overlap
    ov_ssd = ssd.results[0].rank1_overlap
    assert ov_bbs >= 0.8
    assert ov_bbs >= ov_ssd
    print(
        f"criterion 12 robustness fixture: PASS "
        f"(buddy overlap {ov_bbs:.3f}, squared-difference overlap {ov_ssd:.3f})"
    )


def test_criterion_13_harness_map():
    """Perfect score on the bundled synthetic set; best-of-3 never falls below
    best-of-1."""
    base = FIXTURES / "synthetic"
    anns = load_annotations(base / "pairs.jsonl")
    cfg = MatcherConfig(patch_size=2, measure=color_measure(0.25))
    rep = evaluate_pairs(anns, "bbs", cfg=cfg, base_dir=base)
    assert rep.map_value == 1.0
    for method in ("bbs", "ssd", "ncc", "sad", "hm-chi2", "bds"):
        one = evaluate_pairs(anns, method, kmodes=1, cfg=cfg, base_dir=base)
        three = evaluate_pairs(anns, method, kmodes=3, cfg=cfg, base_dir=base)
        for r1, r3 in zip(one.results, three.results):
            assert r3.best_of_k_overlap >= r1.best_of_k_overlap
    print(
        "criterion 13 harness mAP: PASS "
        "(synthetic mAP exactly 1.0, best-of-3 >= best-of-1 for 6 methods)"
    )
