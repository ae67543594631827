"""Walkthrough: the statistical behaviour of the mutual-neighbor score.

Three short experiments on 1-D Gaussian data:

1. The expected score between N(0,1) and N(mu, sigma) peaks when the two
   distributions coincide and falls off as they separate.
2. The probability that a point pinned at p keeps a mutual neighbor tends to
   f_Q(p) / (f_P(p) + f_Q(p)) as the sets grow.
3. For large equal-size sets the expected score approaches 1/2 - chi^2/4,
   where chi^2 is the chi-square distance between the densities.

Run from the repository root:

    python3 demos/statistics_demo.py
"""

from bestbuddies import statsim as st


def expectation_peak():
    print("expected score, P = N(0,1) vs Q = N(mu, sigma), N = 100")
    mus, sigmas = [0.0, 1.0, 2.0, 3.0], [0.5, 1.0, 2.0]
    _, rows = st.run_expectation_grid(mus, sigmas, n=100, samples=100_000, seed=0)
    vals = {(mu, s): v for mu, s, v in rows}
    header = "  mu\\sigma " + "".join(f"{s:>8}" for s in sigmas)
    print(header)
    for mu in mus:
        cells = "".join(f"{vals[(mu, s)]:8.3f}" for s in sigmas)
        print(f"  {mu:7.1f} {cells}")


def pinned_point():
    print("\npinned-point mutual probability vs its density-ratio limit")
    dist_p, dist_q = st.fig_mixtures()
    for p in (-5.0, -2.5, 0.0, 2.5, 5.0):
        analytic = st.lemma1_analytic(dist_p, dist_q, p)
        parts = [f"  p={p:5.1f} limit={analytic:.3f}"]
        for n in (10, 100, 10_000):
            emp = st.lemma1_empirical(dist_p, dist_q, p, n, trials=300, seed=1)
            parts.append(f"N={n}: {emp:.3f}")
        print("  ".join(parts))


def large_n_limit():
    print("\nlarge-N limit: empirical score vs 1/2 - chi^2/4")
    dist_p, dist_q = st.fig_mixtures()
    configs = [
        ("standard mixtures", dist_p, dist_q),
        ("matched gaussians", st.gaussian(0, 1), st.gaussian(0, 1)),
        ("shifted gaussians", st.gaussian(0, 1), st.gaussian(2, 1)),
    ]
    _, rows = st.run_limit_comparison(configs, n=5000, trials=10, seed=2)
    for name, emp, limit, delta in rows:
        print(f"  {name:20s} empirical={emp:.4f} limit={limit:.4f} |delta|={delta:.4f}")


if __name__ == "__main__":
    expectation_peak()
    pinned_point()
    large_n_limit()
