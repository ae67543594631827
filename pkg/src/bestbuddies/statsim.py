"""Monte-Carlo and quadrature machinery for the statistical behaviour of the
mutual-nearest-neighbor score on 1-D point sets.

Implements, for point sets sampled i.i.d. from 1-D densities ``f_P`` and
``f_Q`` with distance ``|p - q|``:

* the empirical expected score over repeated sampled trials,
* an independent integral estimator of the probability that a fixed pair is
  mutually nearest (via analytic CDFs), with the expected score recovered as
  ``N_P * N_Q / min(N_P, N_Q)`` times that probability,
* closed forms for the expected SSD and SAD between such sets,
* the pointwise probability that a pinned point has a mutual nearest
  neighbor, both analytic (``f_Q / (f_P + f_Q)``) and empirical,
* the chi-square distance between the densities by composite Simpson
  quadrature, and the implied large-N limit ``1/2 - chi2/4`` of the
  expected score.

All randomness goes through numpy's ``default_rng`` (PCG64); every result is
deterministic given (seed, config). Trials are independent, so callers may
shard them across processes with per-trial child seeds if they wish.

RNG_ALGORITHM names the generator for output metadata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.special import erf

RNG_ALGORITHM = "numpy-PCG64"


@dataclass(frozen=True)
class Distribution1D:
    """Gaussian mixture on the working support [-M, M].

    ``components`` is a tuple of (weight, mean, sigma); weights must sum to
    1 and every sigma must be positive, which keeps the density strictly
    positive everywhere (the convergence analysis requires it).
    """

    components: tuple[tuple[float, float, float], ...]
    support: float = 20.0

    def __post_init__(self):
        comps = tuple((float(w), float(mu), float(s)) for w, mu, s in self.components)
        if not comps:
            raise ValueError("distribution needs at least one component")
        if abs(sum(w for w, _, _ in comps) - 1.0) > 1e-9:
            raise ValueError("mixture weights must sum to 1")
        if any(s <= 0 for _, _, s in comps):
            raise ValueError("sigma must be positive")
        if self.support <= 0:
            raise ValueError("support bound must be positive")
        object.__setattr__(self, "components", comps)

    def pdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        for w, mu, s in self.components:
            z = (x - mu) / s
            out += w * np.exp(-0.5 * z * z) / (s * math.sqrt(2.0 * math.pi))
        return out

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        for w, mu, s in self.components:
            out += w * 0.5 * (1.0 + erf((x - mu) / (s * math.sqrt(2.0))))
        return out

    def sample(self, rng: np.random.Generator, size: int | tuple) -> np.ndarray:
        n = int(np.prod(size))
        weights = np.array([w for w, _, _ in self.components])
        means = np.array([mu for _, mu, _ in self.components])
        sigmas = np.array([s for _, _, s in self.components])
        which = rng.choice(len(weights), size=n, p=weights)
        vals = rng.standard_normal(n) * sigmas[which] + means[which]
        return vals.reshape(size)


def gaussian(mu: float, sigma: float, support: float = 20.0) -> Distribution1D:
    return Distribution1D(((1.0, mu, sigma),), support)


def mixture(components, support: float = 20.0) -> Distribution1D:
    return Distribution1D(tuple(components), support)


def fig_mixtures(support: float = 20.0) -> tuple[Distribution1D, Distribution1D]:
    """The two-Gaussian mixtures used in the convergence experiments.

    Both share a 'foreground' component at mean -5; the 'background'
    components sit at 0 and 5. Weights 0.5/0.5 and unit sigmas.
    """
    p = mixture([(0.5, -5.0, 1.0), (0.5, 0.0, 1.0)], support)
    q = mixture([(0.5, -5.0, 1.0), (0.5, 5.0, 1.0)], support)
    return p, q


@dataclass(frozen=True)
class SimConfig:
    dist_p: Distribution1D
    dist_q: Distribution1D
    n: int = 100
    trials: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("set size must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


def mutual_nn_fraction_1d(p: np.ndarray, q: np.ndarray) -> float:
    """Fraction of mutual nearest neighbors between two 1-D samples.

    O(N log N) via sorting; with continuous samples ties have probability
    zero, so the result matches the generic distance-matrix route.
    """
    p = np.sort(np.asarray(p, dtype=np.float64))
    q = np.sort(np.asarray(q, dtype=np.float64))
    nn_pq = _nearest_in_sorted(q, p)
    nn_qp = _nearest_in_sorted(p, q)
    idx = np.arange(len(p))
    mutual = nn_qp[nn_pq] == idx
    return int(np.count_nonzero(mutual)) / min(len(p), len(q))


def _nearest_in_sorted(sorted_ref: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Index in ``sorted_ref`` of the nearest value to each query point."""
    pos = np.searchsorted(sorted_ref, query)
    left = np.clip(pos - 1, 0, len(sorted_ref) - 1)
    right = np.clip(pos, 0, len(sorted_ref) - 1)
    choose_right = np.abs(sorted_ref[right] - query) < np.abs(query - sorted_ref[left])
    return np.where(choose_right, right, left)


def mutual_nn_fraction_nd(x: np.ndarray, y: np.ndarray) -> float:
    """Mutual-nearest fraction for (N, d) samples; brute-force distances."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    d2 = ((x[:, None, :] - y[None, :, :]) ** 2).sum(axis=-1)
    nn_xy = np.argmin(d2, axis=1)
    nn_yx = np.argmin(d2, axis=0)
    mutual = nn_yx[nn_xy] == np.arange(x.shape[0])
    return int(np.count_nonzero(mutual)) / min(x.shape[0], y.shape[0])


def empirical_ebbs(cfg: SimConfig, return_stderr: bool = False):
    """Mean mutual-nearest score over sampled trials (deterministic per seed)."""
    rng = np.random.default_rng(cfg.seed)
    vals = np.empty(cfg.trials)
    for t in range(cfg.trials):
        p = cfg.dist_p.sample(rng, cfg.n)
        q = cfg.dist_q.sample(rng, cfg.n)
        vals[t] = mutual_nn_fraction_1d(p, q)
    mean = float(vals.mean())
    if return_stderr:
        se = float(vals.std(ddof=1) / math.sqrt(cfg.trials)) if cfg.trials > 1 else 0.0
        return mean, se
    return mean


def integral_ebbp(cfg: SimConfig, samples: int, return_stderr: bool = False):
    """Monte-Carlo estimate of the probability that a fixed pair is mutual.

    Samples (p, q) from f_P x f_Q and averages
    ``(F_Q(p-) + 1 - F_Q(p+))^(N-1) * (F_P(q-) + 1 - F_P(q+))^(N-1)``
    with the CDFs evaluated analytically; p-+/q-+ are the points at distance
    |p - q| on either side. The expected set score is ``ebbs_scale(cfg)``
    times this value.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(cfg.seed)
    p = cfg.dist_p.sample(rng, samples)
    q = cfg.dist_q.sample(rng, samples)
    d = np.abs(p - q)
    term_q = cfg.dist_q.cdf(p - d) + 1.0 - cfg.dist_q.cdf(p + d)
    term_p = cfg.dist_p.cdf(q - d) + 1.0 - cfg.dist_p.cdf(q + d)
    integrand = term_q ** (cfg.n - 1) * term_p ** (cfg.n - 1)
    mean = float(integrand.mean())
    if return_stderr:
        se = float(integrand.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
        return mean, se
    return mean


def ebbs_scale(cfg: SimConfig) -> float:
    """N_P * N_Q / min(N_P, N_Q) — converts pair probability to set score."""
    return cfg.n * cfg.n / min(cfg.n, cfg.n)


def integral_ebbs(cfg: SimConfig, samples: int) -> float:
    """Expected set score via the integral estimator."""
    return ebbs_scale(cfg) * integral_ebbp(cfg, samples)


def expected_ssd(mu: float, sigma: float) -> float:
    """Closed-form E[SSD] per pair for P ~ N(0,1), Q ~ N(mu, sigma)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return 1.0 + mu * mu + sigma * sigma


def expected_sad(mu: float, sigma: float) -> float:
    """Closed-form E[SAD] per pair: the folded-normal mean of p - q.

    p - q ~ N(-mu, 1 + sigma^2); E|p - q| is the folded-normal mean
    ``s*sqrt(2/pi)*exp(-mu^2/(2 s^2)) + mu*(1 - 2*Phi(-mu/s))`` with
    ``s = sqrt(1 + sigma^2)``.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    s = math.sqrt(1.0 + sigma * sigma)
    phi = 0.5 * (1.0 + math.erf((-mu / s) / math.sqrt(2.0)))
    return s * math.sqrt(2.0 / math.pi) * math.exp(-mu * mu / (2.0 * s * s)) + mu * (
        1.0 - 2.0 * phi
    )


def lemma1_analytic(dist_p: Distribution1D, dist_q: Distribution1D, p: float) -> float:
    """Limit probability that a point pinned at p has a mutual neighbor:
    ``f_Q(p) / (f_P(p) + f_Q(p))``."""
    fp = float(dist_p.pdf(p))
    fq = float(dist_q.pdf(p))
    total = fp + fq
    if total <= 0:
        raise ValueError(f"zero total density at p={p}")
    return fq / total


def lemma1_empirical(
    dist_p: Distribution1D,
    dist_q: Distribution1D,
    p: float,
    n: int,
    trials: int,
    seed: int = 0,
    chunk: int = 256,
) -> float:
    """Fraction of trials in which a point pinned at p has a mutual neighbor.

    Each trial samples the remaining n-1 points of the first set and n
    points of the second; the pinned point has a mutual neighbor iff its
    nearest second-set point q* is closer to it than to every other
    first-set point.
    """
    if n < 1 or trials < 1:
        raise ValueError("n and trials must be >= 1")
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        q = dist_q.sample(rng, (m, n))
        dq = np.abs(q - p)
        jstar = np.argmin(dq, axis=1)
        qstar = q[np.arange(m), jstar]
        d_pq = dq[np.arange(m), jstar]
        if n > 1:
            rest = dist_p.sample(rng, (m, n - 1))
            d_rest = np.abs(rest - qstar[:, None]).min(axis=1)
            hits += int(np.count_nonzero(d_rest > d_pq))
        else:
            hits += m
        done += m
    return hits / trials


def _quadrature_grid(dist_p: Distribution1D, dist_q: Distribution1D, step: float | None):
    M = min(dist_p.support, dist_q.support)
    if step is None:
        step = M / 2000.0
    if step <= 0:
        raise ValueError("quadrature step must be positive")
    n_intervals = int(math.ceil(2.0 * M / step))
    if n_intervals % 2:
        n_intervals += 1
    return np.linspace(-M, M, n_intervals + 1)


def chi_square(
    dist_p: Distribution1D, dist_q: Distribution1D, quadrature_step: float | None = None
) -> float:
    """Chi-square distance between the two densities on their joint support,
    ``integral (f_P - f_Q)^2 / (f_P + f_Q)``, by composite Simpson."""
    x = _quadrature_grid(dist_p, dist_q, quadrature_step)
    fp, fq = dist_p.pdf(x), dist_q.pdf(x)
    total = fp + fq
    integrand = np.where(total > 0, (fp - fq) ** 2 / np.where(total > 0, total, 1.0), 0.0)
    if not np.isfinite(integrand).all():
        raise ValueError("non-finite chi-square integrand")
    return float(simpson(integrand, x=x))


def overlap_integral(
    dist_p: Distribution1D, dist_q: Distribution1D, quadrature_step: float | None = None
) -> float:
    """``integral f_P f_Q / (f_P + f_Q)`` — the direct form of the limit."""
    x = _quadrature_grid(dist_p, dist_q, quadrature_step)
    fp, fq = dist_p.pdf(x), dist_q.pdf(x)
    total = fp + fq
    integrand = np.where(total > 0, fp * fq / np.where(total > 0, total, 1.0), 0.0)
    return float(simpson(integrand, x=x))


def theorem1_limit(
    dist_p: Distribution1D, dist_q: Distribution1D, quadrature_step: float | None = None
) -> float:
    """Large-N limit of the expected score: ``1/2 - chi2/4``.

    Equals :func:`overlap_integral` up to quadrature error; both identities
    follow from ``4 f g = (f + g)^2 - (f - g)^2``.
    """
    return 0.5 - 0.25 * chi_square(dist_p, dist_q, quadrature_step)


# ---------------------------------------------------------------------------
# Experiment runners: return (header, rows) for CSV emission.


def run_expectation_grid(
    mus, sigmas, n: int = 100, samples: int = 100_000, seed: int = 0
):
    """Integral-estimator expected score over a (mu, sigma) grid, with P
    fixed at N(0, 1)."""
    header = ["mu", "sigma", "e_bbs"]
    rows = []
    for mu in mus:
        for sigma in sigmas:
            cfg = SimConfig(gaussian(0.0, 1.0), gaussian(mu, sigma), n=n, seed=seed)
            rows.append([mu, sigma, integral_ebbs(cfg, samples)])
    return header, rows


def run_lemma1_curves(p_grid, sizes, trials: int = 500, seed: int = 0):
    """Empirical vs analytic pinned-point probabilities on the standard
    mixtures, one row per (p, set size)."""
    dist_p, dist_q = fig_mixtures()
    header = ["p", "n", "empirical", "analytic"]
    rows = []
    for p in p_grid:
        analytic = lemma1_analytic(dist_p, dist_q, p)
        for n in sizes:
            emp = lemma1_empirical(dist_p, dist_q, p, n, trials, seed=seed)
            rows.append([p, n, emp, analytic])
    return header, rows


def run_limit_comparison(configs, n: int = 10_000, trials: int = 50, seed: int = 0):
    """Empirical large-N score vs the chi-square limit for mixture pairs."""
    header = ["config", "empirical", "limit", "abs_delta"]
    rows = []
    for name, dist_p, dist_q in configs:
        cfg = SimConfig(dist_p, dist_q, n=n, trials=trials, seed=seed)
        emp = empirical_ebbs(cfg)
        lim = theorem1_limit(dist_p, dist_q)
        rows.append([name, emp, lim, abs(emp - lim)])
    return header, rows


def run_ssd_sad_table(params, samples: int = 1_000_000, seed: int = 0):
    """Monte-Carlo SSD/SAD means against the closed forms."""
    header = ["mu", "sigma", "mc_ssd", "closed_ssd", "mc_sad", "closed_sad"]
    rows = []
    rng = np.random.default_rng(seed)
    for mu, sigma in params:
        p = rng.standard_normal(samples)
        q = rng.standard_normal(samples) * sigma + mu
        diff = p - q
        rows.append(
            [
                mu,
                sigma,
                float((diff * diff).mean()),
                expected_ssd(mu, sigma),
                float(np.abs(diff).mean()),
                expected_sad(mu, sigma),
            ]
        )
    return header, rows
