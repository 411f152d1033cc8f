"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line, collected in the terminal summary.
Tolerances and sample sizes are the stated ones; dataset seeds are fixed up
front.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from mixtest.errors import ImproperPosteriorError
from mixtest.experiments import pima_dataset
from mixtest.glm import Case, Link, fit_glm_mle, rescale_ratio, run_logit_probit, run_regression_gibbs, \
    simulate_binary_regression, simulate_regression_design
from mixtest.mixture import ComponentBinding, Dataset, Fixed, Flat, MixtureSpec, Slot, WeightPrior
from mixtest.distributions import Family
from mixtest.oracles import (
    bf_normal_laplace, bf_normal_var, bf_poisson_geometric, exhaustive_alpha_posterior,
    laplace_marginal_flat_prior, log_marginal_geometric, log_marginal_normal_flat, log_marginal_poisson,
    quadrature_marginal,
)
from mixtest.pairs import GaussianProposal, build_pair, pair_alpha, run_pair
from mixtest.samplers import Conditional, ChainConfig, MixedAlpha, crossing_count, run_gibbs, run_mh, summarize
from mixtest.survival import propriety_check, run_survival_test, simulate_survival_cohort

SQ2 = math.sqrt(2.0)


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# ------------------------------------------------------------------ 1


def _normal_loglik(x, var):
    """Normal log-likelihood in the mean, from sufficient statistics."""
    n, sx, sxx = x.size, float(x.sum()), float(x @ x)
    const = -0.5 * n * math.log(2 * math.pi * var)
    return lambda t: const - (sxx - 2 * t * sx + n * t * t) / (2 * var)


def test_criterion_01_oracle_equivalence(acceptance_report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = {}

    def check(name, closed, ref):
        worst[name] = max(worst.get(name, 0.0), _rel(closed, ref))

    for _ in range(20):
        x = rng.poisson(rng.uniform(0.5, 8), size=int(rng.integers(1, 60)))
        if x.sum() == 0:
            x[0] = 1
        lp = -float(np.sum([math.lgamma(v + 1) for v in x])) + quadrature_marginal(
            lambda l: (x.sum() - 1) * math.log(l) - x.size * l, (0, np.inf))
        lg = quadrature_marginal(
            lambda l: (x.sum() - 1) * math.log(l) - (x.size + x.sum()) * math.log1p(l), (0, np.inf))
        check("poisson-geometric", bf_poisson_geometric(x).log_bf, lp - lg)
        check("poisson marginal", log_marginal_poisson(x), lp)
        check("geometric marginal", log_marginal_geometric(x), lg)

    for _ in range(20):
        x = rng.normal(rng.uniform(-3, 3), rng.uniform(0.5, 2), size=int(rng.integers(2, 60)))
        m1 = quadrature_marginal(_normal_loglik(x, 1.0))
        m2 = quadrature_marginal(_normal_loglik(x, 2.0))
        check("normal-variance", bf_normal_var(x).log_bf, m1 - m2)
        check("normal marginal", log_marginal_normal_flat(x), m1)

    for _ in range(20):
        x = rng.normal(rng.uniform(-3, 3), 1.0, size=int(rng.integers(2, 40)))
        lap = quadrature_marginal(lambda m: -float(np.abs(x - m).sum()) / SQ2, points=x)
        check("laplace marginal", laplace_marginal_flat_prior(x), lap)
        m1 = quadrature_marginal(_normal_loglik(x, 1.0))
        check("normal-laplace", bf_normal_laplace(x).log_bf, m1 - (lap - x.size * math.log(2 * SQ2)))

    elapsed = time.perf_counter() - t0
    ok = all(v <= 1e-6 for v in worst.values()) and elapsed < 30
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    acceptance_report(1, ok, f"max relative error: {detail}; {elapsed:.1f}s (< 30s)")
    assert ok


# ------------------------------------------------------------------ 2


def test_criterion_02_exhaustive_allocation(acceptance_report):
    t0 = time.perf_counter()
    cases = [
        ("point-null", [0.5, 1.5, -0.2]),
        ("normal-variance", [0.3, -1.2, 2.5, 0.7]),
        ("poisson-geometric", [2, 0, 5, 1, 3]),
    ]
    results = []
    for kind, x in cases:
        post = exhaustive_alpha_posterior(kind, x, 0.5)
        data = Dataset(np.asarray(x, dtype=float))
        for sampler in ("mh", "gibbs"):
            cfg = ChainConfig(20_000, seed=2)
            trace = run_pair(kind, data, 0.5, cfg, sampler)
            results.append((kind, sampler, post.total_variation(trace.weights[:, 0])))
    elapsed = time.perf_counter() - t0
    worst = max(r[2] for r in results)
    ok = worst < 0.05 and elapsed < 60
    detail = ", ".join(f"{k}/{s} {tv:.3f}" for k, s, tv in results)
    acceptance_report(2, ok, f"total variation {detail}; {elapsed:.1f}s (< 60s)")
    assert ok


# ------------------------------------------------------------------ 3


def test_criterion_03_poisson_geometric_convergence(acceptance_report):
    t0 = time.perf_counter()
    above = below = 0
    for r in range(20):
        rng = np.random.default_rng([3, 0, r])
        data = Dataset(rng.poisson(4.0, 1000).astype(float))
        above += summarize(run_pair("poisson-geometric", data, 0.5, ChainConfig(10_000, seed=r))).alpha_median > 0.9
        rng = np.random.default_rng([3, 1, r])
        data = Dataset(rng.geometric(0.1, 500).astype(float) - 1)
        below += summarize(run_pair("poisson-geometric", data, 0.5, ChainConfig(10_000, seed=r))).alpha_median < 0.1
    elapsed = time.perf_counter() - t0
    ok = above >= 18 and below >= 18 and elapsed < 300
    acceptance_report(3, ok, f"Poisson medians > 0.9: {above}/20; geometric medians < 0.1: {below}/20; "
                             f"{elapsed:.1f}s (< 300s)")
    assert ok


# ------------------------------------------------------------------ 4


def test_criterion_04_laplace_non_concentration(acceptance_report):
    t0 = time.perf_counter()
    medians = []
    for r in range(20):
        data = Dataset(np.random.default_rng([4, r]).normal(0.0, 0.7, 1000))
        medians.append(summarize(run_pair("normal-laplace", data, 0.5, ChainConfig(10_000, seed=r))).alpha_median)
    elapsed = time.perf_counter() - t0
    inside = sum(0.05 < m < 0.7 for m in medians)
    ok = inside == 20
    acceptance_report(4, ok, f"medians in (0.05, 0.7): {inside}/20, range [{min(medians):.3f}, "
                             f"{max(medians):.3f}]; {elapsed:.1f}s")
    assert ok


# ------------------------------------------------------------------ 5

PIMA_TARGETS = {0.1: (0.352, -4.06, 0.103, -2.51, 0.064), 0.5: (0.449, -4.05, 0.103, -2.51, 0.064)}


def test_criterion_05_pima(acceptance_report):
    t0 = time.perf_counter()
    data = pima_dataset()
    f1, f2 = fit_glm_mle(data, Link.LOGIT), fit_glm_mle(data, Link.PROBIT)
    k = rescale_ratio(f1, f2)
    checks = [
        np.all(np.abs(f1.coefficients - [-4.11, 0.10]) <= 0.01),
        np.all(np.abs(f2.coefficients - [-2.54, 0.065]) <= 0.005),
        np.all(np.abs(k - [1.616, 1.617]) <= 0.01),
    ]
    parts = [f"logit MLE {np.round(f1.coefficients, 4)}", f"probit MLE {np.round(f2.coefficients, 4)}",
             f"k {np.round(k, 4)}"]
    for a0, (alpha, t0_, t1_, p0, p1) in PIMA_TARGETS.items():
        cfg = ChainConfig(50_000, seed=5, alpha_proposal=MixedAlpha(step=1.0, prior_prob=0.5),
                          record_allocations=False)
        trace, kk = run_logit_probit(data, a0, cfg)
        med_a = float(np.median(trace.weights[:, 0]))
        th = np.median(trace.globals, axis=0)
        checks.append(abs(med_a - alpha) <= 0.07)
        checks.append(np.all(np.abs(np.array([th[0], th[1], th[0] / kk[0], th[1] / kk[1]])
                                    - [t0_, t1_, p0, p1]) <= 0.15))
        parts.append(f"a0={a0}: alpha {med_a:.3f} (target {alpha}), theta {np.round(th, 3)}")
    elapsed = time.perf_counter() - t0
    ok = all(checks) and elapsed < 180
    acceptance_report(5, ok, "; ".join(parts) + f"; {elapsed:.1f}s (< 180s)")
    assert ok


# ------------------------------------------------------------------ 6


def test_criterion_06_logit_probit_consistency(acceptance_report):
    t0 = time.perf_counter()
    logit = simulate_binary_regression(10_000, (5.0, 1.5), Link.LOGIT, np.random.default_rng(0))
    probit = simulate_binary_regression(10_000, (3.5, 0.8), Link.PROBIT, np.random.default_rng(0))
    cfg = ChainConfig(20_000, seed=0, record_allocations=False)
    m_logit = float(np.median(run_logit_probit(logit, 0.1, cfg)[0].weights[:, 0]))
    m_probit = float(np.median(run_logit_probit(probit, 0.1, cfg)[0].weights[:, 0]))
    elapsed = time.perf_counter() - t0
    ok = m_logit >= 0.99 and m_probit <= 0.05 and elapsed < 600
    acceptance_report(6, ok, f"logit data alpha median {m_logit:.4f} (>= 0.99); probit data "
                             f"{m_probit:.4f} (<= 0.05); {elapsed:.1f}s (< 600s)")
    assert ok


# ------------------------------------------------------------------ 7

SELECTION_TARGETS = {(Case.SHARED_BETA, 0.1): (0.9836, 0.05), (Case.SHARED_BETA, 0.5): (0.5190, 0.15),
          (Case.SEPARATE_BETA, 0.1): (0.9611, 0.05), (Case.SEPARATE_BETA, 0.5): (0.3905, 0.2)}


def test_criterion_07_variable_selection(acceptance_report):
    t0 = time.perf_counter()
    means = {key: [] for key in SELECTION_TARGETS}
    for seed in range(10):
        data = simulate_regression_design(30, np.random.default_rng([7, seed]))
        for case, a0 in SELECTION_TARGETS:
            trace = run_regression_gibbs(data, a0, case, ChainConfig(10_000, seed=seed))
            means[(case, a0)].append(float(trace.weights[:, 2].mean()))
    elapsed = time.perf_counter() - t0
    checks, parts = [], []
    for (case, a0), (target, tol) in SELECTION_TARGETS.items():
        m = float(np.mean(means[(case, a0)]))
        checks.append(abs(m - target) <= tol)
        parts.append(f"{case.value} a0={a0}: {m:.4f} (target {target} +/- {tol})")
    ok = all(checks) and elapsed < 600
    acceptance_report(7, ok, "; ".join(parts) + f"; {elapsed:.1f}s (< 600s)")
    assert ok


# ------------------------------------------------------------------ 8


def test_criterion_08_survival_selection(acceptance_report):
    t0 = time.perf_counter()
    families = ("normal", "gumbel", "logistic")
    wins, big = [], []
    for idx, fam in enumerate(families):
        data = simulate_survival_cohort(1000, fam, np.random.default_rng(0))
        _, s = run_survival_test(data, 1.0, ChainConfig(10_000, seed=0, record_allocations=False))
        wins.append(int(np.argmax(s.median[:3])) == idx)
        data = simulate_survival_cohort(10_000, fam, np.random.default_rng(0))
        _, s = run_survival_test(data, 1.0, ChainConfig(10_000, seed=0, record_allocations=False))
        big.append(float(s.median[idx]))
    elapsed = time.perf_counter() - t0
    ok = all(wins) and all(m > 0.9 for m in big) and elapsed < 900
    acceptance_report(8, ok, f"n=1000 true weight largest: {wins}; n=10^4 true-weight medians "
                             f"{[round(m, 3) for m in big]} (> 0.90); {elapsed:.1f}s (< 900s)")
    assert ok


# ------------------------------------------------------------------ 9

# five cheap weight moves per sweep against one allocation sweep for Gibbs
MH_TUNED = ChainConfig(10_000, record_allocations=False, alpha_proposal=MixedAlpha(1.0, 0.5), alpha_substeps=5)


def test_criterion_09_mixing(acceptance_report):
    t0 = time.perf_counter()
    counts = {}
    for n in (100, 500, 1000):
        hits = 0
        for seed in range(10):
            data = Dataset(np.random.default_rng([9, n, seed]).standard_normal(n))
            cfg = ChainConfig(10_000, seed=seed, record_allocations=False)
            mh = crossing_count(run_pair("normal-variance", data, 0.5, MH_TUNED.with_seed(seed), "mh").weights[:, 0])
            gibbs = crossing_count(run_pair("normal-variance", data, 0.5, cfg, "gibbs").weights[:, 0])
            hits += mh >= gibbs
        counts[n] = hits
    elapsed = time.perf_counter() - t0
    ok = all(v >= 9 for v in counts.values())
    acceptance_report(9, ok, f"seeds with MH crossings >= Gibbs crossings: {counts} (>= 9/10 each); "
                             f"{elapsed:.1f}s")
    assert ok


# ------------------------------------------------------------------ 10


def test_criterion_10_property_suite(acceptance_report):
    t0 = time.perf_counter()
    checks = {}

    # prior recovery at n = 0
    comps = (ComponentBinding(Family.NORMAL, (Slot(0), Fixed(1.0))),
             ComponentBinding(Family.NORMAL, (Slot(0), Fixed(1.0))))
    spec = MixtureSpec(comps, WeightPrior.symmetric(1.0, 2), (Flat((0,)),), ("theta",), (0.0,))
    keep = Conditional((0,), lambda g, labels, d, rng: g)
    g_trace = run_gibbs(spec, Dataset(np.zeros(0)), ChainConfig(100_000, burn_in=0, seed=10), [keep])
    ks_gibbs = stats.kstest(g_trace.alpha, "uniform").statistic
    pn = build_pair("point-null", 0.5)
    m_trace = run_mh(pn, Dataset(np.zeros(0)), ChainConfig(101_000, burn_in=1000, seed=10),
                     [None, GaussianProposal((0,), [0.0], [[1.0]])])
    ks_mh = stats.kstest(m_trace.alpha, stats.beta(0.5, 0.5).cdf).statistic
    checks["prior recovery"] = ks_gibbs < 0.02 and ks_mh < 0.02

    # simplex and quantile invariants on a real run
    data = Dataset(np.random.default_rng(10).poisson(3.0, 200).astype(float))
    traces = [run_pair("poisson-geometric", data, 0.5, ChainConfig(3000, seed=1), s) for s in ("mh", "gibbs")]
    simplex = all(np.all(t.weights >= 0) and np.allclose(t.weights.sum(axis=1), 1, atol=1e-12) for t in traces)
    ordered = True
    for t in traces:
        s = summarize(t)
        q = np.array([s.quantiles[k] for k in sorted(s.quantiles)])
        ordered &= bool(np.all(np.diff(q, axis=0) >= 0))
    checks["simplex"] = simplex
    checks["quantiles ordered"] = ordered

    # determinism
    again = run_pair("poisson-geometric", data, 0.5, ChainConfig(3000, seed=1), "mh")
    checks["determinism"] = again.to_csv() == traces[0].to_csv()

    # propriety guard
    try:
        run_survival_test(Dataset(np.full(10, 0.3)), 1.0, ChainConfig(10))
        guarded = False
    except ImproperPosteriorError:
        guarded = True
    checks["propriety guard"] = guarded and not propriety_check(Dataset(np.full(10, 0.3)))

    elapsed = time.perf_counter() - t0
    ok = all(checks.values()) and elapsed < 120
    detail = ", ".join(f"{k} {'ok' if v else 'FAILED'}" for k, v in checks.items())
    acceptance_report(10, ok, f"{detail}; KS gibbs {ks_gibbs:.4f}, mh {ks_mh:.4f}; {elapsed:.1f}s (< 120s)")
    assert ok
