"""Normal / Gumbel / Logistic mixture on the log-time scale with censoring.

Observations are ``y = -log(t)`` for survival times ``t``.  All three
components share a location ``phi`` and a variance ``sigma2`` through moment
matching, the weights get a symmetric Dirichlet prior, and the globals get
``pi(phi, sigma2) = 1 / sigma2``.

A censored time ``t_obs < T`` maps to ``y_obs > Y``.  Its factor under each
component is therefore the component CDF at ``y_obs``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, optimize, special

from . import distributions as dist
from .distributions import Family
from .errors import ContractError, ImproperPosteriorError, ParameterDomainError
from .mixture import (ComponentBinding, Dataset, Flat, Jeffreys, MixtureSpec, MomentMatched,
                      WeightPrior, check_weights)
from .samplers import ChainConfig, Conditional, PosteriorSummary, Trace, run_gibbs, summarize

SURVIVAL_FAMILIES = (Family.NORMAL, Family.GUMBEL, Family.LOGISTIC)
SLOT_NAMES = ("phi", "sigma2")


def build_survival_mixture(a0: float = 1.0, initial=(0.0, 1.0)) -> MixtureSpec:
    """Three-component moment-matched mixture over ``(phi, sigma2)``."""
    if not a0 > 0:
        raise ParameterDomainError(f"a0 must be > 0, got {a0}")
    comps = tuple(ComponentBinding(f, (MomentMatched(f, 0, 1),)) for f in SURVIVAL_FAMILIES)
    return MixtureSpec(comps, WeightPrior.symmetric(a0, 3), (Flat((0,)), Jeffreys(1)),
                       SLOT_NAMES, tuple(initial), "survival")


def survival_mixture_log_density(weights, phi: float, sigma2: float, y, censored=False):
    """Log of the censored three-term mixture at ``y``.

    Scalars in, float out; arrays broadcast elementwise.
    """
    if not sigma2 > 0:
        raise ParameterDomainError("sigma2 must be > 0")
    w = check_weights(weights, 3)
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    c_arr = np.broadcast_to(np.asarray(censored, dtype=bool), y_arr.shape)
    terms = []
    for j, fam in enumerate(SURVIVAL_FAMILIES):
        loc, scale = dist.moment_matched_params(fam, phi, sigma2)
        comp = dist.censored_log_density(fam, (loc, scale), y_arr, c_arr)
        with np.errstate(divide="ignore"):
            terms.append(np.log(w[j]) + comp)
    out = special.logsumexp(np.vstack(terms), axis=0)
    return float(out[0]) if np.ndim(y) == 0 else out


def propriety_check(data: Dataset) -> bool:
    """Whether the ``1/sigma2`` posterior is proper for these observations.

    Needs at least two uncensored responses that are not all equal.
    """
    y = np.asarray(data.y, dtype=float)
    if data.censored is not None:
        y = y[~np.asarray(data.censored, dtype=bool)]
    return y.size >= 2 and bool(np.ptp(y) > 0)


def _require_proper(data: Dataset) -> None:
    if not propriety_check(data):
        raise ImproperPosteriorError(
            "posterior is improper: need at least two distinct uncensored observations")


# ----------------------------------------------------------- conditionals


def _log_target(g, labels, data: Dataset, spec: MixtureSpec) -> float:
    """``log pi(phi, sigma2) + sum_i log f_{z_i}(y_i | phi, sigma2)``."""
    if not g[1] > 0:
        return -math.inf
    total = spec.log_prior(g)
    for j, comp in enumerate(spec.components):
        sel = labels == j
        if sel.any():
            total += float(np.sum(comp.log_pdf(g, data.subset(sel))))
    return float(total) if np.isfinite(total) else -math.inf


def _nig_fit(y):
    """Posterior of ``(phi, sigma2)`` for normal data under ``1/sigma2``."""
    m = y.size
    ybar = float(y.mean())
    ss = float(((y - ybar) ** 2).sum())
    return m, ybar, ss


def _nig_log_pdf(phi, s2, m, ybar, ss):
    shape, rate = 0.5 * (m - 1), 0.5 * ss
    log_ig = shape * math.log(rate) - special.gammaln(shape) - (shape + 1) * math.log(s2) - rate / s2
    log_n = -0.5 * math.log(2 * math.pi * s2 / m) - 0.5 * m * (phi - ybar) ** 2 / s2
    return log_ig + log_n


def _nig_draw(m, ybar, ss, rng):
    s2 = 0.5 * ss / rng.standard_gamma(0.5 * (m - 1))
    return np.array([ybar + math.sqrt(s2 / m) * rng.standard_normal(), s2])


def location_scale_conditional(data: Dataset, spec: MixtureSpec, rw_scale: float = 1.0) -> Conditional:
    """Metropolis-within-Gibbs update of ``(phi, sigma2)`` given the labels.

    First an independence move from the normal-inverse-gamma fit to the
    uncensored points currently in the Normal component, when there are at
    least two distinct ones.  Then a Gaussian random-walk move on
    ``(phi, log sigma2)``, which also covers the case where that fit is
    unavailable.
    """
    n_total = max(data.n, 1)
    unc = np.ones(data.n, bool) if data.censored is None else ~np.asarray(data.censored, bool)

    def update(g, labels, data_, rng):
        g = np.array(g, dtype=float)
        cur = _log_target(g, labels, data_, spec)
        yn = data_.y[(labels == 0) & unc]
        if yn.size >= 2 and np.ptp(yn) > 0:
            m, ybar, ss = _nig_fit(yn)
            prop = _nig_draw(m, ybar, ss, rng)
            new = _log_target(prop, labels, data_, spec)
            log_r = (new - _nig_log_pdf(*prop, m, ybar, ss)) - (cur - _nig_log_pdf(*g, m, ybar, ss))
            if np.isfinite(new) and (not np.isfinite(cur) or math.log(rng.random()) < log_r):
                g, cur = prop, new
        step = rw_scale * 2.4 / math.sqrt(2 * n_total)
        prop = np.array([g[0] + step * math.sqrt(g[1]) * rng.standard_normal(),
                         g[1] * math.exp(2 * step * rng.standard_normal())])
        new = _log_target(prop, labels, data_, spec)
        # log-scale move on sigma2 carries the Jacobian sigma2'/sigma2
        log_r = new - cur + math.log(prop[1] / g[1])
        if np.isfinite(new) and (not np.isfinite(cur) or math.log(rng.random()) < log_r):
            g = prop
        return g

    return Conditional((0, 1), update)


def run_survival_test(data: Dataset, a0: float = 1.0,
                      config: ChainConfig | None = None) -> tuple[Trace, PosteriorSummary]:
    """Gibbs run over the weights, ``phi`` and ``sigma2``.

    Raises
    ------
    ImproperPosteriorError
        When :func:`propriety_check` fails.
    """
    _require_proper(data)
    config = ChainConfig() if config is None else config
    unc = np.ones(data.n, bool) if data.censored is None else ~np.asarray(data.censored, bool)
    y0 = data.y[unc]
    spec = build_survival_mixture(a0, (float(y0.mean()), float(y0.var())))
    trace = run_gibbs(spec, data, config, [location_scale_conditional(data, spec)])
    return trace, summarize(trace)


# ------------------------------------------------------------- simulation


def _censoring_shift(family: Family, location: float, variance: float, rate: float) -> float:
    """Offset ``s`` such that ``P(V > Y) = rate`` for ``V ~ N(location + s, variance)``."""
    loc, scale = dist.moment_matched_params(family, location, variance)
    sd = math.sqrt(variance)

    def prob(s):
        f = lambda y: math.exp(dist.log_density(family, (loc, scale), y)) * special.ndtr(
            (location + s - y) / sd)
        return integrate.quad(f, -np.inf, np.inf, epsabs=1e-12)[0] - rate

    lo, hi = -20.0 * sd, 20.0 * sd
    return float(optimize.brentq(prob, lo, hi, xtol=1e-10))


def simulate_survival_cohort(n: int, family, rng, censor_rate: float = 0.0,
                             location: float = 0.0, variance: float = 1.0) -> Dataset:
    """Log-scale responses from one moment-matched family with censoring.

    Latent ``Y`` comes from ``family``.  A censoring variable
    ``V ~ N(location + s, variance)`` is shifted so that a fraction
    ``censor_rate`` of points is censored in expectation.  The observation is
    ``max(Y, V)`` with ``censored = V > Y``.
    """
    family = Family(family) if not isinstance(family, Family) else family
    if family not in SURVIVAL_FAMILIES:
        raise ParameterDomainError(f"cohort family must be one of normal, gumbel, logistic")
    if n < 0:
        raise ContractError("n must be nonnegative")
    if not 0.0 <= censor_rate < 1.0:
        raise ParameterDomainError("censor_rate must lie in [0, 1)")
    loc, scale = dist.moment_matched_params(family, location, variance)
    y = dist.sample(family, (loc, scale), n, rng)
    if censor_rate == 0.0:
        return Dataset(y, censored=np.zeros(n, bool))
    s = _censoring_shift(family, location, variance, censor_rate)
    v = location + s + math.sqrt(variance) * rng.standard_normal(n)
    cens = v > y
    return Dataset(np.where(cens, v, y), censored=cens)


def from_times(times, censored=None) -> Dataset:
    """Dataset on the ``y = -log(t)`` scale from positive survival times."""
    t = np.asarray(times, dtype=float)
    if np.any(~(t > 0)):
        raise ParameterDomainError("survival times must be > 0")
    c = None if censored is None else np.asarray(censored, dtype=bool)
    return Dataset(-np.log(t), censored=c)


__all__ = [
    "SURVIVAL_FAMILIES", "build_survival_mixture", "from_times", "location_scale_conditional",
    "propriety_check", "run_survival_test", "simulate_survival_cohort",
    "survival_mixture_log_density",
]
