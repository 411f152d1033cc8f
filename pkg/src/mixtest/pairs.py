"""Ready-made two-model tests on i.i.d. data.

=================  =========================  ============================  =============
kind               component 0                component 1                   global prior
=================  =========================  ============================  =============
poisson-geometric  Poisson(lam)               Geometric(1 / (1 + lam))      1 / lam
normal-variance    N(theta, 1)                N(theta, 2)                   flat
point-null         N(0, 1)                    N(mu, 1)                      mu ~ N(0, 1)
normal-laplace     N(mu, 1)                   Laplace(mu, 1/sqrt(2))        flat
=================  =========================  ============================  =============

The Laplace scale ``1/sqrt(2)`` gives the Laplace component unit variance,
the same as its normal partner.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from . import oracles
from .distributions import Family
from .errors import ContractError, ImproperPosteriorError, ParameterDomainError
from .mixture import (
    AllocationStats,
    ComponentBinding,
    Dataset,
    Fixed,
    Flat,
    Jeffreys,
    MixtureSpec,
    NormalPrior,
    OnePlusInverse,
    Slot,
    WeightPrior,
    allocation_stats,
)
from .samplers import (BetaPrimeProposal, ChainConfig, Conditional, GammaProposal, GaussianProposal,
                       Trace, run_gibbs, run_mh)

LAPLACE_SCALE = 1.0 / math.sqrt(2.0)


class PairKind(enum.Enum):
    POISSON_GEOMETRIC = "poisson-geometric"
    NORMAL_VARIANCE = "normal-variance"
    POINT_NULL_MEAN = "point-null"
    NORMAL_LAPLACE = "normal-laplace"

    @classmethod
    def parse(cls, name) -> "PairKind":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ContractError(
                f"unknown pair {name!r}; choose from {[k.value for k in cls]}") from None

    @property
    def alpha_index(self) -> int:
        """Component whose weight is reported as ``alpha``.

        This is the model under test, N(mu, 1), for the point null and the
        first component otherwise.
        """
        return 1 if self is PairKind.POINT_NULL_MEAN else 0


def build_pair(kind, a0: float) -> MixtureSpec:
    """Encompassing two-component mixture for a named test."""
    kind = PairKind.parse(kind)
    if not a0 > 0:
        raise ParameterDomainError(f"a0 must be > 0, got {a0}")
    prior = WeightPrior.symmetric(a0, 2)
    if kind is PairKind.POISSON_GEOMETRIC:
        comps = (ComponentBinding(Family.POISSON, (Slot(0),)),
                 ComponentBinding(Family.GEOMETRIC_FAILURES, (OnePlusInverse(0),)))
        return MixtureSpec(comps, prior, (Jeffreys(0),), ("lambda",), (1.0,), kind.value)
    if kind is PairKind.NORMAL_VARIANCE:
        comps = (ComponentBinding(Family.NORMAL, (Slot(0), Fixed(1.0))),
                 ComponentBinding(Family.NORMAL, (Slot(0), Fixed(math.sqrt(2.0)))))
        return MixtureSpec(comps, prior, (Flat((0,)),), ("theta",), (0.0,), kind.value)
    if kind is PairKind.POINT_NULL_MEAN:
        comps = (ComponentBinding(Family.NORMAL, (Fixed(0.0), Fixed(1.0))),
                 ComponentBinding(Family.NORMAL, (Slot(0), Fixed(1.0))))
        return MixtureSpec(comps, prior, (NormalPrior(0, 0.0, 1.0),), ("mu",), (0.0,), kind.value)
    comps = (ComponentBinding(Family.NORMAL, (Slot(0), Fixed(1.0))),
             ComponentBinding(Family.LAPLACE, (Slot(0), Fixed(LAPLACE_SCALE))))
    return MixtureSpec(comps, prior, (Flat((0,)),), ("mu",), (0.0,), kind.value)


def pair_proposals(kind, data: Dataset) -> list:
    """Whole-sample posterior of each model, used as independence proposals."""
    kind = PairKind.parse(kind)
    x = data.y
    n = data.n
    if n == 0:
        raise ContractError("proposals need at least one observation")
    if kind is PairKind.POISSON_GEOMETRIC:
        s = float(x.sum())
        if s <= 0:
            raise ImproperPosteriorError(
                "all-zero counts: the 1/lambda posterior is not integrable")
        return [GammaProposal(0, s, float(n)), BetaPrimeProposal(0, s, float(n))]
    xbar = float(x.mean())
    if kind is PairKind.NORMAL_VARIANCE:
        return [GaussianProposal((0,), [xbar], [[1.0 / n]]),
                GaussianProposal((0,), [xbar], [[2.0 / n]])]
    if kind is PairKind.POINT_NULL_MEAN:
        return [None, GaussianProposal((0,), [n * xbar / (n + 1)], [[1.0 / (n + 1)]])]
    med = float(np.median(x))
    return [GaussianProposal((0,), [xbar], [[1.0 / n]]),
            GaussianProposal((0,), [med], [[LAPLACE_SCALE ** 2 / n]])]


def initial_globals(kind, data: Dataset) -> np.ndarray:
    """Data-based starting point for the global slot."""
    kind = PairKind.parse(kind)
    if data.n == 0:
        return np.array(build_pair(kind, 1.0).initial)
    if kind is PairKind.POISSON_GEOMETRIC:
        return np.array([max(float(data.y.mean()), 1e-3)])
    if kind is PairKind.NORMAL_LAPLACE:
        return np.array([float(np.median(data.y))])
    return np.array([float(data.y.mean())])


# ------------------------------------------------- Poisson vs geometric


def lambda_conditional_log_kernel(lam: float, stats: AllocationStats, n_xbar: float) -> float:
    """Log kernel of ``lam`` given the allocation under the ``1/lam`` prior.

    ``-n1 lam + (n xbar - 1) log lam - (n2 + s2) log(1 + lam)``
    """
    if not lam > 0:
        raise ParameterDomainError("lambda must be > 0")
    n1, n2 = float(stats.counts[0]), float(stats.counts[1])
    s2 = float(stats.sums[1])
    return -n1 * lam + (n_xbar - 1.0) * math.log(lam) - (n2 + s2) * math.log1p(lam)


def lambda_conditional_is_proper(stats: AllocationStats, n_xbar: float) -> bool:
    """The kernel integrates at 0 iff ``n xbar > 0`` and at infinity iff the
    sample is nonempty."""
    return n_xbar > 0 and stats.counts.sum() > 0


def lambda_mwg_step(current: float, stats: AllocationStats, rng) -> float:
    """Independent Metropolis-within-Gibbs update of ``lam``.

    The proposal is ``Gamma(n xbar, n)``, the whole-sample Poisson posterior.
    It coincides with the target when every observation is allocated to the
    Poisson component.
    """
    if not current > 0:
        raise ParameterDomainError("lambda must be > 0")
    n = float(stats.counts.sum())
    s = float(stats.sums.sum())
    if not lambda_conditional_is_proper(stats, s):
        raise ImproperPosteriorError("the lambda conditional is not integrable for this sample")
    n2 = float(stats.counts[1])
    s2 = float(stats.sums[1])
    prop = rng.gamma(s, 1.0 / n)
    # kernel ratio times proposal ratio; the Poisson parts cancel
    log_r = n2 * (prop - current) - (n2 + s2) * (math.log1p(prop) - math.log1p(current))
    if log_r >= 0 or math.log(rng.random()) < log_r:
        return prop
    return current


# --------------------------------------------------- normal variances


def theta_conditional_normalvar(stats, rng) -> float:
    """Draw ``theta`` given allocations for the ``N(theta,1)``/``N(theta,2)`` mixture.

    ``N((n1 xbar1 + n2 xbar2 / 2) / (n1 + n2 / 2), 1 / (n1 + n2 / 2))``.
    ``stats`` is an :class:`AllocationStats` (sums play the role of
    ``n_j xbar_j``) or a mapping with ``n1, xbar1, n2, xbar2``.
    """
    if isinstance(stats, AllocationStats):
        n1, n2 = float(stats.counts[0]), float(stats.counts[1])
        s1, s2 = float(stats.sums[0]), float(stats.sums[1])
    else:
        n1, n2 = float(stats["n1"]), float(stats["n2"])
        s1 = n1 * float(stats["xbar1"]) if n1 else 0.0
        s2 = n2 * float(stats["xbar2"]) if n2 else 0.0
    prec = n1 + 0.5 * n2
    if prec <= 0:
        raise ContractError("at least one observation is required")
    return float(rng.normal((s1 + 0.5 * s2) / prec, 1.0 / math.sqrt(prec)))


def normalvar_conditional_moments(stats: AllocationStats) -> tuple[float, float]:
    n1, n2 = float(stats.counts[0]), float(stats.counts[1])
    prec = n1 + 0.5 * n2
    if prec <= 0:
        raise ContractError("at least one observation is required")
    return (float(stats.sums[0]) + 0.5 * float(stats.sums[1])) / prec, 1.0 / prec


# ---------------------------------------------------------- conditionals


def _laplace_location_step(mu, labels, data, rng, sweeps=3):
    x0 = data.y[labels == 0]
    x1 = data.y[labels == 1]

    def logk(m):
        return -0.5 * np.sum((x0 - m) ** 2) - np.sum(np.abs(x1 - m)) / LAPLACE_SCALE

    step = 1.0 / math.sqrt(max(data.n, 1))
    cur = logk(mu)
    for _ in range(sweeps):
        prop = mu + step * rng.standard_normal()
        new = logk(prop)
        if math.log(rng.random()) < new - cur:
            mu, cur = prop, new
    return mu


def pair_conditionals(kind, data: Dataset) -> list:
    """Full-conditional samplers of the global slot for Gibbs runs."""
    kind = PairKind.parse(kind)

    if kind is PairKind.POISSON_GEOMETRIC:
        def update(g, labels, d, rng):
            st = allocation_stats(labels, d, 2)
            lam = lambda_mwg_step(g[0], st, rng)
            # log-scale random walk keeps the chain moving when the
            # Poisson-based proposal is far from the conditional
            s = float(st.sums.sum())
            prop = lam * math.exp(rng.standard_normal() / math.sqrt(max(s, 1.0)))
            log_r = (lambda_conditional_log_kernel(prop, st, s) + math.log(prop)
                     - lambda_conditional_log_kernel(lam, st, s) - math.log(lam))
            if math.log(rng.random()) < log_r:
                lam = prop
            return np.array([lam])
    elif kind is PairKind.NORMAL_VARIANCE:
        def update(g, labels, d, rng):
            return np.array([theta_conditional_normalvar(allocation_stats(labels, d, 2), rng)])
    elif kind is PairKind.POINT_NULL_MEAN:
        def update(g, labels, d, rng):
            sel = d.y[labels == 1]
            prec = sel.size + 1.0
            return np.array([rng.normal(sel.sum() / prec, 1.0 / math.sqrt(prec))])
    else:
        def update(g, labels, d, rng):
            return np.array([_laplace_location_step(float(g[0]), labels, d, rng)])
    return [Conditional((0,), update)]


def pair_bayes_factor(kind, x) -> oracles.BayesFactorResult:
    """Classical Bayes factor of component 0 against component 1."""
    kind = PairKind.parse(kind)
    x = np.asarray(x, dtype=float)
    if kind is PairKind.POISSON_GEOMETRIC:
        return oracles.bf_poisson_geometric(x)
    if kind is PairKind.NORMAL_VARIANCE:
        return oracles.bf_normal_var(x)
    if kind is PairKind.POINT_NULL_MEAN:
        return oracles.bf_point_null_mean(x)
    return oracles.bf_normal_laplace(x, scale=LAPLACE_SCALE)


def run_pair(kind, data: Dataset, a0: float, config: ChainConfig, sampler: str = "mh") -> Trace:
    """Run the ``"mh"`` or ``"gibbs"`` sampler for a named pair from a data-based start."""
    kind = PairKind.parse(kind)
    spec = build_pair(kind, a0)
    init = initial_globals(kind, data)
    if sampler == "mh":
        return run_mh(spec, data, config, pair_proposals(kind, data), initial=init)
    if sampler == "gibbs":
        return run_gibbs(spec, data, config, pair_conditionals(kind, data), initial=init)
    raise ContractError(f"unknown sampler {sampler!r}; expected 'mh' or 'gibbs'")


def pair_alpha(kind, trace: Trace) -> np.ndarray:
    """Draws of the test weight (the weight of the non-null model for point-null)."""
    return trace.weights[:, PairKind.parse(kind).alpha_index]


PAIR_TRUTH = {
    # family and parameters that make each component the true model
    PairKind.POISSON_GEOMETRIC: ((Family.POISSON, (4.0,)), (Family.GEOMETRIC_FAILURES, (0.1,))),
    PairKind.NORMAL_VARIANCE: ((Family.NORMAL, (0.0, 1.0)), (Family.NORMAL, (0.0, math.sqrt(2.0)))),
    PairKind.POINT_NULL_MEAN: ((Family.NORMAL, (0.0, 1.0)), (Family.NORMAL, (1.0, 1.0))),
    PairKind.NORMAL_LAPLACE: ((Family.NORMAL, (0.0, 1.0)), (Family.LAPLACE, (0.0, LAPLACE_SCALE))),
}

__all__ = [
    "LAPLACE_SCALE", "PAIR_TRUTH", "PairKind", "build_pair", "initial_globals", "lambda_conditional_is_proper",
    "lambda_conditional_log_kernel", "lambda_mwg_step", "normalvar_conditional_moments",
    "pair_alpha", "pair_bayes_factor", "pair_conditionals", "pair_proposals", "run_pair",
    "theta_conditional_normalvar",
]
