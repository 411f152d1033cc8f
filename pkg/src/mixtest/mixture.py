"""The encompassing mixture: components, parameter bindings and likelihoods.

A :class:`MixtureSpec` holds ``K >= 2`` candidate models as components of
one mixture.  The component parameters are bound to a shared vector of
*global slots* through a small closed set of sources:

* :class:`Fixed` holds a constant.
* :class:`Slot` returns a slot times a constant. It covers identity, sharing
  and the affine rescale used for the logit/probit pair.
* :class:`OnePlusInverse` returns ``1 / (1 + slot)``, the geometric
  probability tied to a Poisson rate.
* :class:`SqrtSlot` maps a variance slot to a scale.
* :class:`LinearPredictor` returns ``X[:, columns] @ (scales * slots)``.
* :class:`MomentMatched` returns the location and scale of a family with a
  given mean and variance.

Components and allocation labels are indexed from 0. The weight of the first
component, ``weights[0]``, is the scalar ``alpha`` of a two-model test.
The symbol zeta names the allocation labels here. It never refers to the
Logistic scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import distributions as dist
from .distributions import Family
from .errors import (
    ConfigurationError,
    ContractError,
    DegenerateSupportError,
    DesignError,
    ParameterDomainError,
)

SIMPLEX_TOL = 1e-12


# ---------------------------------------------------------------- data


@dataclass(frozen=True, eq=False)
class Dataset:
    """Observations with optional censoring flags and design matrix.

    ``censored[i]`` is True when observation ``i`` is right-censored on the
    original time scale.  ``X`` has ``n`` rows, and its first column is
    the intercept.
    """

    y: np.ndarray
    censored: np.ndarray | None = None
    X: np.ndarray | None = None

    def __post_init__(self):
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        if y.ndim != 1:
            raise ContractError("y must be one-dimensional")
        object.__setattr__(self, "y", y)
        if self.censored is not None:
            c = np.asarray(self.censored, dtype=bool).reshape(-1)
            if c.shape != y.shape:
                raise ContractError("censored must match y in length")
            object.__setattr__(self, "censored", c)
        if self.X is not None:
            X = np.asarray(self.X, dtype=float)
            if X.ndim != 2 or X.shape[0] != y.size:
                raise ContractError("X must be an n x p matrix matching y")
            if y.size >= X.shape[1] and np.linalg.matrix_rank(X) < X.shape[1]:
                raise DesignError("design matrix is rank deficient")
            object.__setattr__(self, "X", X)

    @property
    def n(self) -> int:
        return int(self.y.size)

    def subset(self, index) -> "Dataset":
        return Dataset(
            self.y[index],
            None if self.censored is None else self.censored[index],
            None if self.X is None else self.X[index],
        )


@dataclass(frozen=True, eq=False)
class Allocation:
    """Latent component labels, one per observation, in ``0..K-1``."""

    labels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.intp).reshape(-1))

    def validate(self, n: int, K: int) -> None:
        if self.labels.size != n:
            raise ContractError(f"allocation has {self.labels.size} labels for {n} observations")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= K):
            raise ContractError(f"allocation labels must lie in 0..{K - 1}")


@dataclass(frozen=True)
class AllocationStats:
    counts: np.ndarray
    sums: np.ndarray


def allocation_stats(alloc, data: Dataset, K: int) -> AllocationStats:
    """Per-component observation counts and sums of ``y``."""
    alloc = _as_allocation(alloc)
    alloc.validate(data.n, K)
    counts = np.bincount(alloc.labels, minlength=K).astype(np.int64)
    sums = np.bincount(alloc.labels, weights=data.y, minlength=K)
    return AllocationStats(counts, sums)


def _as_allocation(alloc) -> Allocation:
    return alloc if isinstance(alloc, Allocation) else Allocation(alloc)


# ------------------------------------------------------------- sources


@dataclass(frozen=True)
class Fixed:
    value: float

    slots = ()

    def __call__(self, g, data):
        return self.value


@dataclass(frozen=True)
class Slot:
    index: int
    scale: float = 1.0

    @property
    def slots(self):
        return (self.index,)

    def __call__(self, g, data):
        return g[self.index] * self.scale


@dataclass(frozen=True)
class OnePlusInverse:
    index: int

    @property
    def slots(self):
        return (self.index,)

    def __call__(self, g, data):
        lam = g[self.index]
        if not lam > 0:
            raise ParameterDomainError("rate slot must be > 0")
        return 1.0 / (1.0 + lam)


@dataclass(frozen=True)
class SqrtSlot:
    index: int

    @property
    def slots(self):
        return (self.index,)

    def __call__(self, g, data):
        v = g[self.index]
        if not v > 0:
            raise ParameterDomainError("variance slot must be > 0")
        return np.sqrt(v)


@dataclass(frozen=True)
class LinearPredictor:
    """``X[:, columns] @ (scales * g[slot_indices])``."""

    slot_indices: tuple
    columns: tuple
    scales: tuple | None = None

    def __post_init__(self):
        if len(self.slot_indices) != len(self.columns):
            raise ConfigurationError("one slot per design column")
        if self.scales is not None and len(self.scales) != len(self.columns):
            raise ConfigurationError("one scale per design column")

    @property
    def slots(self):
        return tuple(self.slot_indices)

    def __call__(self, g, data):
        if data.X is None:
            raise ContractError("a linear predictor needs a design matrix")
        coef = np.asarray([g[s] for s in self.slot_indices], dtype=float)
        if self.scales is not None:
            coef = coef * np.asarray(self.scales, dtype=float)
        return data.X[:, list(self.columns)] @ coef


@dataclass(frozen=True)
class MomentMatched:
    """Location and scale of ``family`` matching a mean slot and a variance slot."""

    family: Family
    location_slot: int
    variance_slot: int

    @property
    def slots(self):
        return (self.location_slot, self.variance_slot)

    def __call__(self, g, data):
        v = g[self.variance_slot]
        if not v > 0:
            raise ParameterDomainError("variance slot must be > 0")
        return dist.moment_matched_params(self.family, g[self.location_slot], v)


@dataclass(frozen=True)
class ComponentBinding:
    """One mixture component: a family plus a source for each of its parameters."""

    family: Family
    params: tuple

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        width = sum(2 if isinstance(p, MomentMatched) else 1 for p in self.params)
        if width != self.family.n_params:
            raise ConfigurationError(
                f"{self.family.value} needs {self.family.n_params} parameter(s), bound {width}")

    @property
    def slots(self) -> frozenset:
        return frozenset(s for p in self.params for s in p.slots)

    def resolve(self, g, data: Dataset) -> list:
        out = []
        for p in self.params:
            v = p(g, data)
            out.extend(v if isinstance(p, MomentMatched) else (v,))
        return out

    def log_pdf(self, g, data: Dataset) -> np.ndarray:
        """Per-observation log density (censored factor where flagged)."""
        fam = self.family
        if fam in (Family.BERNOULLI_LOGIT, Family.BERNOULLI_PROBIT) and isinstance(
                self.params[0], LinearPredictor):
            return dist.bernoulli_log_density_linear(fam, self.params[0](g, data), data.y)
        values = self.resolve(g, data)
        if data.censored is not None and fam in (Family.NORMAL, Family.GUMBEL, Family.LOGISTIC):
            out = dist.censored_log_density(fam, values, data.y, data.censored)
        else:
            out = dist.log_density(fam, values, data.y)
        return np.broadcast_to(np.asarray(out, dtype=float), (data.n,))


# -------------------------------------------------------------- priors


@dataclass(frozen=True)
class WeightPrior:
    """Dirichlet concentration on the weights (Beta when K = 2)."""

    concentration: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in np.atleast_1d(self.concentration))
        if len(a) < 2:
            raise ParameterDomainError("a weight prior needs at least two entries")
        if not all(x > 0 and np.isfinite(x) for x in a):
            raise ParameterDomainError("weight prior concentrations must be positive")
        object.__setattr__(self, "concentration", a)

    @classmethod
    def symmetric(cls, a0: float, K: int) -> "WeightPrior":
        return cls((a0,) * K)

    @property
    def K(self) -> int:
        return len(self.concentration)

    def log_density(self, log_weights) -> float:
        from scipy.special import gammaln

        a = np.asarray(self.concentration)
        lw = np.asarray(log_weights, dtype=float)
        return float(gammaln(a.sum()) - gammaln(a).sum() + np.dot(a - 1.0, lw))


class PriorTerm:
    """Log prior over a subset of the global slots (``slots`` attribute)."""

    proper = True

    def log_density(self, g) -> float:  # pragma: no cover - interface
        raise NotImplementedError


@dataclass(frozen=True)
class Flat(PriorTerm):
    slots: tuple
    proper = False

    def log_density(self, g) -> float:
        return 0.0


@dataclass(frozen=True)
class Jeffreys(PriorTerm):
    """``pi(x) = 1/x`` on a positive slot (rates and variances)."""

    slot: int
    proper = False

    @property
    def slots(self):
        return (self.slot,)

    def log_density(self, g) -> float:
        x = g[self.slot]
        return -np.log(x) if x > 0 else -np.inf


@dataclass(frozen=True)
class NormalPrior(PriorTerm):
    slot: int
    mean: float = 0.0
    sd: float = 1.0

    @property
    def slots(self):
        return (self.slot,)

    def log_density(self, g) -> float:
        return float(dist.log_density(Family.NORMAL, (self.mean, self.sd), g[self.slot]))


@dataclass(frozen=True, eq=False)
class GaussianBlock(PriorTerm):
    """Multivariate normal prior on a block of slots (g-priors among others).

    When ``variance_slot`` is set, the covariance is multiplied by that
    slot, which gives the conditional g-prior ``N(mean, sigma^2 cov)``.
    """

    slots: tuple
    mean: np.ndarray
    cov: np.ndarray
    variance_slot: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (mean.size, mean.size) or mean.size != len(self.slots):
            raise ConfigurationError("prior block dimensions disagree")
        chol = np.linalg.cholesky(cov)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "_chol", chol)
        object.__setattr__(self, "_logdet", 2.0 * np.log(np.diag(chol)).sum())

    def log_density(self, g) -> float:
        d = np.asarray([g[s] for s in self.slots]) - self.mean
        z = np.linalg.solve(self._chol, d)
        p = self.mean.size
        out = -0.5 * z @ z - 0.5 * self._logdet - 0.5 * p * np.log(2 * np.pi)
        if self.variance_slot is not None:
            s2 = g[self.variance_slot]
            if not s2 > 0:
                return -np.inf
            out = out + 0.5 * z @ z * (1 - 1 / s2) - 0.5 * p * np.log(s2)
        return float(out)


# --------------------------------------------------------------- spec


@dataclass(frozen=True, eq=False)
class MixtureSpec:
    """Encompassing mixture of ``K`` components over shared global slots."""

    components: tuple
    weight_prior: WeightPrior
    global_prior: tuple = ()
    slot_names: tuple = ()
    initial: tuple = ()
    name: str = "mixture"
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "global_prior", tuple(self.global_prior))
        object.__setattr__(self, "slot_names", tuple(self.slot_names))
        object.__setattr__(self, "initial", tuple(float(v) for v in self.initial))
        if len(comps) < 2:
            raise ConfigurationError("an encompassing mixture needs at least two components")
        if self.weight_prior.K != len(comps):
            raise ConfigurationError(
                f"weight prior has {self.weight_prior.K} entries for {len(comps)} components")
        p = len(self.slot_names)
        if len(self.initial) != p:
            raise ConfigurationError("one initial value per global slot")
        used = set().union(*(c.slots for c in comps))
        if used and (min(used) < 0 or max(used) >= p):
            raise ConfigurationError("component bound to an undeclared slot")
        covered = [s for t in self.global_prior for s in t.slots]
        if sorted(covered) != list(range(p)):
            raise ConfigurationError("every global slot needs exactly one prior term")
        # An improper prior is only safe on slots shared by every component.
        for term in self.global_prior:
            if not term.proper:
                for s in term.slots:
                    if not all(s in c.slots for c in comps):
                        raise ConfigurationError(
                            f"improper prior on slot {self.slot_names[s]!r} which is not "
                            "shared by every component")

    @property
    def K(self) -> int:
        return len(self.components)

    @property
    def n_slots(self) -> int:
        return len(self.slot_names)

    def log_prior(self, g) -> float:
        return float(sum(t.log_density(g) for t in self.global_prior))

    def component_log_densities(self, g, data: Dataset) -> np.ndarray:
        """``(K, n)`` matrix of per-component log densities."""
        g = np.asarray(g, dtype=float)
        if data.n == 0:
            return np.zeros((self.K, 0))
        return np.vstack([c.log_pdf(g, data) for c in self.components])


# -------------------------------------------------------- likelihoods


def check_weights(weights, K: int) -> np.ndarray:
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.size != K:
        raise ContractError(f"expected {K} weights, got {w.size}")
    if np.any(w < -SIMPLEX_TOL) or abs(w.sum() - 1.0) > SIMPLEX_TOL or not np.all(np.isfinite(w)):
        raise ContractError("weights must lie on the simplex")
    return w


def _log_weights(w):
    with np.errstate(divide="ignore"):
        return np.log(np.clip(w, 0.0, None))


def logsumexp_rows(terms: np.ndarray) -> np.ndarray:
    """Column-wise log-sum-exp of a ``(K, n)`` array.

    A term equal to ``-inf`` contributes exactly nothing, so a one-hot
    weight vector reproduces that component's log density bit for bit.
    """
    if terms.shape[0] == 2:
        return np.logaddexp(terms[0], terms[1])
    m = terms.max(axis=0)
    safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(invalid="ignore"):
        s = np.exp(terms - safe).sum(axis=0)
    with np.errstate(divide="ignore"):
        return np.where(np.isfinite(m), safe + np.log(s), m)


def mixture_log_likelihood_from_logs(log_weights, log_dens: np.ndarray) -> float:
    terms = np.asarray(log_weights)[:, None] + log_dens
    return float(logsumexp_rows(terms).sum())


def mixture_log_likelihood(spec: MixtureSpec, globals_, weights, data: Dataset) -> float:
    """``sum_i log sum_j w_j f_j(y_i)``."""
    w = check_weights(weights, spec.K)
    return mixture_log_likelihood_from_logs(_log_weights(w), spec.component_log_densities(globals_, data))


def completed_log_likelihood(spec: MixtureSpec, globals_, weights, data: Dataset, alloc) -> float:
    """``sum_j n_j log w_j + sum_i log f_{zeta_i}(y_i)`` with ``0 log 0 = 0``."""
    w = check_weights(weights, spec.K)
    alloc = _as_allocation(alloc)
    alloc.validate(data.n, spec.K)
    counts = np.bincount(alloc.labels, minlength=spec.K)
    lw = _log_weights(w)
    nz = counts > 0
    weight_term = float(np.sum(counts[nz] * lw[nz]))
    if data.n == 0:
        return weight_term
    L = spec.component_log_densities(globals_, data)
    return weight_term + float(L[alloc.labels, np.arange(data.n)].sum())


def allocation_log_probs(log_weights, log_dens: np.ndarray, data_y=None) -> np.ndarray:
    """Normalised ``(K, n)`` log allocation probabilities."""
    terms = np.asarray(log_weights)[:, None] + log_dens
    norm = logsumexp_rows(terms)
    bad = ~np.isfinite(norm)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DegenerateSupportError(i, None if data_y is None else float(data_y[i]))
    return terms - norm


def sample_allocations_from_logs(log_weights, log_dens, rng, data_y=None) -> np.ndarray:
    logp = allocation_log_probs(log_weights, log_dens, data_y)
    cum = np.cumsum(np.exp(logp), axis=0)
    u = rng.random(logp.shape[1]) * cum[-1]
    labels = (cum < u).sum(axis=0)
    return np.minimum(labels, logp.shape[0] - 1)


def sample_allocations(spec: MixtureSpec, globals_, weights, data: Dataset, rng) -> Allocation:
    """Draw each label independently with ``P(zeta_i = j)`` proportional to ``w_j f_j(y_i)``."""
    w = check_weights(weights, spec.K)
    L = spec.component_log_densities(globals_, data)
    return Allocation(sample_allocations_from_logs(_log_weights(w), L, rng, data.y))


def sample_log_dirichlet(alpha, rng) -> np.ndarray:
    """Log of one Dirichlet draw, accurate for concentrations far below 1.

    Uses ``Gamma(a) = Gamma(a + 1) * U^(1/a)`` so tiny components keep their
    relative size on the log scale instead of underflowing to zero.
    """
    a = np.asarray(alpha, dtype=float)
    log_g = np.log(rng.standard_gamma(a + 1.0)) + np.log(rng.random(a.size)) / a
    m = log_g.max()
    return log_g - (m + np.log(np.exp(log_g - m).sum()))


def sample_weights_conditional(counts, prior: WeightPrior, rng) -> np.ndarray:
    """One Dirichlet(counts + concentration) draw."""
    counts = np.asarray(counts, dtype=float)
    if counts.size != prior.K or np.any(counts < 0):
        raise ContractError("counts must be K nonnegative integers")
    return np.exp(sample_log_dirichlet(counts + np.asarray(prior.concentration), rng))


__all__ = [
    "Allocation", "AllocationStats", "ComponentBinding", "Dataset", "Fixed", "Flat",
    "GaussianBlock", "Jeffreys", "LinearPredictor", "MixtureSpec", "MomentMatched",
    "NormalPrior", "OnePlusInverse", "PriorTerm", "Slot", "SqrtSlot", "WeightPrior",
    "allocation_stats", "completed_log_likelihood", "mixture_log_likelihood",
    "sample_allocations", "sample_weights_conditional", "check_weights",
]
