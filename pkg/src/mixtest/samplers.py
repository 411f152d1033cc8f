"""Gibbs and Metropolis-Hastings samplers for encompassing mixtures.

The Gibbs sampler completes the sample with allocations and cycles through
the conditionals.  It gets stuck near ``alpha in {0, 1}`` for large samples.
The Metropolis-Hastings sampler marginalises the allocations. It proposes
the weights from the prior or by a logit-scale random walk, and it proposes
the model parameters from independence proposals fitted to the whole
sample under each model.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

from . import distributions as dist
from .errors import ConfigurationError, ContractError, NumericGuardError, ParameterDomainError
from .mixture import (
    Dataset,
    MixtureSpec,
    logsumexp_rows,
    sample_allocations_from_logs,
    sample_log_dirichlet,
)

QUANTILE_LEVELS = (0.025, 0.25, 0.5, 0.75, 0.975)


# --------------------------------------------------------------- config


@dataclass(frozen=True)
class FromPrior:
    """Propose the weights from their Dirichlet prior."""


@dataclass(frozen=True)
class LogitRandomWalk:
    """Gaussian random walk on the additive log-ratio (logit for K = 2) scale."""

    step: float = 0.5

    def __post_init__(self):
        if not self.step > 0:
            raise ConfigurationError("random-walk step must be > 0")


@dataclass(frozen=True)
class MixedAlpha:
    """Each iteration draws from the prior with probability ``prior_prob``
    and otherwise takes a logit random-walk step.

    The choice does not depend on the state, so the mixture of the two
    kernels keeps the target invariant.
    """

    step: float = 0.5
    prior_prob: float = 0.5

    def __post_init__(self):
        if not self.step > 0:
            raise ConfigurationError("random-walk step must be > 0")
        if not 0.0 <= self.prior_prob <= 1.0:
            raise ConfigurationError("prior_prob must lie in [0, 1]")


class ThetaProposal(enum.Enum):
    MODEL_POSTERIOR_INDEPENDENCE = "uniform"
    COMPONENT_CONDITIONAL = "weighted"


@dataclass(frozen=True)
class ChainConfig:
    iterations: int = 10_000
    burn_in: int | None = None
    seed: int = 0
    alpha_proposal: FromPrior | LogitRandomWalk | MixedAlpha = field(default_factory=LogitRandomWalk)
    theta_proposal: ThetaProposal = ThetaProposal.MODEL_POSTERIOR_INDEPENDENCE
    record_allocations: bool = True
    alpha_substeps: int = 1

    def __post_init__(self):
        if int(self.iterations) < 1:
            raise ConfigurationError("iterations must be positive")
        if int(self.alpha_substeps) < 1:
            raise ConfigurationError("alpha_substeps must be positive")
        burn = self.iterations // 10 if self.burn_in is None else int(self.burn_in)
        if not 0 <= burn < self.iterations:
            raise ConfigurationError("burn_in must lie in [0, iterations)")
        object.__setattr__(self, "burn_in", burn)

    def with_seed(self, seed) -> "ChainConfig":
        return ChainConfig(self.iterations, self.burn_in, seed, self.alpha_proposal,
                           self.theta_proposal, self.record_allocations, self.alpha_substeps)


# ---------------------------------------------------------------- trace


@dataclass(frozen=True, eq=False)
class Trace:
    """Post-burn-in draws of one chain."""

    weights: np.ndarray
    globals: np.ndarray
    accepted: np.ndarray
    globals_accepted: np.ndarray | None = None
    allocation_counts: np.ndarray | None = None
    slot_names: tuple = ()

    def __post_init__(self):
        w = np.atleast_2d(np.asarray(self.weights, dtype=float))
        rows = w.shape[0]
        g = np.asarray(self.globals, dtype=float)
        g = g.reshape(rows, -1) if g.size else g.reshape(rows, g.shape[-1] if g.ndim == 2 else 0)
        acc = np.asarray(self.accepted, dtype=bool).reshape(-1)
        if acc.size != rows:
            raise ContractError("accepted flags must match the number of draws")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "globals", g)
        object.__setattr__(self, "accepted", acc)
        if not self.slot_names:
            object.__setattr__(self, "slot_names", tuple(f"g{i}" for i in range(g.shape[1])))

    @classmethod
    def from_alpha(cls, alpha) -> "Trace":
        a = np.asarray(alpha, dtype=float).reshape(-1)
        return cls(np.column_stack([a, 1.0 - a]), np.zeros((a.size, 0)), np.ones(a.size, bool))

    @property
    def draws(self) -> int:
        return self.weights.shape[0]

    @property
    def alpha(self) -> np.ndarray:
        return self.weights[:, 0]

    def to_csv(self, handle=None) -> str:
        """Write ``draw, w0.., slots.., accepted`` rows; returns the text."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        K = self.weights.shape[1]
        writer.writerow(["draw", *(f"w{j}" for j in range(K)), *self.slot_names, "accepted"])
        for t in range(self.draws):
            writer.writerow([t, *(repr(float(v)) for v in self.weights[t]),
                             *(repr(float(v)) for v in self.globals[t]), int(self.accepted[t])])
        text = buf.getvalue()
        if handle is not None:
            handle.write(text)
        return text


@dataclass(frozen=True, eq=False)
class PosteriorSummary:
    names: tuple
    mean: np.ndarray
    median: np.ndarray
    quantiles: dict
    crossing_count: int
    acceptance_rate: float
    globals_acceptance_rate: float | None = None

    def __getitem__(self, name):
        i = self.names.index(name)
        return {"mean": self.mean[i], "median": self.median[i],
                **{q: v[i] for q, v in self.quantiles.items()}}

    @property
    def alpha_median(self) -> float:
        return float(self.median[0])

    @property
    def alpha_mean(self) -> float:
        return float(self.mean[0])


def crossing_count(series, level: float = 0.5) -> int:
    """Number of ``t`` with ``(a_t - level)(a_{t+1} - level) < 0``."""
    d = np.asarray(series, dtype=float) - level
    return int(np.count_nonzero(d[:-1] * d[1:] < 0))


def summarize(trace: Trace) -> PosteriorSummary:
    """Means, type-7 quantiles and 0.5-crossings of every traced quantity."""
    if trace.draws == 0:
        raise ContractError("cannot summarise an empty trace")
    values = np.hstack([trace.weights, trace.globals])
    names = tuple(f"w{j}" for j in range(trace.weights.shape[1])) + tuple(trace.slot_names)
    qs = np.quantile(values, QUANTILE_LEVELS, axis=0, method="linear")
    quantiles = {lvl: qs[i] for i, lvl in enumerate(QUANTILE_LEVELS)}
    g_rate = None
    if trace.globals_accepted is not None and trace.globals_accepted.size:
        g_rate = float(np.mean(trace.globals_accepted))
    return PosteriorSummary(
        names=names,
        mean=values.mean(axis=0),
        median=quantiles[0.5].copy(),
        quantiles=quantiles,
        crossing_count=crossing_count(trace.weights[:, 0]),
        acceptance_rate=float(np.mean(trace.accepted)),
        globals_acceptance_rate=g_rate,
    )


# ------------------------------------------------------------ proposals


class IndependenceProposal:
    """Proposal for the global slots in ``slots`` that ignores the current state."""

    def sample(self, rng) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError

    def log_pdf(self, x) -> float:  # pragma: no cover - interface
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class GaussianProposal(IndependenceProposal):
    """Multivariate normal, or Student-t when ``df`` is given."""

    slots: tuple
    mean: np.ndarray
    cov: np.ndarray
    df: float | None = None

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if cov.shape != (mean.size, mean.size) or len(self.slots) != mean.size:
            raise ConfigurationError("proposal dimensions disagree")
        chol = np.linalg.cholesky(cov)
        p = mean.size
        logdet = 2.0 * np.log(np.diag(chol)).sum()
        if self.df is None:
            const = -0.5 * logdet - 0.5 * p * np.log(2 * np.pi)
        else:
            v = float(self.df)
            const = (special.gammaln((v + p) / 2) - special.gammaln(v / 2)
                     - 0.5 * p * np.log(v * np.pi) - 0.5 * logdet)
        object.__setattr__(self, "slots", tuple(self.slots))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "_chol", chol)
        object.__setattr__(self, "_inv_chol", np.linalg.inv(chol))
        object.__setattr__(self, "_const", float(const))

    def sample(self, rng):
        z = self._chol @ rng.standard_normal(self.mean.size)
        if self.df is not None:
            z = z * np.sqrt(self.df / rng.chisquare(self.df))
        return self.mean + z

    def log_pdf(self, x):
        d = np.asarray(x, dtype=float) - self.mean
        m = self._inv_chol @ d
        q = float(m @ m)
        if self.df is None:
            return self._const - 0.5 * q
        return self._const - 0.5 * (self.df + self.mean.size) * np.log1p(q / self.df)


@dataclass(frozen=True)
class GammaProposal(IndependenceProposal):
    slot: int
    shape: float
    rate: float

    @property
    def slots(self):
        return (self.slot,)

    def sample(self, rng):
        return np.array([rng.gamma(self.shape, 1.0 / self.rate)])

    def log_pdf(self, x):
        lam = float(x[0])
        if not lam > 0:
            return -np.inf
        return (self.shape * np.log(self.rate) - special.gammaln(self.shape)
                + (self.shape - 1) * np.log(lam) - self.rate * lam)


@dataclass(frozen=True)
class BetaPrimeProposal(IndependenceProposal):
    """``lam / (1 + lam) ~ Beta(a, b)``."""

    slot: int
    a: float
    b: float

    @property
    def slots(self):
        return (self.slot,)

    def sample(self, rng):
        u = rng.beta(self.a, self.b)
        return np.array([u / (1.0 - u)])

    def log_pdf(self, x):
        lam = float(x[0])
        if not lam > 0:
            return -np.inf
        return ((self.a - 1) * np.log(lam) - (self.a + self.b) * np.log1p(lam)
                - special.betaln(self.a, self.b))


# ---------------------------------------------------------------- MH


def _weights_from_alr(z):
    full = np.append(z, 0.0)
    m = full.max()
    return full - (m + np.log(np.exp(full - m).sum()))


def _alpha_step(state_lw, L, ll, a, config, rng):
    """One weight update; returns (log_weights, loglik, accepted)."""
    prop = config.alpha_proposal
    if isinstance(prop, MixedAlpha):
        prop = FromPrior() if rng.random() < prop.prior_prob else LogitRandomWalk(prop.step)
    if isinstance(prop, FromPrior):
        new_lw = sample_log_dirichlet(a, rng)
        extra = 0.0
    else:
        z = state_lw[:-1] - state_lw[-1]
        new_lw = _weights_from_alr(z + prop.step * rng.standard_normal(z.size))
        # Dirichlet prior times the alr Jacobian prod_j w_j
        extra = float(np.dot(a, new_lw - state_lw))
    new_ll = float(logsumexp_rows(new_lw[:, None] + L).sum()) if L.shape[1] else 0.0
    log_r = new_ll - ll + extra
    if not np.isfinite(ll):
        ok = np.isfinite(new_ll)
    else:
        ok = np.log(rng.random()) < log_r
    if ok:
        return new_lw, new_ll, True
    return state_lw, ll, False


def run_mh(spec: MixtureSpec, data: Dataset, config: ChainConfig,
           posterior_proposals: Sequence, initial=None) -> Trace:
    """Metropolis-Hastings over (weights, globals) with allocations integrated out.

    Parameters
    ----------
    posterior_proposals : sequence
        One entry per component: an :class:`IndependenceProposal` fitted to
        the whole sample under that model, or ``None`` for a component with
        nothing to propose.  Each iteration updates the weights
        ``config.alpha_substeps`` times, then picks one proposal for the
        global slots and applies the Hastings ratio.
    initial : array-like, optional
        Starting globals; defaults to ``spec.initial``.
    """
    proposals = list(posterior_proposals)
    if len(proposals) != spec.K:
        raise ConfigurationError("one proposal entry per component is required")
    active = [j for j, p in enumerate(proposals) if p is not None]
    covered = set(s for j in active for s in proposals[j].slots)
    if covered != set(range(spec.n_slots)):
        raise ConfigurationError("proposals must cover every global slot")

    rng = np.random.default_rng(config.seed)
    a = np.asarray(spec.weight_prior.concentration)
    g = np.array(spec.initial if initial is None else initial, dtype=float)
    lw = np.full(spec.K, -np.log(spec.K))
    L = spec.component_log_densities(g, data)
    ll = float(logsumexp_rows(lw[:, None] + L).sum()) if data.n else 0.0
    lp = spec.log_prior(g)

    keep = config.iterations - config.burn_in
    W = np.empty((keep, spec.K))
    G = np.empty((keep, spec.n_slots))
    acc = np.zeros(keep, bool)
    gacc = np.zeros(keep, bool)

    for it in range(config.iterations):
        a_ok = False
        # the likelihood matrix L is fixed during these moves, so extra
        # weight updates cost one log-sum-exp over the data each
        for _ in range(config.alpha_substeps):
            lw, ll, ok = _alpha_step(lw, L, ll, a, config, rng)
            a_ok |= ok
        g_ok = False
        if active:
            if config.theta_proposal is ThetaProposal.COMPONENT_CONDITIONAL:
                pw = np.exp(lw[active])
                j = active[int(rng.choice(len(active), p=pw / pw.sum()))]
            else:
                j = active[int(rng.integers(len(active)))]
            prop = proposals[j]
            idx = list(prop.slots)
            x_new = prop.sample(rng)
            q_cur = prop.log_pdf(g[idx])
            if not np.isfinite(q_cur):
                raise NumericGuardError(
                    f"proposal of component {j} has zero density at the current state")
            g_new = g.copy()
            g_new[idx] = x_new
            lp_new = spec.log_prior(g_new)
            if np.isfinite(lp_new):
                try:
                    L_new = spec.component_log_densities(g_new, data)
                except ParameterDomainError:
                    L_new = None
                if L_new is not None:
                    ll_new = float(logsumexp_rows(lw[:, None] + L_new).sum()) if data.n else 0.0
                    cur = ll + lp
                    new = ll_new + lp_new
                    if not np.isfinite(cur):
                        g_ok = np.isfinite(new)
                    elif np.isfinite(new):
                        log_r = new - cur + q_cur - prop.log_pdf(x_new)
                        g_ok = np.log(rng.random()) < log_r
                    if g_ok:
                        g, L, ll, lp = g_new, L_new, ll_new, lp_new
        t = it - config.burn_in
        if t >= 0:
            W[t] = np.exp(lw)
            G[t] = g
            acc[t] = a_ok
            gacc[t] = g_ok
    return Trace(W, G, acc, gacc if active else None, None, spec.slot_names)


# -------------------------------------------------------------- Gibbs


@dataclass(frozen=True)
class Conditional:
    """Full-conditional update of some global slots given the allocation.

    ``update(g, labels, data, rng)`` returns the new globals vector.
    """

    slots: tuple
    update: Callable


def run_gibbs(spec: MixtureSpec, data: Dataset, config: ChainConfig,
              conditional_sampler: Sequence[Conditional] = (), initial=None) -> Trace:
    """Data-augmentation Gibbs sampler: allocations, then weights, then globals."""
    conds = list(conditional_sampler)
    covered = set(s for c in conds for s in c.slots)
    missing = set(range(spec.n_slots)) - covered
    if missing:
        names = sorted(spec.slot_names[s] for s in missing)
        raise ConfigurationError(f"no conditional sampler for slot(s) {names}")

    rng = np.random.default_rng(config.seed)
    a = np.asarray(spec.weight_prior.concentration)
    g = np.array(spec.initial if initial is None else initial, dtype=float)
    lw = np.full(spec.K, -np.log(spec.K))

    keep = config.iterations - config.burn_in
    W = np.empty((keep, spec.K))
    G = np.empty((keep, spec.n_slots))
    C = np.empty((keep, spec.K), dtype=np.int64) if config.record_allocations else None

    for it in range(config.iterations):
        if data.n:
            L = spec.component_log_densities(g, data)
            labels = sample_allocations_from_logs(lw, L, rng, data.y)
        else:
            labels = np.zeros(0, dtype=np.intp)
        counts = np.bincount(labels, minlength=spec.K)
        lw = sample_log_dirichlet(counts + a, rng)
        for c in conds:
            g = np.asarray(c.update(g, labels, data, rng), dtype=float)
        t = it - config.burn_in
        if t >= 0:
            W[t] = np.exp(lw)
            G[t] = g
            if C is not None:
                C[t] = counts
    return Trace(W, G, np.ones(keep, bool), None, C, spec.slot_names)


# ------------------------------------------------------------ bootstrap


def simulate_component(spec: MixtureSpec, globals_, component: int, n: int, rng) -> Dataset:
    """Draw ``n`` observations from one component at fixed globals."""
    if not 0 <= component < spec.K:
        raise ContractError(f"component index must lie in 0..{spec.K - 1}")
    binding = spec.components[component]
    params = [float(v) for v in binding.resolve(np.asarray(globals_, float), Dataset(np.zeros(0)))]
    return Dataset(dist.sample(binding.family, params, n, rng))


def calibrate_bootstrap(spec: MixtureSpec, fitted_globals, component: int, replicas: int,
                        n: int, config: ChainConfig,
                        proposals: Callable[[Dataset], Sequence]) -> list:
    """Reference distribution of the weight posterior under one model.

    Simulates ``replicas`` datasets of size ``n`` from ``component`` at
    ``fitted_globals`` and summarises a Metropolis-Hastings run on each.
    ``proposals`` builds the per-component proposals from a dataset.
    """
    if not 0 <= component < spec.K:
        raise ContractError(f"component index must lie in 0..{spec.K - 1}")
    if replicas < 0:
        raise ContractError("replicas must be nonnegative")
    out = []
    for r in range(replicas):
        ss = np.random.SeedSequence([int(config.seed), int(component), r])
        data_seed, chain_seed = ss.generate_state(2)
        data = simulate_component(spec, fitted_globals, component, n,
                                  np.random.default_rng(data_seed))
        trace = run_mh(spec, data, config.with_seed(int(chain_seed)), proposals(data))
        out.append(summarize(trace))
    return out


__all__ = [
    "BetaPrimeProposal", "ChainConfig", "Conditional", "FromPrior", "GammaProposal",
    "GaussianProposal", "IndependenceProposal", "LogitRandomWalk", "MixedAlpha", "PosteriorSummary",
    "ThetaProposal", "Trace", "calibrate_bootstrap", "crossing_count", "run_gibbs", "run_mh",
    "simulate_component", "summarize",
]
