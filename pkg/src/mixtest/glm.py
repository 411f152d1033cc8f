"""Logit against probit, and Gaussian variable selection as a mixture.

Model masks
-----------
Regression model ``j`` (``1 <= j <= 2^(k+1) - 1``) uses design column ``b``
whenever bit ``b`` of ``j`` is set, with the intercept as bit 0.  So ``j = 1``
is the intercept-only model and ``j = 3`` is intercept plus ``X1``.
Mixture component ``j - 1`` holds model ``j``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .distributions import Family
from .errors import (
    ConfigurationError,
    ContractError,
    DegenerateRescaleError,
    DesignError,
    NumericGuardError,
    ParameterDomainError,
)
from .mixture import (
    ComponentBinding,
    Dataset,
    GaussianBlock,
    Jeffreys,
    LinearPredictor,
    MixtureSpec,
    SqrtSlot,
    WeightPrior,
    mixture_log_likelihood_from_logs,
    sample_allocations_from_logs,
    sample_log_dirichlet,
)
from .samplers import ChainConfig, GaussianProposal, Trace, run_mh

MAX_COLUMNS = 12


class Link(enum.Enum):
    LOGIT = "logit"
    PROBIT = "probit"

    @property
    def family(self) -> Family:
        return Family.BERNOULLI_LOGIT if self is Link.LOGIT else Family.BERNOULLI_PROBIT


@dataclass(frozen=True)
class GlmFit:
    coefficients: np.ndarray
    converged: bool
    iterations: int
    log_likelihood: float = float("nan")


# ------------------------------------------------------------ binary GLM


def _require_binary(data: Dataset) -> np.ndarray:
    if data.X is None:
        raise ContractError("a binary regression needs a design matrix")
    y = data.y
    if not np.all((y == 0) | (y == 1)):
        raise ContractError("the response must be 0/1")
    return y


def _link_terms(link: Link, eta: np.ndarray, y: np.ndarray):
    """Log likelihood, score weights and Fisher weights at ``eta``."""
    if link is Link.LOGIT:
        ll = np.sum(y * eta - np.logaddexp(0.0, eta))
        p = special.expit(eta)
        return ll, y - p, p * (1.0 - p)
    log_p = special.log_ndtr(eta)
    log_q = special.log_ndtr(-eta)
    ll = np.sum(np.where(y == 1, log_p, log_q))
    log_phi = -0.5 * eta * eta - 0.5 * math.log(2 * math.pi)
    # d/deta log Phi(eta) and d/deta log(1 - Phi(eta)), overflow-free
    lam_p = np.exp(log_phi - log_p)
    lam_q = np.exp(log_phi - log_q)
    score = np.where(y == 1, lam_p, -lam_q)
    fisher = np.exp(2 * log_phi - log_p - log_q)
    return ll, score, fisher


def _newton(X, y, link: Link, prior_prec=None, prior_mean=None, max_iter=100, tol=1e-8):
    """Fisher scoring with step halving for a (possibly penalised) binary GLM."""
    p = X.shape[1]
    beta = np.zeros(p)
    P = np.zeros((p, p)) if prior_prec is None else prior_prec
    m = np.zeros(p) if prior_mean is None else prior_mean

    def objective(b):
        ll, score, fisher = _link_terms(link, X @ b, y)
        d = b - m
        return ll - 0.5 * d @ P @ d, X.T @ score - P @ d, (X * fisher[:, None]).T @ X + P

    obj, grad, info = objective(beta)
    for it in range(1, max_iter + 1):
        try:
            step = np.linalg.solve(info, grad)
        except np.linalg.LinAlgError:
            return beta, False, it, obj, info
        # a vanishing score alone is not enough: under separation it shrinks
        # while the Newton step keeps growing
        if np.max(np.abs(grad)) < tol and np.max(np.abs(step)) <= 1e-6 * (1.0 + np.max(np.abs(beta))):
            return beta, True, it - 1, obj, info
        t = 1.0
        while True:
            cand = beta + t * step
            new = objective(cand)
            if np.isfinite(new[0]) and new[0] >= obj - 1e-12 * abs(obj):
                break
            t *= 0.5
            if t < 1e-10:
                return beta, False, it, obj, info
        beta, (obj, grad, info) = cand, new
    return beta, False, max_iter, obj, info


def fit_glm_mle(data: Dataset, link) -> GlmFit:
    """Maximum likelihood for a logit or probit regression by Fisher scoring.

    Convergence means the score max-norm fell below ``1e-8`` and the
    Newton step became negligible within 100 iterations.  Otherwise, as under separation, ``converged`` is False
    and the last iterate is returned.
    """
    link = Link(link) if not isinstance(link, Link) else link
    y = _require_binary(data)
    beta, ok, its, obj, _ = _newton(data.X, y, link)
    return GlmFit(beta, ok, its, float(obj))


def rescale_ratio(fit_logit: GlmFit, fit_probit: GlmFit) -> np.ndarray:
    """Elementwise ratio of logit to probit coefficients."""
    a = np.asarray(fit_logit.coefficients, dtype=float)
    b = np.asarray(fit_probit.coefficients, dtype=float)
    if a.shape != b.shape:
        raise ContractError("fits have different numbers of coefficients")
    if np.any(b == 0) or not np.all(np.isfinite(b)):
        raise DegenerateRescaleError("a probit coefficient is zero; the ratio is undefined")
    return a / b


def gprior_covariance(X: np.ndarray, c: float) -> np.ndarray:
    return c * np.linalg.inv(X.T @ X)


def build_logit_probit_mixture(data: Dataset, k, a0: float) -> MixtureSpec:
    """Two-component mixture with a shared ``theta`` and the probit rescaled by ``k``.

    Component 0 is logit with ``p_i = expit(x_i theta)``. Component 1 is
    probit with ``q_i = Phi(x_i (theta / k))``. The prior on ``theta`` is
    ``N(0, n (X'X)^-1)``.
    """
    _require_binary(data)
    if not a0 > 0:
        raise ParameterDomainError("a0 must be > 0")
    X = data.X
    p = X.shape[1]
    k = np.asarray(k, dtype=float).reshape(-1)
    if k.size != p or np.any(k == 0):
        raise DegenerateRescaleError("k must have one nonzero entry per column")
    slots = tuple(range(p))
    comps = (
        ComponentBinding(Family.BERNOULLI_LOGIT, (LinearPredictor(slots, slots),)),
        ComponentBinding(Family.BERNOULLI_PROBIT, (LinearPredictor(slots, slots, tuple(1.0 / k)),)),
    )
    prior = GaussianBlock(slots, np.zeros(p), gprior_covariance(X, data.n))
    return MixtureSpec(comps, WeightPrior.symmetric(a0, 2), (prior,),
                       tuple(f"theta{i}" for i in range(p)), tuple(np.zeros(p)), "logit-probit",
                       {"k": tuple(k)})


def logit_probit_mixture_log_posterior(theta, alpha, data: Dataset, k, a0: float) -> float:
    """Unnormalised log posterior of ``(theta, alpha)`` with allocations summed out.

    At ``alpha`` equal to 0 or 1 this returns the single-model log posterior
    (g-prior plus that model's log likelihood).
    """
    if not 0 <= alpha <= 1:
        raise ParameterDomainError("alpha must lie in [0, 1]")
    spec = build_logit_probit_mixture(data, k, a0)
    theta = np.asarray(theta, dtype=float)
    with np.errstate(divide="ignore"):
        lw = np.log(np.array([alpha, 1.0 - alpha]))
    ll = mixture_log_likelihood_from_logs(lw, spec.component_log_densities(theta, data))
    if 0 < alpha < 1:
        lbeta = (a0 - 1) * (lw[0] + lw[1]) - special.betaln(a0, a0)
    else:
        # at the boundary the mixture is a single model; the Beta factor is dropped
        lbeta = 0.0
    return float(lbeta + spec.log_prior(theta) + ll)


def logit_probit_proposals(data: Dataset, k, inflate: float = 1.5) -> list:
    """Laplace approximations of each model's posterior in ``theta`` space."""
    y = _require_binary(data)
    X = data.X
    k = np.asarray(k, dtype=float)
    prec = X.T @ X / data.n
    out = []
    for link, design in ((Link.LOGIT, X), (Link.PROBIT, X / k)):
        mode, ok, _, _, info = _newton(design, y, link, prior_prec=prec)
        if not ok:
            raise NumericGuardError(f"{link.value} posterior mode search did not converge")
        cov = inflate * np.linalg.inv(info)
        out.append(GaussianProposal(tuple(range(X.shape[1])), mode, 0.5 * (cov + cov.T), df=10.0))
    return out


def run_logit_probit(data: Dataset, a0: float, config: ChainConfig, k=None):
    """Marginal Metropolis-Hastings run for the logit/probit mixture.

    Returns the trace and the rescaling vector ``k``.
    """
    if k is None:
        k = rescale_ratio(fit_glm_mle(data, Link.LOGIT), fit_glm_mle(data, Link.PROBIT))
    spec = build_logit_probit_mixture(data, k, a0)
    props = logit_probit_proposals(data, k)
    return run_mh(spec, data, config, props, initial=props[0].mean), np.asarray(k)


def simulate_binary_regression(n: int, coefficients, link, rng) -> Dataset:
    """Binary responses with an intercept and one ``N(0, 1)`` covariate."""
    link = Link(link) if not isinstance(link, Link) else link
    X = np.column_stack([np.ones(n), rng.standard_normal(n)])
    eta = X @ np.asarray(coefficients, dtype=float)
    prob = special.expit(eta) if link is Link.LOGIT else special.ndtr(eta)
    return Dataset((rng.random(n) < prob).astype(float), X=X)


# -------------------------------------------------- variable selection


class Case(enum.Enum):
    SHARED_BETA = "shared"
    SEPARATE_BETA = "separate"


@dataclass(frozen=True)
class ModelIndex:
    j: int
    mask: tuple

    @classmethod
    def from_j(cls, j: int, columns: int) -> "ModelIndex":
        if not 1 <= j < 2 ** columns:
            raise ContractError(f"model index must lie in 1..{2 ** columns - 1}")
        return cls(j, tuple((j >> b) & 1 for b in range(columns)))

    @property
    def size(self) -> int:
        return int(sum(self.mask))

    @property
    def columns(self) -> tuple:
        return tuple(b for b, m in enumerate(self.mask) if m)


def enumerate_models(columns: int) -> list:
    if not 1 <= columns <= MAX_COLUMNS:
        raise ConfigurationError(f"between 1 and {MAX_COLUMNS} design columns are supported")
    return [ModelIndex.from_j(j, columns) for j in range(1, 2 ** columns)]


def _check_design(data: Dataset) -> np.ndarray:
    if data.X is None:
        raise ContractError("variable selection needs a design matrix")
    X = data.X
    if X.shape[0] < X.shape[1]:
        raise DesignError("fewer rows than design columns")
    if X.shape[1] > MAX_COLUMNS:
        raise ConfigurationError(f"at most {MAX_COLUMNS} design columns are supported")
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise DesignError("design matrix is rank deficient")
    return X


def build_regression_mixture(data: Dataset, a0: float, case, g: float | None = None,
                             prior_mean=None) -> MixtureSpec:
    """Mixture of all ``2^(k+1) - 1`` sub-regressions with a shared variance.

    With ``SHARED_BETA`` every component reads its coefficients from one
    vector ``beta``, which has the g-prior ``N(M, g sigma^2 (X'X)^-1)``.
    With ``SEPARATE_BETA`` each model ``j`` has its own block
    ``beta_j ~ N(M_j, g sigma^2 (X_j'X_j)^-1)``.  In both cases
    ``pi(sigma^2) = 1/sigma^2``, and ``g`` defaults to ``n``.
    """
    case = Case(case) if not isinstance(case, Case) else case
    if not a0 > 0:
        raise ParameterDomainError("a0 must be > 0")
    X = _check_design(data)
    n, p = X.shape
    g = float(n if g is None else g)
    if not g > 0:
        raise ParameterDomainError("g must be > 0")
    M = np.zeros(p) if prior_mean is None else np.asarray(prior_mean, dtype=float)
    models = enumerate_models(p)
    comps, priors, names = [], [], []
    if case is Case.SHARED_BETA:
        var_slot = p
        names = [f"beta{b}" for b in range(p)] + ["sigma2"]
        for m in models:
            cols = m.columns
            comps.append(ComponentBinding(Family.NORMAL, (LinearPredictor(cols, cols), SqrtSlot(var_slot))))
        priors.append(GaussianBlock(tuple(range(p)), M, gprior_covariance(X, g), var_slot))
    else:
        offset = 0
        blocks = []
        for m in models:
            cols = m.columns
            blocks.append(tuple(range(offset, offset + len(cols))))
            names += [f"beta{m.j}_{b}" for b in cols]
            offset += len(cols)
        var_slot = offset
        names.append("sigma2")
        for m, blk in zip(models, blocks):
            cols = m.columns
            Xj = X[:, list(cols)]
            comps.append(ComponentBinding(Family.NORMAL, (LinearPredictor(blk, cols), SqrtSlot(var_slot))))
            priors.append(GaussianBlock(blk, M[list(cols)], g * np.linalg.inv(Xj.T @ Xj), var_slot))
    priors.append(Jeffreys(var_slot))
    initial = np.zeros(len(names))
    initial[var_slot] = 1.0
    return MixtureSpec(tuple(comps), WeightPrior.symmetric(a0, len(models)), tuple(priors),
                       tuple(names), tuple(initial), f"regression-{case.value}",
                       {"g": g, "prior_mean": tuple(M), "case": case.value})


@dataclass
class RegressionState:
    """Gibbs state of the variable-selection mixture."""

    log_weights: np.ndarray
    beta: np.ndarray          # (p,) for Case 1; (models, p) zero-padded for Case 2
    sigma2: float
    labels: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)


class RegressionSampler:
    """Conditionals of the variable-selection mixture for one dataset."""

    def __init__(self, data: Dataset, a0: float, case, g: float | None = None, prior_mean=None):
        self.case = Case(case) if not isinstance(case, Case) else case
        self.X = _check_design(data)
        self.y = data.y
        self.n, self.p = self.X.shape
        if not a0 > 0:
            raise ParameterDomainError("a0 must be > 0")
        self.a0 = float(a0)
        self.g = float(self.n if g is None else g)
        if not self.g > 0:
            raise ParameterDomainError("g must be > 0")
        self.M = np.zeros(self.p) if prior_mean is None else np.asarray(prior_mean, dtype=float)
        self.models = enumerate_models(self.p)
        self.K = len(self.models)
        self.masks = np.array([m.mask for m in self.models], dtype=float)
        self.XtX = self.X.T @ self.X
        self.sub_gram = [self.XtX[np.ix_(m.columns, m.columns)] for m in self.models]

    # --- state helpers -------------------------------------------------
    def initial_state(self, rng) -> RegressionState:
        if self.n >= self.p:
            beta = np.linalg.lstsq(self.X, self.y, rcond=None)[0]
            resid = self.y - self.X @ beta
            sigma2 = max(float(resid @ resid) / max(self.n - self.p, 1), 1e-6)
        else:
            beta, sigma2 = self.M.copy(), 1.0
        if self.case is Case.SEPARATE_BETA:
            beta = self.masks * beta
        lw = np.full(self.K, -math.log(self.K))
        state = RegressionState(lw, beta, sigma2, np.zeros(self.n, dtype=np.intp))
        state.labels = self.sample_labels(state, rng)
        return state

    def coefficient_matrix(self, state) -> np.ndarray:
        """``(K, p)`` coefficients of every model, zero outside its mask."""
        if self.case is Case.SHARED_BETA:
            return self.masks * state.beta
        return state.beta

    def log_densities(self, state) -> np.ndarray:
        means = self.coefficient_matrix(state) @ self.X.T
        r = self.y[None, :] - means
        return -0.5 * r * r / state.sigma2 - 0.5 * math.log(2 * math.pi * state.sigma2)

    def sample_labels(self, state, rng) -> np.ndarray:
        if self.n == 0:
            return np.zeros(0, dtype=np.intp)
        return sample_allocations_from_logs(state.log_weights, self.log_densities(state), rng, self.y)

    # --- conditionals ---------------------------------------------------
    def _draw_gaussian(self, prec, lin, rng):
        try:
            chol = np.linalg.cholesky(prec)
        except np.linalg.LinAlgError as exc:
            raise NumericGuardError("posterior precision is not positive definite") from exc
        mean = np.linalg.solve(chol.T, np.linalg.solve(chol, lin))
        return mean + np.linalg.solve(chol.T, rng.standard_normal(prec.shape[0]))

    def beta_conditional_moments(self, labels, sigma2):
        """Case 1 mean and covariance of ``beta`` given labels and ``sigma^2``."""
        Xz = self.X * self.masks[labels]
        prec = (self.XtX / self.g + Xz.T @ Xz) / sigma2
        lin = (self.XtX @ self.M / self.g + Xz.T @ self.y) / sigma2
        cov = np.linalg.inv(prec)
        return cov @ lin, cov

    def model_conditional_moments(self, index: int, labels, sigma2):
        """Case 2 mean and covariance of ``beta_j`` for component ``index``."""
        cols = list(self.models[index].columns)
        sel = labels == index
        Xj = self.X[sel][:, cols]
        Mj = self.M[cols]
        G = self.sub_gram[index]
        prec = (G / self.g + Xj.T @ Xj) / sigma2
        lin = (G @ Mj / self.g + Xj.T @ self.y[sel]) / sigma2
        cov = np.linalg.inv(prec)
        return cov @ lin, cov

    def step(self, state: RegressionState, rng) -> RegressionState:
        """Weights, coefficients and variance given the labels, then new labels."""
        counts = np.bincount(state.labels, minlength=self.K)
        lw = sample_log_dirichlet(counts + self.a0, rng)
        s2 = state.sigma2
        labels = state.labels
        if self.case is Case.SHARED_BETA:
            Xz = self.X * self.masks[labels]
            prec = (self.XtX / self.g + Xz.T @ Xz) / s2
            lin = (self.XtX @ self.M / self.g + Xz.T @ self.y) / s2
            beta = self._draw_gaussian(prec, lin, rng)
            r = self.y - Xz @ beta
            d = beta - self.M
            shape = 0.5 * (self.n + self.p)
            rate = 0.5 * float(r @ r) + 0.5 * float(d @ self.XtX @ d) / self.g
        else:
            beta = np.zeros((self.K, self.p))
            rate = 0.0
            size = 0
            for j, m in enumerate(self.models):
                cols = list(m.columns)
                sel = labels == j
                Xj = self.X[sel][:, cols]
                yj = self.y[sel]
                Mj = self.M[cols]
                G = self.sub_gram[j]
                prec = (G / self.g + Xj.T @ Xj) / s2
                lin = (G @ Mj / self.g + Xj.T @ yj) / s2
                bj = self._draw_gaussian(prec, lin, rng)
                beta[j, cols] = bj
                r = yj - Xj @ bj
                d = bj - Mj
                rate += 0.5 * float(r @ r) + 0.5 * float(d @ G @ d) / self.g
                size += len(cols)
            shape = 0.5 * (self.n + size)
        sigma2 = rate / rng.standard_gamma(shape)
        new = RegressionState(lw, beta, float(sigma2), labels)
        new.labels = self.sample_labels(new, rng)
        return new

    def flat_globals(self, state) -> np.ndarray:
        if self.case is Case.SHARED_BETA:
            return np.append(state.beta, state.sigma2)
        parts = [state.beta[j, list(m.columns)] for j, m in enumerate(self.models)]
        return np.append(np.concatenate(parts), state.sigma2)


def regression_gibbs_step_case1(state: RegressionState, sampler: RegressionSampler, rng):
    if sampler.case is not Case.SHARED_BETA:
        raise ConfigurationError("sampler is not configured for shared coefficients")
    return sampler.step(state, rng)


def regression_gibbs_step_case2(state: RegressionState, sampler: RegressionSampler, rng):
    if sampler.case is not Case.SEPARATE_BETA:
        raise ConfigurationError("sampler is not configured for separate coefficients")
    return sampler.step(state, rng)


def run_regression_gibbs(data: Dataset, a0: float, case, config: ChainConfig,
                         g: float | None = None, prior_mean=None) -> Trace:
    """Gibbs run of the variable-selection mixture; components follow :func:`enumerate_models`."""
    sampler = RegressionSampler(data, a0, case, g, prior_mean)
    spec_names = build_regression_mixture(data, a0, case, g, prior_mean).slot_names
    rng = np.random.default_rng(config.seed)
    state = sampler.initial_state(rng)
    keep = config.iterations - config.burn_in
    W = np.empty((keep, sampler.K))
    G = np.empty((keep, len(spec_names)))
    C = np.empty((keep, sampler.K), dtype=np.int64)
    for it in range(config.iterations):
        state = sampler.step(state, rng)
        t = it - config.burn_in
        if t >= 0:
            W[t] = state.weights
            G[t] = sampler.flat_globals(state)
            C[t] = np.bincount(state.labels, minlength=sampler.K)
    return Trace(W, G, np.ones(keep, bool), None, C, spec_names)


def gprior_log_marginal(data: Dataset, model: ModelIndex, g: float | None = None,
                        prior_mean=None) -> float:
    """Log marginal of one sub-regression under the g-prior and ``1/sigma^2``."""
    X = _check_design(data)
    y = data.y
    n = data.n
    g = float(n if g is None else g)
    cols = list(model.columns)
    Xj = X[:, cols]
    Mj = np.zeros(len(cols)) if prior_mean is None else np.asarray(prior_mean, float)[cols]
    r = y - Xj @ Mj
    fitted = Xj @ np.linalg.solve(Xj.T @ Xj, Xj.T @ r)
    Q = float(r @ r) - g / (1.0 + g) * float(r @ fitted)
    if not Q > 0:
        raise NumericGuardError("residual quadratic form is not positive")
    return float(-0.5 * n * math.log(math.pi) + special.gammaln(0.5 * n)
                 - 0.5 * len(cols) * math.log1p(g) - 0.5 * n * math.log(Q))


def gprior_model_posterior(data: Dataset, models, g: float | None = None,
                           prior_mean=None) -> np.ndarray:
    """Posterior model probabilities under equal prior weights."""
    logs = np.array([gprior_log_marginal(data, m, g, prior_mean) for m in models])
    return np.exp(logs - special.logsumexp(logs))


def simulate_regression_design(n: int, rng, beta=(2.0, -3.0, 0.0, 0.0), sigma: float = 1.0,
                               model: ModelIndex | None = None) -> Dataset:
    """``X1 ~ N(0, 1)``, ``X2 ~ Bernoulli(.5)``, ``X3 ~ U(10, 11)`` with an intercept.

    When ``model`` is given, coefficients outside its mask are zeroed.
    """
    X = np.column_stack([np.ones(n), rng.standard_normal(n),
                         (rng.random(n) < 0.5).astype(float), rng.uniform(10.0, 11.0, n)])
    b = np.asarray(beta, dtype=float)
    if model is not None:
        b = b * np.asarray(model.mask, dtype=float)
    y = X @ b + sigma * rng.standard_normal(n)
    return Dataset(y, X=X)


__all__ = [
    "Case", "GlmFit", "Link", "ModelIndex", "RegressionSampler", "RegressionState",
    "build_logit_probit_mixture", "build_regression_mixture", "enumerate_models",
    "fit_glm_mle", "gprior_log_marginal", "gprior_model_posterior",
    "logit_probit_mixture_log_posterior", "logit_probit_proposals", "regression_gibbs_step_case1",
    "regression_gibbs_step_case2", "rescale_ratio", "run_logit_probit", "run_regression_gibbs",
    "simulate_binary_regression", "simulate_regression_design",
]
