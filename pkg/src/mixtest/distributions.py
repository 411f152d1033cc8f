"""Log densities, samplers and moment utilities for the component families.

All densities are returned on the natural-log scale.  Points outside a
family's support evaluate to ``LOG_ZERO`` (``-inf``) instead of raising, so
that allocation probabilities can be normalised across components with
different supports.
"""

from __future__ import annotations

import enum
import math
from typing import Sequence

import numpy as np
from scipy import special

from .errors import ParameterDomainError, UnsupportedOperationError

LOG_ZERO = -np.inf

# Euler-Mascheroni constant, 20 significant digits.
EULER_GAMMA = 0.57721566490153286061

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


class Family(enum.Enum):
    POISSON = "poisson"
    GEOMETRIC_FAILURES = "geometric"
    NORMAL = "normal"
    LAPLACE = "laplace"
    GUMBEL = "gumbel"
    LOGISTIC = "logistic"
    BERNOULLI_LOGIT = "bernoulli-logit"
    BERNOULLI_PROBIT = "bernoulli-probit"

    @property
    def n_params(self) -> int:
        return 1 if self in _ONE_PARAM else 2

    @property
    def discrete(self) -> bool:
        return self in _DISCRETE


_ONE_PARAM = {Family.POISSON, Family.GEOMETRIC_FAILURES,
              Family.BERNOULLI_LOGIT, Family.BERNOULLI_PROBIT}
_DISCRETE = {Family.POISSON, Family.GEOMETRIC_FAILURES,
             Family.BERNOULLI_LOGIT, Family.BERNOULLI_PROBIT}
_CENSORABLE = {Family.NORMAL, Family.GUMBEL, Family.LOGISTIC}


def _split(family: Family, params) -> list:
    """Validate ``params`` and return them as a list of float arrays."""
    values = [np.asarray(p, dtype=float) for p in params]
    if len(values) != family.n_params:
        raise ParameterDomainError(
            f"{family.value} takes {family.n_params} parameter(s), got {len(values)}")
    if family in (Family.POISSON,):
        if not np.all(values[0] > 0):
            raise ParameterDomainError("Poisson rate must be > 0")
    elif family in (Family.GEOMETRIC_FAILURES, Family.BERNOULLI_LOGIT, Family.BERNOULLI_PROBIT):
        if not np.all((values[0] > 0) & (values[0] < 1)):
            raise ParameterDomainError(f"{family.value} probability must lie in (0, 1)")
    else:
        if not np.all(np.isfinite(values[0])):
            raise ParameterDomainError("location must be finite")
        if not np.all(values[1] > 0):
            raise ParameterDomainError(f"{family.value} scale must be > 0")
    return values


def _count_support(x):
    x = np.asarray(x, dtype=float)
    ok = (x >= 0) & (x == np.floor(x))
    return x, ok


def log_density(family: Family, params: Sequence, x):
    """Log density (or log mass) of ``family`` at ``x``.

    ``params`` follows the per-family convention: Poisson ``(rate,)``,
    GeometricFailures ``(p,)``, Bernoulli variants ``(success_prob,)``, and
    ``(location, scale)`` for the continuous families.  Arguments broadcast.
    Scalar input gives a Python float.
    """
    values = _split(family, params)
    scalar = np.ndim(x) == 0 and all(np.ndim(v) == 0 for v in values)
    out = _log_density(family, values, x)
    return float(out) if scalar else out


def _log_density(family, values, x):
    if family is Family.POISSON:
        lam = values[0]
        x, ok = _count_support(x)
        xs = np.where(ok, x, 0.0)
        out = xs * np.log(lam) - lam - special.gammaln(xs + 1.0)
        return np.where(ok, out, LOG_ZERO)
    if family is Family.GEOMETRIC_FAILURES:
        p = values[0]
        x, ok = _count_support(x)
        xs = np.where(ok, x, 0.0)
        out = np.log(p) + xs * np.log1p(-p)
        return np.where(ok, out, LOG_ZERO)
    if family in (Family.BERNOULLI_LOGIT, Family.BERNOULLI_PROBIT):
        p = values[0]
        x = np.asarray(x, dtype=float)
        out = np.where(x == 1, np.log(p), np.log1p(-p))
        return np.where((x == 0) | (x == 1), out, LOG_ZERO)

    loc, scale = values
    z = (np.asarray(x, dtype=float) - loc) / scale
    if family is Family.NORMAL:
        return -0.5 * z * z - np.log(scale) - _HALF_LOG_2PI
    if family is Family.LAPLACE:
        return -np.abs(z) - np.log(2.0 * scale)
    if family is Family.GUMBEL:
        # far left tail overflows to -inf, the correct limit
        with np.errstate(over="ignore"):
            return -z - np.exp(-z) - np.log(scale)
    if family is Family.LOGISTIC:
        return -z - 2.0 * np.logaddexp(0.0, -z) - np.log(scale)
    raise UnsupportedOperationError(family)


def censored_log_density(family: Family, params: Sequence, x, censored):
    """Log contribution of a possibly censored observation.

    Uncensored points contribute the log density.  Censored points
    contribute the log distribution function on the response scale
    ``y = -log(time)``, which is the survivor function of the original time
    evaluated at ``exp(-y)``:

    * Normal: ``log Phi((y - loc) / scale)``
    * Gumbel: ``-exp(-(y - loc) / scale)``
    * Logistic: ``-log(1 + exp(-(y - loc) / scale))``
    """
    if family not in _CENSORABLE:
        raise UnsupportedOperationError(f"censoring is not defined for {family.value}")
    values = _split(family, params)
    censored = np.asarray(censored, dtype=bool)
    scalar = np.ndim(x) == 0 and censored.ndim == 0 and all(np.ndim(v) == 0 for v in values)
    dens = _log_density(family, values, x)
    if not np.any(censored):
        out = dens
    else:
        out = np.where(censored, _log_cdf(family, values, x), dens)
    return float(out) if scalar else out


def _log_cdf(family, values, x):
    loc, scale = values
    z = (np.asarray(x, dtype=float) - loc) / scale
    if family is Family.NORMAL:
        return special.log_ndtr(z)
    if family is Family.GUMBEL:
        with np.errstate(over="ignore"):
            return -np.exp(-z)
    if family is Family.LOGISTIC:
        return -np.logaddexp(0.0, -z)
    raise UnsupportedOperationError(family)


def cdf(family: Family, params: Sequence, x):
    """Distribution function of the continuous censorable families."""
    if family not in _CENSORABLE:
        raise UnsupportedOperationError(f"cdf is not provided for {family.value}")
    return np.exp(_log_cdf(family, _split(family, params), x))


def bernoulli_log_density_linear(family: Family, eta, y):
    """Bernoulli log mass with success probability ``link(eta)``.

    Evaluated directly from the linear predictor so that probabilities
    close to 0 or 1 keep full precision on the log scale.
    """
    eta = np.asarray(eta, dtype=float)
    y = np.asarray(y, dtype=float)
    if family is Family.BERNOULLI_LOGIT:
        log_p = -np.logaddexp(0.0, -eta)
        log_q = -np.logaddexp(0.0, eta)
    elif family is Family.BERNOULLI_PROBIT:
        log_p = special.log_ndtr(eta)
        log_q = special.log_ndtr(-eta)
    else:
        raise UnsupportedOperationError(f"{family.value} has no linear predictor form")
    return np.where(y == 1, log_p, np.where(y == 0, log_q, LOG_ZERO))


def sample(family: Family, params: Sequence, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` i.i.d. values from ``family``."""
    if count < 1:
        raise ParameterDomainError("count must be a positive integer")
    values = [float(v) for v in _split(family, params)]
    if family is Family.POISSON:
        return rng.poisson(values[0], size=count).astype(float)
    if family is Family.GEOMETRIC_FAILURES:
        # numpy counts trials, this family counts failures
        return (rng.geometric(values[0], size=count) - 1).astype(float)
    if family in (Family.BERNOULLI_LOGIT, Family.BERNOULLI_PROBIT):
        return (rng.random(count) < values[0]).astype(float)
    loc, scale = values
    if family is Family.NORMAL:
        return rng.normal(loc, scale, size=count)
    if family is Family.LAPLACE:
        return rng.laplace(loc, scale, size=count)
    if family is Family.GUMBEL:
        return rng.gumbel(loc, scale, size=count)
    if family is Family.LOGISTIC:
        return rng.logistic(loc, scale, size=count)
    raise UnsupportedOperationError(family)


def mean_variance(family: Family, params: Sequence) -> tuple[float, float]:
    values = [float(v) for v in _split(family, params)]
    if family is Family.POISSON:
        return values[0], values[0]
    if family is Family.GEOMETRIC_FAILURES:
        p = values[0]
        return (1 - p) / p, (1 - p) / p ** 2
    if family in (Family.BERNOULLI_LOGIT, Family.BERNOULLI_PROBIT):
        p = values[0]
        return p, p * (1 - p)
    loc, scale = values
    if family is Family.NORMAL:
        return loc, scale ** 2
    if family is Family.LAPLACE:
        return loc, 2 * scale ** 2
    if family is Family.GUMBEL:
        return loc + EULER_GAMMA * scale, math.pi ** 2 * scale ** 2 / 6
    if family is Family.LOGISTIC:
        return loc, math.pi ** 2 * scale ** 2 / 3
    raise UnsupportedOperationError(family)


def moment_match(location: float, variance: float) -> dict[str, tuple[float, float]]:
    """Normal, Gumbel and Logistic parameters sharing a mean and variance.

    Returns ``(location, scale)`` pairs keyed by ``"normal"``, ``"gumbel"``
    and ``"logistic"``.
    """
    if not variance > 0:
        raise ParameterDomainError(f"variance must be > 0, got {variance}")
    beta = math.sqrt(6.0 * variance) / math.pi
    zeta = math.sqrt(3.0 * variance) / math.pi
    return {
        "normal": (float(location), math.sqrt(variance)),
        "gumbel": (location - EULER_GAMMA * beta, beta),
        "logistic": (float(location), zeta),
    }


def moment_matched_params(family: Family, location, variance):
    """Vectorised version of :func:`moment_match` for a single family."""
    variance = np.asarray(variance, dtype=float)
    if not np.all(variance > 0):
        raise ParameterDomainError("variance must be > 0")
    if family is Family.NORMAL:
        return location, np.sqrt(variance)
    if family is Family.GUMBEL:
        beta = np.sqrt(6.0 * variance) / math.pi
        return location - EULER_GAMMA * beta, beta
    if family is Family.LOGISTIC:
        return location, np.sqrt(3.0 * variance) / math.pi
    raise UnsupportedOperationError(f"moment matching is not defined for {family.value}")
