"""Hypothesis testing by estimating the weights of an encompassing mixture."""

__version__ = "0.1.0"

from .distributions import Family, censored_log_density, log_density, moment_match, sample
from .mixture import (
    Allocation,
    ComponentBinding,
    Dataset,
    MixtureSpec,
    WeightPrior,
    allocation_stats,
    completed_log_likelihood,
    mixture_log_likelihood,
    sample_allocations,
    sample_weights_conditional,
)
from .samplers import (ChainConfig, FromPrior, LogitRandomWalk, MixedAlpha, PosteriorSummary, Trace,
                       run_gibbs, run_mh, summarize)
from .pairs import PairKind, build_pair, pair_bayes_factor, pair_conditionals, pair_proposals, run_pair
from .oracles import BayesFactorResult, exhaustive_alpha_posterior, quadrature_marginal
from .glm import Case, fit_glm_mle, rescale_ratio, run_logit_probit, run_regression_gibbs
from .survival import propriety_check, run_survival_test
from .experiments import ExperimentConfig, consistency_harness, ingest_csv, run_experiment, simulate_dataset
