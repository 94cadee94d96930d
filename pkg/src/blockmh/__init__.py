"""Bayesian community detection on stochastic block models via a tempered
single-flip Metropolis-Hastings sampler, with exact small-instance chain
analysis and reproducible experiment drivers."""

from .analysis import (ConditionReport, ExactChain, SignalReport,
                       canonical_labels, check_conditions,
                       empirical_visit_distribution, enumerate_exact_chain,
                       exact_mixing_time, exact_mixing_times,
                       log_posterior_floor, misclassification_loss,
                       mixing_time_budget, renyi_half_divergence,
                       signal_report, tv_curve)
from .errors import (BlockMHError, ConfigError, GuardExceededError,
                     NumericalError)
from .initializers import (InitSpec, corrupted_truth_init, project_to_feasible,
                           spectral_init, uniform_feasible_init)
from .posterior import (FlipMove, KnownBConstants, LogPosterior, ModelConfig,
                        flip_delta, likelihood_modularity, log_beta_function,
                        log_posterior, tempered_log_ratio)
from .sampler import (ChainState, RunResult, StepInfo, Trajectory,
                      hitting_time, mh_step, mh_step_lazy, run_chain)
from .sbm import (Adjacency, ConnectivityMatrix, DiscrepancyMatrix,
                  LabelAssignment, count_statistics, discrepancy,
                  generate_sbm, in_feasible_set)

__version__ = "0.1.0"

__all__ = [
    "Adjacency", "BlockMHError", "ChainState", "ConditionReport",
    "ConfigError", "ConnectivityMatrix", "DiscrepancyMatrix", "ExactChain",
    "FlipMove", "GuardExceededError", "InitSpec", "KnownBConstants",
    "LabelAssignment", "LogPosterior", "ModelConfig", "NumericalError",
    "RunResult", "SignalReport", "StepInfo", "Trajectory",
    "canonical_labels", "check_conditions", "corrupted_truth_init",
    "count_statistics", "discrepancy", "empirical_visit_distribution",
    "enumerate_exact_chain", "exact_mixing_time", "exact_mixing_times",
    "flip_delta", "generate_sbm", "hitting_time", "in_feasible_set",
    "likelihood_modularity", "log_beta_function", "log_posterior",
    "log_posterior_floor", "mh_step", "mh_step_lazy",
    "misclassification_loss", "mixing_time_budget", "project_to_feasible",
    "renyi_half_divergence", "run_chain", "signal_report", "spectral_init",
    "tempered_log_ratio", "tv_curve", "uniform_feasible_init",
]
