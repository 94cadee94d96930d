"""Log-posterior evaluation over label assignments.

Two branches share one interface: the collapsed posterior (connectivity
probabilities integrated out against their Beta prior, leaving a product of
Beta functions of block counts) and the known-connectivity posterior (plain
likelihood restricted to the feasible set). Values are reported up to a
state-independent constant; only differences between assignments under the
same data and configuration are meaningful.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigError
from .sbm import ConnectivityMatrix, sizes_feasible

INFEASIBLE_LOG_POSTERIOR = -math.inf


@dataclass(frozen=True)
class ModelConfig:
    """Everything that parameterizes prior, posterior, and chain."""

    n: int
    K: int
    alpha: float
    beta: float = 1.0
    kappa1: float = 1.0
    kappa2: float = 1.0
    xi: float = 1.0
    connectivity: ConnectivityMatrix | None = None

    def __post_init__(self):
        if self.K < 2:
            raise ConfigError("need at least two communities")
        if self.n < self.K:
            raise ConfigError("need at least one node per community")
        if self.kappa1 <= 0 or self.kappa2 <= 0:
            raise ConfigError("Beta prior shapes kappa1, kappa2 must be > 0")
        if self.xi < 1:
            raise ConfigError("inverse temperature xi must be >= 1")
        if self.beta < 1:
            raise ConfigError("truth balance parameter beta must be >= 1")
        if self.alpha <= self.beta:
            raise ConfigError("feasible-set parameter alpha must exceed beta")
        if self.connectivity is not None and self.connectivity.K != self.K:
            raise ConfigError("connectivity matrix size must match K")

    @property
    def known_connectivity(self):
        return self.connectivity is not None

    def size_bounds(self):
        return self.n / (self.alpha * self.K), self.alpha * self.n / self.K


@dataclass(frozen=True)
class LogPosterior:
    """value is log posterior up to a shared constant; infeasible states get
    the -inf sentinel so the sampler treats them as automatic rejections."""

    value: float
    feasible: bool


@dataclass(frozen=True)
class KnownBConstants:
    """Edge/pair weights of the known-connectivity posterior for homogeneous
    (p, q): log posterior = 2t* (within_edges - lambda* within_pairs) + const."""

    p: float
    q: float
    t_star: float = field(init=False)
    lambda_star: float = field(init=False)

    def __post_init__(self):
        p, q = self.p, self.q
        if not (0 < q < p < 1):
            raise ConfigError("known homogeneous connectivity needs 0 < q < p < 1")
        edge_logit = math.log(p * (1 - q) / (q * (1 - p)))
        object.__setattr__(self, "t_star", 0.5 * edge_logit)
        object.__setattr__(self, "lambda_star",
                           math.log((1 - q) / (1 - p)) / edge_logit)

    @property
    def edge_weight(self):
        """Coefficient of the within-community edge count (= 2 t*)."""
        return 2.0 * self.t_star

    @property
    def pair_weight(self):
        """Coefficient of the within-community pair count (= 2 t* lambda*)."""
        return self.edge_weight * self.lambda_star


def log_beta_function(a, b):
    """log Beta(a, b) = logGamma(a) + logGamma(b) - logGamma(a + b)."""
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _mode_and_weights(config):
    """Kernel mode plus the weight scalars/matrices it expects."""
    K = config.K
    empty = np.zeros((K, K))
    if config.connectivity is None:
        return _kernels.MODE_COLLAPSED, 0.0, 0.0, empty, empty
    cm = config.connectivity
    if cm.homogeneous:
        consts = KnownBConstants(cm.p, cm.q)
        return (_kernels.MODE_KNOWN_HOMOGENEOUS, consts.edge_weight,
                consts.pair_weight, empty, empty)
    entries = cm.entries
    if entries.min() <= 0 or entries.max() >= 1:
        raise ConfigError(
            "known heterogeneous connectivity needs entries strictly in (0, 1)")
    logit = np.log(entries / (1.0 - entries))
    log1m = np.log(1.0 - entries)
    return _kernels.MODE_KNOWN_GENERAL, 0.0, 0.0, logit, log1m


def log_posterior(stats, config):
    """Log posterior of an assignment from its cached count statistics.

    Collapsed branch: sum over blocks of log Beta(O_ab + kappa1,
    n_ab - O_ab + kappa2); empty blocks contribute the constant
    log Beta(kappa1, kappa2) so size-changing moves are priced consistently.
    Known-connectivity branch: edge/pair weighted within-community counts.

    Block terms are combined with an exactly rounded sum, so assignments
    with identical block-count multisets (label permutations) evaluate to
    identical floats.
    """
    if not sizes_feasible(stats.sizes, config.n, config.K, config.alpha):
        return LogPosterior(INFEASIBLE_LOG_POSTERIOR, False)
    mode, edge_w, pair_w, logit_b, log1m_b = _mode_and_weights(config)
    sizes = stats.sizes
    block_edges = stats.block_edges
    K = config.K
    if mode == _kernels.MODE_KNOWN_HOMOGENEOUS:
        within_edges = int(np.trace(block_edges))
        within_pairs = int(np.sum(sizes * (sizes - 1) // 2))
        value = edge_w * within_edges - pair_w * within_pairs
        return LogPosterior(value, True)
    terms = []
    for a in range(K):
        for b in range(a, K):
            pairs = (sizes[a] * (sizes[a] - 1) // 2 if a == b
                     else sizes[a] * sizes[b])
            edges = block_edges[a, b]
            if mode == _kernels.MODE_COLLAPSED:
                terms.append(log_beta_function(edges + config.kappa1,
                                               pairs - edges + config.kappa2))
            else:
                terms.append(edges * logit_b[a, b] + pairs * log1m_b[a, b])
    return LogPosterior(math.fsum(terms), True)


@dataclass(frozen=True)
class FlipMove:
    """Outcome of pricing a single-node relabel."""

    node: int
    old_label: int
    new_label: int
    delta: float
    feasible: bool


def flip_delta(state, node, new_label):
    """Log-posterior change for relabeling one node, touching only the 2K-1
    blocks involving the old and new labels.

    Uses the node's neighbor-community degree row, so the cost is
    O(K) plus the degree lookup. Returns a FlipMove whose delta is -inf when
    the move would leave the feasible set.
    """
    old = int(state.labels[node])
    if new_label == old:
        raise ValueError("new label must differ from the current label")
    if not 0 <= new_label < state.config.K:
        raise ValueError("new label out of range")
    mode, edge_w, pair_w, logit_b, log1m_b = _mode_and_weights(state.config)
    lo, hi = state.config.size_bounds()
    delta = _kernels.flip_log_posterior_delta(
        state.block_edges, state.sizes, state.node_comm_degrees[node],
        old, int(new_label), mode, state.config.kappa1, state.config.kappa2,
        edge_w, pair_w, logit_b, log1m_b, lo, hi)
    return FlipMove(node=int(node), old_label=old, new_label=int(new_label),
                    delta=float(delta), feasible=math.isfinite(delta))


def likelihood_modularity(stats):
    """Profile log likelihood with block rates replaced by their MLEs:
    sum over blocks of n_ab * tau(O_ab / n_ab), tau(x) = x log x +
    (1-x) log(1-x), with 0 log 0 = 0 and empty blocks skipped."""
    sizes = stats.sizes
    K = stats.K
    terms = []
    for a in range(K):
        for b in range(a, K):
            pairs = (sizes[a] * (sizes[a] - 1) // 2 if a == b
                     else sizes[a] * sizes[b])
            if pairs == 0:
                continue
            x = stats.block_edges[a, b] / pairs
            value = 0.0
            if 0.0 < x:
                value += x * math.log(x)
            if x < 1.0:
                value += (1.0 - x) * math.log(1.0 - x)
            terms.append(pairs * value)
    return math.fsum(terms)


def tempered_log_ratio(delta, xi):
    """Scale a log-posterior difference by the inverse temperature; the
    infeasible sentinel propagates."""
    if xi < 1:
        raise ConfigError("inverse temperature xi must be >= 1")
    return xi * delta
