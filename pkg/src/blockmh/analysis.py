"""Signal quantities, loss, condition checking, and the exact small-instance
chain analyzer for the clustering-space Markov chain."""

import math
from dataclasses import dataclass, asdict

import numpy as np

from . import _kernels
from .errors import ConfigError, GuardExceededError, NumericalError
from .posterior import log_posterior
from .sbm import (best_row_permutation, confusion_counts, count_statistics,
                  sizes_feasible)

EXACT_STATE_GUARD = 100_000
MIXING_TIME_CAP = 1_000_000
# extra propagation steps used to confirm the total variation distance has
# settled below epsilon before reporting a mixing time
_CONFIRM_WINDOW = 16


def renyi_half_divergence(p, q):
    """Order-1/2 Renyi divergence between Bernoulli(p) and Bernoulli(q):
    -2 log(sqrt(pq) + sqrt((1-p)(1-q)))."""
    if not (0.0 < p < 1.0 and 0.0 < q < 1.0):
        raise ValueError("p and q must lie strictly inside (0, 1)")
    return -2.0 * math.log(math.sqrt(p * q) + math.sqrt((1.0 - p) * (1.0 - q)))


def misclassification_loss(labels, reference, K):
    """Proportion of nodes misclassified after the best label permutation."""
    counts = confusion_counts(labels, reference, K)
    _, matched = best_row_permutation(counts)
    n = int(counts.sum())
    return (n - matched) / n


def canonical_labels(labels):
    """Relabel communities by order of first appearance, giving one unique
    representative per clustering."""
    labels = np.asarray(labels, dtype=np.int64)
    mapping = {}
    out = np.empty_like(labels)
    for idx in range(labels.shape[0]):
        lab = int(labels[idx])
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out[idx] = mapping[lab]
    return out


# ---------------------------------------------------------------------------
# signal strength and chain conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignalReport:
    """Finite-n signal summary.

    signal_excess is the finite-n surrogate of the asymptotic margin:
    1 - log(n) / (effective_n * divergence). Values <= 0 mean the instance
    sits below the strong-consistency threshold.
    """

    divergence: float
    effective_n: float
    signal_ratio: float
    signal_excess: float

    def to_dict(self):
        return asdict(self)


def signal_report(n, K, p, q, beta=1.0):
    divergence = renyi_half_divergence(p, q)
    effective_n = n / 2.0 if K == 2 else n / (K * beta)
    nbar_div = effective_n * divergence
    log_n = math.log(n)
    ratio = nbar_div / log_n
    excess = 1.0 - log_n / nbar_div if nbar_div > 0 else -math.inf
    return SignalReport(divergence=divergence, effective_n=effective_n,
                        signal_ratio=ratio, signal_excess=excess)


def mixing_time_budget(n, K, gamma0, xi, neg_log_posterior_z0, tau=0.1,
                       epsilon=0.05):
    """Iteration budget 4 K n^2 max{gamma0, n^-tau} (xi * (-log posterior of the
    start) + log(1/epsilon))."""
    scale = 4.0 * K * n * n * max(gamma0, n ** (-tau))
    return math.ceil(scale * (xi * neg_log_posterior_z0 + math.log(1.0 / epsilon)))


@dataclass(frozen=True)
class ConditionReport:
    """Finite-n evaluation of the sufficient conditions for rapid mixing.

    Asymptotic "tends to infinity" requirements are reported as their finite
    values and compared against a configurable largeness threshold;
    "tends to zero" requirements against its reciprocal. Thresholds involving
    the signal margin are finite only when signal_excess > 0.
    """

    signal: SignalReport
    below_consistency_threshold: bool
    init_balance_values: tuple
    init_balance_ok: bool
    xi_threshold: float
    xi_ok: bool
    weak_init_xi_threshold: float
    weak_init_ok: bool
    known_b_case1_ok: bool
    known_b_case2_value: float
    known_b_case2_threshold: float
    known_b_case2_ok: bool
    largeness_threshold: float
    mixing_budget: float | None

    def to_dict(self):
        data = asdict(self)
        data["signal"] = self.signal.to_dict()
        return data


def check_conditions(n, K, p, q, alpha, beta, gamma0, xi, tau=0.1,
                     largeness=10.0, neg_log_posterior_z0=None, epsilon=0.05):
    """Evaluate every sufficient condition at finite n.

    When neg_log_posterior_z0 (a value of -log posterior at the start) is
    supplied, the mixing-time budget is evaluated as well.
    """
    if gamma0 < 0:
        raise ConfigError("gamma0 must be nonnegative")
    signal = signal_report(n, K, p, q, beta)
    excess = signal.signal_excess
    below = excess <= 0
    n_div = n * signal.divergence
    smallness = 1.0 / largeness

    if K == 2:
        margin = 1.0 - K * gamma0
        value1 = margin ** 4 * n_div
        value2 = margin * (1.0 - K * beta * gamma0) * n
        init_values = (value1, value2)
        init_ok = margin > 0 and value1 >= largeness and value2 >= largeness
    else:
        init_values = (gamma0,)
        init_ok = gamma0 <= smallness

    if below:
        xi_threshold = math.inf
        weak_threshold = math.inf
    else:
        base = (1.0 - excess) / (2.0 * excess)
        if K == 2:
            margin = 1.0 - K * gamma0
            xi_threshold = ((1.0 - excess)
                            * max(1.0 / (2.0 * excess),
                                  alpha ** 2 / margin ** 4)
                            if margin > 0 else math.inf)
        else:
            xi_threshold = base
        weak_threshold = base
    xi_ok = xi > xi_threshold
    weak_ok = gamma0 <= smallness and xi >= weak_threshold

    known_margin = 1.0 - K * alpha * gamma0
    case2_value = known_margin ** 2 * n_div if known_margin > 0 else -math.inf
    if below or known_margin <= 0:
        case2_threshold = math.inf
    else:
        balance = (alpha / (4.0 * known_margin) if K == 2
                   else alpha / (4.0 * beta * known_margin))
        case2_threshold = (1.0 - excess) * max(1.0 / (2.0 * excess), balance)
    case2_ok = (known_margin > 0 and case2_value >= largeness
                and xi > case2_threshold)

    budget = None
    if neg_log_posterior_z0 is not None:
        budget = float(mixing_time_budget(n, K, gamma0, xi,
                                          neg_log_posterior_z0, tau, epsilon))
    return ConditionReport(signal=signal,
                           below_consistency_threshold=below,
                           init_balance_values=init_values,
                           init_balance_ok=bool(init_ok),
                           xi_threshold=float(xi_threshold),
                           xi_ok=bool(xi_ok),
                           weak_init_xi_threshold=float(weak_threshold),
                           weak_init_ok=bool(weak_ok),
                           known_b_case1_ok=bool(weak_ok),
                           known_b_case2_value=float(case2_value),
                           known_b_case2_threshold=float(case2_threshold),
                           known_b_case2_ok=bool(case2_ok),
                           largeness_threshold=float(largeness),
                           mixing_budget=budget)


# ---------------------------------------------------------------------------
# exact chain analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExactChain:
    """Exact clustering-space chain on an enumerated feasible state space.

    states holds one canonical label vector per clustering; transition is the
    row-stochastic single-flip kernel on that space ((P + I)/2 when lazy);
    stationary is the normalized posterior mass per clustering.
    """

    states: np.ndarray
    transition: np.ndarray
    lazy: bool
    log_post: np.ndarray
    stationary: np.ndarray
    eigenvalues: np.ndarray
    gap: float
    stationary_residual: float
    n: int
    K: int
    xi: float

    @property
    def num_states(self):
        return self.states.shape[0]

    def state_index(self, labels):
        key = tuple(int(v) for v in canonical_labels(labels))
        idx = self._index.get(key)
        if idx is None:
            raise ValueError("labels do not describe an enumerated state")
        return idx

    def spectral_bound(self, start, epsilon):
        """(-log stationary(start) + log(1/epsilon)) / gap."""
        idx = start if isinstance(start, (int, np.integer)) \
            else self.state_index(start)
        return (-math.log(self.stationary[idx])
                + math.log(1.0 / epsilon)) / self.gap


def _enumerate_canonical_states(n, K, lo, hi, guard):
    """All canonical label vectors whose community sizes lie in [lo, hi].

    Canonical means labels appear in first-occurrence order, so each
    clustering is produced exactly once. DFS with size pruning.
    """
    min_size = math.ceil(lo)
    states = []
    labels = np.zeros(n, dtype=np.int64)
    sizes = [0] * K

    def descend(pos, used):
        if len(states) > guard:
            raise GuardExceededError(
                f"exact chain state space exceeds guard ({guard})")
        if pos == n:
            if used == K and all(sizes[k] >= lo for k in range(K)):
                states.append(labels.copy())
            return
        remaining = n - pos
        deficit = sum(max(0, min_size - sizes[k]) for k in range(used))
        deficit += (K - used) * min_size
        if deficit > remaining:
            return
        top = min(used + 1, K)
        for lab in range(top):
            if sizes[lab] + 1 > hi:
                continue
            labels[pos] = lab
            sizes[lab] += 1
            descend(pos + 1, used + (1 if lab == used else 0))
            sizes[lab] -= 1

    descend(0, 0)
    return np.asarray(states, dtype=np.int64)


def enumerate_exact_chain(adjacency, config, lazy=False,
                          guard=EXACT_STATE_GUARD):
    """Build the exact single-flip transition matrix on the clustering space,
    its stationary distribution, and its spectral gap.

    Off-diagonal entries accumulate min{1, ratio^xi} / (n (K-1)) over every
    single flip landing in the target clustering; diagonals take the
    residual. The stationary vector is verified to be a fixed vector.
    """
    n, K = adjacency.n, config.K
    lo, hi = config.size_bounds()
    states = _enumerate_canonical_states(n, K, lo, hi, guard)
    num = states.shape[0]
    if num == 0:
        raise ConfigError("feasible set is empty for this configuration")
    index = {tuple(int(v) for v in row): i for i, row in enumerate(states)}

    log_posts = np.empty(num)
    for i in range(num):
        stats = count_statistics(adjacency, states[i], K)
        log_posts[i] = log_posterior(stats, config).value

    transition = np.zeros((num, num))
    proposal_weight = 1.0 / (n * (K - 1))
    xi = config.xi
    for s in range(num):
        base = states[s]
        for node in range(n):
            old = base[node]
            for lab in range(K):
                if lab == old:
                    continue
                flipped = base.copy()
                flipped[node] = lab
                sizes = np.bincount(flipped, minlength=K)
                if not sizes_feasible(sizes, n, K, config.alpha):
                    continue  # rejected proposal; mass stays on the diagonal
                t = index[tuple(int(v) for v in canonical_labels(flipped))]
                ratio = math.exp(min(0.0, xi * (log_posts[t] - log_posts[s])))
                transition[s, t] += proposal_weight * ratio
        transition[s, s] = 1.0 - transition[s].sum() + transition[s, s]
    if lazy:
        transition = 0.5 * (transition + np.eye(num))

    shifted = xi * (log_posts - log_posts.max())
    weights = np.exp(shifted)
    if weights.min() == 0.0:
        raise NumericalError(
            "stationary weights underflow; posterior too concentrated for "
            "exact analysis")
    stationary = weights / weights.sum()
    residual = float(np.abs(stationary @ transition - stationary).max())
    if residual > 1e-10:
        raise NumericalError(
            f"stationary distribution is not a fixed vector (residual "
            f"{residual:.3e})")

    sqrt_pi = np.sqrt(stationary)
    similar = transition * (sqrt_pi[:, None] / sqrt_pi[None, :])
    similar = 0.5 * (similar + similar.T)
    eigenvalues = np.linalg.eigvalsh(similar)
    gap = 1.0 - max(abs(eigenvalues[-2]), abs(eigenvalues[0]))

    chain = ExactChain(states=states, transition=transition, lazy=lazy,
                       log_post=log_posts, stationary=stationary,
                       eigenvalues=eigenvalues, gap=float(gap),
                       stationary_residual=residual, n=n, K=K, xi=xi)
    object.__setattr__(chain, "_index", index)
    return chain


def _start_index(chain, start):
    if isinstance(start, (int, np.integer)):
        return int(start)
    return chain.state_index(start)


def _tv_to_stationary(row, stationary):
    return 0.5 * float(np.abs(row - stationary).sum())


def tv_curve(chain, start, t_max):
    """Exact total variation distance to stationarity after 0..t_max steps,
    by distribution propagation."""
    idx = _start_index(chain, start)
    row = np.zeros(chain.num_states)
    row[idx] = 1.0
    curve = np.empty(t_max + 1)
    curve[0] = _tv_to_stationary(row, chain.stationary)
    for t in range(1, t_max + 1):
        row = row @ chain.transition
        curve[t] = _tv_to_stationary(row, chain.stationary)
    return np.arange(t_max + 1), curve


def exact_mixing_time(chain, start, epsilon, cap=MIXING_TIME_CAP):
    """Smallest t with TV(t') <= epsilon for all t' >= t, by iterated
    matrix-vector products; the last time the distance exceeded epsilon is
    tracked and a confirmation window guards against float jitter."""
    idx = _start_index(chain, start)
    row = np.zeros(chain.num_states)
    row[idx] = 1.0
    last_exceed = -1
    t = 0
    tv = _tv_to_stationary(row, chain.stationary)
    if tv > epsilon:
        last_exceed = 0
    while t - last_exceed <= _CONFIRM_WINDOW:
        if t >= cap:
            raise GuardExceededError(
                f"mixing time exceeds the {cap}-iteration cap")
        row = row @ chain.transition
        t += 1
        if _tv_to_stationary(row, chain.stationary) > epsilon:
            last_exceed = t
    return last_exceed + 1


def exact_mixing_times(chain, epsilon, cap=MIXING_TIME_CAP):
    """Mixing time from every start state at once, propagating all point
    masses together."""
    num = chain.num_states
    rows = np.eye(num)
    last_exceed = np.full(num, -1, dtype=np.int64)
    t = 0
    tvs = 0.5 * np.abs(rows - chain.stationary[None, :]).sum(axis=1)
    last_exceed[tvs > epsilon] = 0
    while t - last_exceed.max() <= _CONFIRM_WINDOW:
        if t >= cap:
            raise GuardExceededError(
                f"mixing time exceeds the {cap}-iteration cap")
        rows = rows @ chain.transition
        t += 1
        tvs = 0.5 * np.abs(rows - chain.stationary[None, :]).sum(axis=1)
        last_exceed[tvs > epsilon] = t
    return last_exceed + 1


def empirical_visit_distribution(chain, adjacency, config, initial_labels,
                                 steps, seed, lazy=False):
    """Visit frequencies of an actual simulated chain over the enumerated
    states. Only supported for K=2 and n <= 20 (bitmask state keying)."""
    from .sampler import ChainState, _ensure_boxes  # local: avoid cycle

    n = adjacency.n
    if config.K != 2 or n > 20:
        raise ConfigError("visit counting supports K=2 and n <= 20 only")
    lookup = np.full(1 << n, -1, dtype=np.int64)
    for i, row in enumerate(chain.states):
        key = 0
        for pos in range(n):
            if row[pos] == 1:
                key |= 1 << pos
        lookup[key] = i
    state = ChainState.from_labels(adjacency, initial_labels, config, seed)
    boxes = _ensure_boxes(state)
    mode, edge_w, pair_w, logit_b, log1m_b = boxes["mode"]
    boxes["log_post"][0] = state.log_post
    lo, hi = config.size_bounds()
    counts = np.zeros(chain.num_states, dtype=np.int64)
    _kernels.run_steps_with_visits(
        adjacency.indptr, adjacency.indices, state.labels, state.sizes,
        state.block_edges, state.node_comm_degrees, state.rng_state,
        boxes["log_post"], mode, float(config.kappa1), float(config.kappa2),
        edge_w, pair_w, logit_b, log1m_b, float(config.xi), lo, hi,
        steps, lazy, lookup, counts)
    if counts.sum() != steps + 1:
        raise NumericalError("chain visited a state outside the enumeration")
    return counts / counts.sum()


# ---------------------------------------------------------------------------
# posterior floor diagnostic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FloorReport:
    """Both sides of the initial-posterior floor, reported for calibration.

    lhs approximates the normalized log posterior of the start by anchoring
    the normalizer at the reference assignment: log posterior(Z0) - log
    posterior(truth) - log K!. rhs is -constant * n^2 * divergence * loss.
    """

    lhs: float
    rhs: float
    divergence: float
    loss: float
    constant: float
    implied_constant: float

    def to_dict(self):
        return asdict(self)


def log_posterior_floor(initial_labels, adjacency, config, truth,
                        constant=1.0, p=None, q=None):
    """Diagnostic comparison of log posterior(Z0) against the floor
    -constant n^2 I loss(Z0, truth); no pass/fail, report only.

    p and q default to block-rate estimates under the reference labels.
    """
    n, K = adjacency.n, config.K
    if p is None or q is None:
        stats = count_statistics(adjacency, truth, K)
        pairs = stats.block_pairs
        within_pairs = int(np.trace(pairs))
        cross_pairs = int(pairs.sum() - within_pairs)
        within_edges = int(np.trace(stats.block_edges))
        cross_edges = adjacency.edge_count - within_edges
        p = within_edges / within_pairs if within_pairs else 0.5
        q = max(cross_edges / cross_pairs if cross_pairs else 0.0, 1e-12)
        p = min(max(p, 1e-12), 1 - 1e-12)
        q = min(max(q, 1e-12), 1 - 1e-12)
    divergence = renyi_half_divergence(p, q)
    loss = misclassification_loss(initial_labels, truth, K)
    post_start = log_posterior(count_statistics(adjacency, initial_labels, K),
                               config).value
    post_truth = log_posterior(count_statistics(adjacency, truth, K),
                               config).value
    lhs = post_start - post_truth - math.lgamma(K + 1)
    rhs = -constant * n * n * divergence * loss
    scale = n * n * divergence * loss
    implied = -lhs / scale if scale > 0 else math.nan
    return FloorReport(lhs=lhs, rhs=rhs, divergence=divergence, loss=loss,
                       constant=constant, implied_constant=implied)
