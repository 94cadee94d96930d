"""Tempered single-flip Metropolis-Hastings chain over label assignments.

One chain owns one mutable ChainState; chains never share state. The heavy
loop lives in _kernels.run_steps, which run_chain drives in record-interval
chunks; stepping one iteration at a time through mh_step produces the exact
same trajectory as a chunked run with the same seed.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .analysis import misclassification_loss
from .errors import ConfigError
from .posterior import log_posterior, _mode_and_weights
from .sbm import count_statistics, confusion_counts, LabelAssignment

CACHE_RESYNC_INTERVAL = 10_000


@dataclass
class ChainState:
    """Current assignment with every cache the flip pricing needs:
    community sizes, block edge counts, per-node neighbor-community degrees,
    the cached log posterior, and the RNG state."""

    adjacency: object
    config: object
    labels: np.ndarray
    sizes: np.ndarray
    block_edges: np.ndarray
    node_comm_degrees: np.ndarray
    log_post: float
    iteration: int
    rng_state: np.ndarray
    truth: np.ndarray | None = None
    truth_overlap: np.ndarray | None = None
    max_cache_drift: float = 0.0
    _boxes: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_labels(cls, adjacency, labels, config, seed, truth=None):
        labels = np.asarray(labels, dtype=np.int64).copy()
        stats = count_statistics(adjacency, labels, config.K)
        post = log_posterior(stats, config)
        if not post.feasible:
            raise ConfigError("initial assignment lies outside the feasible set")
        degree_table = np.zeros((adjacency.n, config.K), dtype=np.int64)
        lo, hi = adjacency.edge_arrays
        np.add.at(degree_table, (lo, labels[hi]), 1)
        np.add.at(degree_table, (hi, labels[lo]), 1)
        overlap = None
        if truth is not None:
            truth = np.asarray(truth, dtype=np.int64)
            overlap = confusion_counts(labels, truth, config.K)
        return cls(adjacency=adjacency, config=config, labels=labels,
                   sizes=stats.sizes.copy(), block_edges=stats.block_edges.copy(),
                   node_comm_degrees=degree_table, log_post=post.value,
                   iteration=0, rng_state=_kernels.seed_state(np.uint64(seed)),
                   truth=truth, truth_overlap=overlap)

    def statistics(self):
        return LabelAssignment(labels=self.labels.copy(), K=self.config.K,
                               sizes=self.sizes.copy(),
                               block_edges=self.block_edges.copy())

    def recomputed_log_posterior(self):
        return log_posterior(self.statistics(), self.config).value

    def matches_truth(self):
        if self.truth_overlap is None:
            raise ConfigError("chain was built without reference labels")
        return bool(_kernels._truth_overlap_complete(self.truth_overlap,
                                                     self.adjacency.n))


@dataclass(frozen=True)
class StepInfo:
    """What a single chain step did."""

    accepted: bool
    lazy_stay: bool
    node: int | None
    new_label: int | None
    delta: float | None


@dataclass(frozen=True)
class Trajectory:
    """Thinned chain record; first row is the initial state at iteration 0."""

    iterations: np.ndarray
    log_posterior: np.ndarray
    loss: np.ndarray
    accepted: np.ndarray
    thin: int


@dataclass(frozen=True)
class RunResult:
    trajectory: Trajectory
    labels: np.ndarray
    final_log_posterior: float
    hitting_time: int | None
    accepted_steps: int
    seconds: float
    label_history: np.ndarray | None = None


def _ensure_boxes(state):
    boxes = state._boxes
    if not boxes:
        boxes["log_post"] = np.zeros(1, dtype=np.float64)
        boxes["proposal"] = np.zeros(3, dtype=np.int64)
        boxes["delta"] = np.zeros(1, dtype=np.float64)
        boxes["drift"] = np.zeros(1, dtype=np.float64)
        boxes["hit"] = np.full(1, -1, dtype=np.int64)
        boxes["mode"] = _mode_and_weights(state.config)
    return boxes


def _advance(state, num_steps, lazy, resync_every=CACHE_RESYNC_INTERVAL):
    """Drive the kernel num_steps iterations; returns the acceptance count."""
    boxes = _ensure_boxes(state)
    mode, edge_w, pair_w, logit_b, log1m_b = boxes["mode"]
    boxes["log_post"][0] = state.log_post
    lo, hi = state.config.size_bounds()
    track_truth = state.truth is not None
    if track_truth:
        overlap, truth = state.truth_overlap, state.truth
    else:
        overlap = np.zeros((state.config.K, state.config.K), dtype=np.int64)
        truth = np.zeros(1, dtype=np.int64)
    accepts = _kernels.run_steps(
        state.adjacency.indptr, state.adjacency.indices, state.labels,
        state.sizes, state.block_edges, state.node_comm_degrees,
        state.rng_state, boxes["log_post"], mode,
        float(state.config.kappa1), float(state.config.kappa2),
        edge_w, pair_w, logit_b, log1m_b, float(state.config.xi),
        lo, hi, state.iteration, num_steps, lazy, resync_every,
        overlap, track_truth, boxes["hit"], boxes["proposal"],
        boxes["delta"], boxes["drift"], truth)
    state.log_post = float(boxes["log_post"][0])
    state.iteration += num_steps
    state.max_cache_drift = max(state.max_cache_drift,
                                float(boxes["drift"][0]))
    return int(accepts)


def mh_step(state):
    """One Metropolis-Hastings step: uniform node, uniform new label, accept
    with probability min{1, exp(xi * delta)}. Mutates state in place."""
    boxes = _ensure_boxes(state)
    boxes["proposal"][0] = -1
    accepts = _advance(state, 1, False)
    return StepInfo(accepted=bool(accepts), lazy_stay=False,
                    node=int(boxes["proposal"][0]),
                    new_label=int(boxes["proposal"][1]),
                    delta=float(boxes["delta"][0]))


def mh_step_lazy(state):
    """Lazy kernel: with probability 1/2 stay put (iteration still advances),
    otherwise take a regular step."""
    boxes = _ensure_boxes(state)
    boxes["proposal"][0] = -1  # untouched on a forced stay
    accepts = _advance(state, 1, True)
    stayed = boxes["proposal"][0] == -1
    return StepInfo(accepted=bool(accepts), lazy_stay=bool(stayed),
                    node=None if stayed else int(boxes["proposal"][0]),
                    new_label=None if stayed else int(boxes["proposal"][1]),
                    delta=None if stayed else float(boxes["delta"][0]))


def _loss_or_nan(labels, truth, K):
    if truth is None:
        return math.nan
    return misclassification_loss(labels, truth, K)


def run_chain(adjacency, initial_labels, config, iterations,
              record_every=None, truth=None, seed=0, lazy=False,
              keep_label_history=False):
    """Run the chain for a fixed iteration budget.

    Deterministic given the seed. Records (iteration, log posterior, loss
    vs truth when known, accepted flag of the step at that iteration) every
    record_every iterations (default: n) plus the final iteration. The
    initial assignment must be feasible.
    """
    if iterations < 0:
        raise ConfigError("iteration budget must be nonnegative")
    thin = record_every if record_every else adjacency.n
    if thin <= 0:
        raise ConfigError("record interval must be positive")
    state = ChainState.from_labels(adjacency, initial_labels, config, seed,
                                   truth=truth)
    _ensure_boxes(state)
    t0 = time.perf_counter()
    iters = [0]
    log_posts = [state.log_post]
    losses = [_loss_or_nan(state.labels, truth, config.K)]
    accepted = [False]
    history = [state.labels.copy()] if keep_label_history else None
    hit = 0 if (truth is not None and state.matches_truth()) else None
    total_accepts = 0
    remaining = iterations
    while remaining > 0:
        chunk = min(thin, remaining)
        total_accepts += _advance(state, chunk, lazy)
        remaining -= chunk
        iters.append(state.iteration)
        log_posts.append(state.log_post)
        losses.append(_loss_or_nan(state.labels, truth, config.K))
        accepted.append(bool(state._boxes["proposal"][2]))
        if keep_label_history:
            history.append(state.labels.copy())
    if hit is None and truth is not None:
        kernel_hit = int(state._boxes["hit"][0])
        hit = kernel_hit if kernel_hit >= 0 else None
    trajectory = Trajectory(iterations=np.asarray(iters, dtype=np.int64),
                            log_posterior=np.asarray(log_posts),
                            loss=np.asarray(losses),
                            accepted=np.asarray(accepted, dtype=bool),
                            thin=thin)
    return RunResult(trajectory=trajectory, labels=state.labels.copy(),
                     final_log_posterior=state.log_post,
                     hitting_time=hit, accepted_steps=total_accepts,
                     seconds=time.perf_counter() - t0,
                     label_history=(np.asarray(history)
                                    if keep_label_history else None))


def hitting_time(adjacency, initial_labels, config, truth, max_iterations,
                 seed=0):
    """First iteration at which the assignment matches the reference labels
    up to permutation, or None if the budget runs out."""
    state = ChainState.from_labels(adjacency, initial_labels, config, seed,
                                   truth=truth)
    if state.matches_truth():
        return 0
    _advance(state, max_iterations, False)
    kernel_hit = int(state._boxes["hit"][0])
    return kernel_hit if kernel_hit >= 0 else None
