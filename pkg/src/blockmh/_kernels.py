"""Compiled inner loops for the single-flip Metropolis-Hastings chain.

Everything in this module operates on plain ndarrays so it can be jitted
with numba. If numba is unavailable the same functions run as pure Python
(slowly, but with identical results).

RNG: xoshiro256++ seeded through splitmix64 from a single 64-bit seed.
Draw order per chain step is fixed and part of the trajectory contract:

    [lazy chains only] one uniform coin; u < 0.5 means "stay put"
    1. uniform u_node     -> node index  j = floor(u_node * n)
    2. uniform u_label    -> candidate c = floor(u_label * (K-1)),
                             shifted past the current label of j
    3. uniform u_accept   -> accept iff delta >= 0 or u_accept < exp(xi*delta)

u_accept is always consumed, including for infeasible (auto-rejected)
proposals, so streams stay aligned across parameterizations.
"""

import math

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a hard dependency
    NUMBA_AVAILABLE = False
    np.seterr(over="ignore")  # uint64 wraparound in the pure-Python RNG path

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


U64 = np.uint64

# collapsed posterior / known homogeneous B / known general B
MODE_COLLAPSED = 0
MODE_KNOWN_HOMOGENEOUS = 1
MODE_KNOWN_GENERAL = 2


# ---------------------------------------------------------------------------
# xoshiro256++
# ---------------------------------------------------------------------------

@njit(cache=True)
def seed_state(seed):
    """Expand a 64-bit seed into a xoshiro256++ state via splitmix64."""
    state = np.empty(4, dtype=np.uint64)
    z = U64(seed)
    for i in range(4):
        z = z + U64(0x9E3779B97F4A7C15)
        t = z
        t = (t ^ (t >> U64(30))) * U64(0xBF58476D1CE4E5B9)
        t = (t ^ (t >> U64(27))) * U64(0x94D049BB133111EB)
        state[i] = t ^ (t >> U64(31))
    return state


@njit(cache=True)
def next_u64(state):
    x = state[0] + state[3]
    result = ((x << U64(23)) | (x >> U64(41))) + state[0]
    t = state[1] << U64(17)
    state[2] ^= state[0]
    state[3] ^= state[1]
    state[1] ^= state[2]
    state[0] ^= state[3]
    state[2] ^= t
    state[3] = (state[3] << U64(45)) | (state[3] >> U64(19))
    return result


@njit(cache=True)
def next_uniform(state):
    """Uniform double in [0, 1) with 53 random bits."""
    return float(next_u64(state) >> U64(11)) * (1.0 / 9007199254740992.0)


# ---------------------------------------------------------------------------
# posterior block terms
# ---------------------------------------------------------------------------

@njit(cache=True)
def log_beta_block(edges, pairs, kappa1, kappa2):
    """log Beta(edges + kappa1, pairs - edges + kappa2) for one block."""
    a = edges + kappa1
    b = pairs - edges + kappa2
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


@njit(cache=True)
def _pairs_within(size):
    return size * (size - 1) // 2


@njit(cache=True)
def log_posterior_from_counts(block_edges, sizes, mode, kappa1, kappa2,
                              edge_weight, pair_weight, logit_b, log1m_b):
    """Unnormalized log posterior of a feasible assignment, from cached counts.

    Summation runs over blocks in (a, b) index order; the Python-level
    evaluator uses an order-independent exact sum instead.
    """
    K = sizes.shape[0]
    total = 0.0
    if mode == MODE_COLLAPSED:
        for a in range(K):
            for b in range(a, K):
                pairs = _pairs_within(sizes[a]) if a == b else sizes[a] * sizes[b]
                total += log_beta_block(float(block_edges[a, b]), float(pairs),
                                        kappa1, kappa2)
    elif mode == MODE_KNOWN_HOMOGENEOUS:
        within_edges = 0
        within_pairs = 0
        for a in range(K):
            within_edges += block_edges[a, a]
            within_pairs += _pairs_within(sizes[a])
        total = edge_weight * float(within_edges) - pair_weight * float(within_pairs)
    else:
        for a in range(K):
            for b in range(a, K):
                pairs = _pairs_within(sizes[a]) if a == b else sizes[a] * sizes[b]
                total += (float(block_edges[a, b]) * logit_b[a, b]
                          + float(pairs) * log1m_b[a, b])
    return total


@njit(cache=True)
def flip_log_posterior_delta(block_edges, sizes, degrees_j, old, new,
                             mode, kappa1, kappa2, edge_weight, pair_weight,
                             logit_b, log1m_b, size_lo, size_hi):
    """log posterior change for relabeling one node from `old` to `new`.

    degrees_j[k] is the number of neighbors of the flipped node currently in
    community k. Only the 2K-1 blocks touching `old` or `new` change. Returns
    -inf when the move would leave the feasible set.
    """
    K = sizes.shape[0]
    n_old = sizes[old]
    n_new = sizes[new]
    if float(n_old - 1) < size_lo or float(n_new + 1) > size_hi:
        return -np.inf

    if mode == MODE_KNOWN_HOMOGENEOUS:
        d_within = float(degrees_j[new] - degrees_j[old])
        d_pairs = float(n_new - n_old + 1)
        return edge_weight * d_within - pair_weight * d_pairs

    delta = 0.0
    # blocks (a, old) for every a
    for a in range(K):
        edges0 = block_edges[a, old]
        if a == old:
            pairs0 = _pairs_within(n_old)
            edges1 = edges0 - degrees_j[old]
            pairs1 = _pairs_within(n_old - 1)
        elif a == new:
            pairs0 = n_new * n_old
            edges1 = edges0 + degrees_j[old] - degrees_j[new]
            pairs1 = (n_new + 1) * (n_old - 1)
        else:
            pairs0 = sizes[a] * n_old
            edges1 = edges0 - degrees_j[a]
            pairs1 = sizes[a] * (n_old - 1)
        if mode == MODE_COLLAPSED:
            delta += (log_beta_block(float(edges1), float(pairs1), kappa1, kappa2)
                      - log_beta_block(float(edges0), float(pairs0), kappa1, kappa2))
        else:
            delta += (float(edges1 - edges0) * logit_b[a, old]
                      + float(pairs1 - pairs0) * log1m_b[a, old])
    # blocks (a, new) for a != old; (old, new) was covered above
    for a in range(K):
        if a == old:
            continue
        edges0 = block_edges[a, new]
        if a == new:
            pairs0 = _pairs_within(n_new)
            edges1 = edges0 + degrees_j[new]
            pairs1 = _pairs_within(n_new + 1)
        else:
            pairs0 = sizes[a] * n_new
            edges1 = edges0 + degrees_j[a]
            pairs1 = sizes[a] * (n_new + 1)
        if mode == MODE_COLLAPSED:
            delta += (log_beta_block(float(edges1), float(pairs1), kappa1, kappa2)
                      - log_beta_block(float(edges0), float(pairs0), kappa1, kappa2))
        else:
            delta += (float(edges1 - edges0) * logit_b[a, new]
                      + float(pairs1 - pairs0) * log1m_b[a, new])
    return delta


@njit(cache=True)
def apply_flip(indptr, indices, labels, sizes, block_edges, degree_table,
               node, new):
    """Commit an accepted flip to every cached statistic."""
    K = sizes.shape[0]
    old = labels[node]
    dj = degree_table[node]
    # block edge counts touching old / new
    for a in range(K):
        if a == old:
            block_edges[old, old] -= dj[old]
        elif a == new:
            moved = dj[old] - dj[new]
            block_edges[a, old] += moved
            block_edges[old, a] += moved
        else:
            block_edges[a, old] -= dj[a]
            block_edges[old, a] -= dj[a]
    for a in range(K):
        if a == old:
            continue
        if a == new:
            block_edges[new, new] += dj[new]
        else:
            block_edges[a, new] += dj[a]
            block_edges[new, a] += dj[a]
    sizes[old] -= 1
    sizes[new] += 1
    labels[node] = new
    for idx in range(indptr[node], indptr[node + 1]):
        neighbor = indices[idx]
        degree_table[neighbor, old] -= 1
        degree_table[neighbor, new] += 1


@njit(cache=True)
def _truth_overlap_complete(overlap, n):
    """True iff some label permutation matches the reference labels exactly.

    overlap[a, b] counts nodes with current label a and reference label b.
    Since every reference community is nonempty, the assignment matches up
    to permutation iff each row's mass sits in a single column.
    """
    K = overlap.shape[0]
    total = 0
    for a in range(K):
        best = 0
        for b in range(K):
            if overlap[a, b] > best:
                best = overlap[a, b]
        total += best
    return total == n


@njit(cache=True)
def run_steps(indptr, indices, labels, sizes, block_edges, degree_table,
              rng_state, log_post_box, mode, kappa1, kappa2,
              edge_weight, pair_weight, logit_b, log1m_b,
              xi, size_lo, size_hi, start_iteration, num_steps, lazy,
              resync_every, truth_overlap, track_truth, hit_box,
              proposal_box, delta_box, drift_box, truth_labels):
    """Advance the chain `num_steps` iterations in place.

    Returns the number of accepted moves; the last step's acceptance flag is
    encoded in proposal_box[2]. hit_box[0] picks up the first iteration at
    which the assignment matches `truth_labels` up to permutation (tracked
    only when track_truth). Every `resync_every` iterations the cached log
    posterior is recomputed from counts; the largest correction seen is
    accumulated in drift_box[0].
    """
    n = labels.shape[0]
    K = sizes.shape[0]
    accepts = 0
    last_accepted = False
    for step in range(num_steps):
        iteration = start_iteration + step
        if lazy:
            coin = next_uniform(rng_state)
            if coin < 0.5:
                last_accepted = False
                if resync_every > 0 and (iteration + 1) % resync_every == 0:
                    fresh = log_posterior_from_counts(
                        block_edges, sizes, mode, kappa1, kappa2,
                        edge_weight, pair_weight, logit_b, log1m_b)
                    drift = abs(fresh - log_post_box[0])
                    if drift > drift_box[0]:
                        drift_box[0] = drift
                    log_post_box[0] = fresh
                continue
        u_node = next_uniform(rng_state)
        node = int(u_node * n)
        old = labels[node]
        u_label = next_uniform(rng_state)
        candidate = int(u_label * (K - 1))
        if candidate >= old:
            candidate += 1
        u_accept = next_uniform(rng_state)
        delta = flip_log_posterior_delta(
            block_edges, sizes, degree_table[node], old, candidate,
            mode, kappa1, kappa2, edge_weight, pair_weight,
            logit_b, log1m_b, size_lo, size_hi)
        if delta == -np.inf:
            accepted = False
        elif delta >= 0.0:
            accepted = True
        else:
            accepted = u_accept < math.exp(xi * delta)
        if accepted:
            apply_flip(indptr, indices, labels, sizes, block_edges,
                       degree_table, node, candidate)
            log_post_box[0] += delta
            accepts += 1
            if track_truth:
                ref = truth_labels[node]
                truth_overlap[old, ref] -= 1
                truth_overlap[candidate, ref] += 1
                if hit_box[0] < 0 and _truth_overlap_complete(truth_overlap, n):
                    hit_box[0] = iteration + 1
        last_accepted = accepted
        proposal_box[0] = node
        proposal_box[1] = candidate
        delta_box[0] = delta
        if resync_every > 0 and (iteration + 1) % resync_every == 0:
            fresh = log_posterior_from_counts(
                block_edges, sizes, mode, kappa1, kappa2,
                edge_weight, pair_weight, logit_b, log1m_b)
            drift = abs(fresh - log_post_box[0])
            if drift > drift_box[0]:
                drift_box[0] = drift
            log_post_box[0] = fresh
    proposal_box[2] = 1 if last_accepted else 0
    return accepts


@njit(cache=True)
def run_steps_with_visits(indptr, indices, labels, sizes, block_edges,
                          degree_table, rng_state, log_post_box, mode,
                          kappa1, kappa2, edge_weight, pair_weight,
                          logit_b, log1m_b, xi, size_lo, size_hi,
                          num_steps, lazy, state_lookup, visit_counts):
    """Chain driver that tallies visits to enumerated clustering states.

    Only valid for K=2 and n <= 20: a label vector is keyed by its bitmask,
    canonicalized so node 0 carries label 0, and mapped through state_lookup
    (an array of length 2**n giving the clustering-state index).
    """
    n = labels.shape[0]
    proposal_box = np.zeros(3, dtype=np.int64)
    delta_box = np.zeros(1, dtype=np.float64)
    drift_box = np.zeros(1, dtype=np.float64)
    hit_box = np.full(1, -1, dtype=np.int64)
    overlap = np.zeros((2, 2), dtype=np.int64)
    dummy_truth = np.zeros(1, dtype=np.int64)
    full_mask = (1 << n) - 1
    key = 0
    for i in range(n):
        if labels[i] == 1:
            key |= 1 << i
    if key & 1:
        key = (~key) & full_mask
    visit_counts[state_lookup[key]] += 1
    for step in range(num_steps):
        run_steps(indptr, indices, labels, sizes, block_edges, degree_table,
                  rng_state, log_post_box, mode, kappa1, kappa2,
                  edge_weight, pair_weight, logit_b, log1m_b,
                  xi, size_lo, size_hi, step, 1, lazy, 0,
                  overlap, False, hit_box, proposal_box, delta_box,
                  drift_box, dummy_truth)
        key = 0
        for i in range(n):
            if labels[i] == 1:
                key |= 1 << i
        if key & 1:
            key = (~key) & full_mask
        visit_counts[state_lookup[key]] += 1
    return visit_counts
