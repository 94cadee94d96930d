"""Shared fixtures and independent oracle implementations.

The oracles here recompute quantities from first principles (dense double
loops, exhaustive enumeration, direct formula evaluation) so library results
are checked against code that shares no path with the implementation.
"""

import itertools
import math

import numpy as np
import pytest

import blockmh as bm


# ---------------------------------------------------------------------------
# independent oracles
# ---------------------------------------------------------------------------

def naive_count_statistics(dense, labels, K):
    """O(n^2) double-loop block counts from a dense adjacency matrix."""
    n = len(labels)
    sizes = [0] * K
    for lab in labels:
        sizes[int(lab)] += 1
    edges = np.zeros((K, K), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            if dense[i, j]:
                a, b = sorted((int(labels[i]), int(labels[j])))
                edges[a, b] += 1
    return np.asarray(sizes), edges + edges.T - np.diag(np.diag(edges))


def naive_log_posterior(dense, labels, K, alpha, kappa1=1.0, kappa2=1.0):
    """Collapsed log posterior from scratch; None outside the feasible set."""
    n = len(labels)
    sizes, edges = naive_count_statistics(dense, labels, K)
    if sizes.min() < n / (alpha * K) or sizes.max() > alpha * n / K:
        return None
    terms = []
    for a in range(K):
        for b in range(a, K):
            pairs = (sizes[a] * (sizes[a] - 1) // 2 if a == b
                     else sizes[a] * sizes[b])
            terms.append(math.lgamma(edges[a, b] + kappa1)
                         + math.lgamma(pairs - edges[a, b] + kappa2)
                         - math.lgamma(pairs + kappa1 + kappa2))
    return math.fsum(terms)


def naive_loss(labels, reference, K):
    """Misclassification proportion by direct minimization over relabelings."""
    n = len(labels)
    best = n
    for perm in itertools.permutations(range(K)):
        mismatches = sum(perm[int(a)] != int(b)
                         for a, b in zip(labels, reference))
        best = min(best, mismatches)
    return best / n


def brute_force_clustering_posterior(dense, n, K, alpha, xi=1.0,
                                     kappa1=1.0, kappa2=1.0):
    """Enumerate every raw label vector, group by clustering, and return
    (canonical key -> unnormalized tempered mass) using only oracle code."""
    mass = {}
    for raw in itertools.product(range(K), repeat=n):
        lp = naive_log_posterior(dense, raw, K, alpha, kappa1, kappa2)
        if lp is None:
            continue
        key = _canonical_key(raw)
        mass.setdefault(key, []).append(lp)
    peak = max(lp for values in mass.values() for lp in values)
    return {key: sum(math.exp(xi * (lp - peak)) for lp in values)
            for key, values in mass.items()}


def _canonical_key(labels):
    mapping = {}
    out = []
    for lab in labels:
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out.append(mapping[lab])
    return tuple(out)


# ---------------------------------------------------------------------------
# fixtures
# ---------------------------------------------------------------------------

def small_instance(n, p, q, seed, K=2, alpha=3.0, xi=1.0, sizes=None):
    sizes = sizes or [n // K] * (K - 1) + [n - (n // K) * (K - 1)]
    truth = np.repeat(np.arange(K), sizes)
    cm = bm.ConnectivityMatrix.from_pq(K, p, q)
    adjacency = bm.generate_sbm(n, cm, truth, seed=seed)
    config = bm.ModelConfig(n=n, K=K, alpha=alpha, xi=xi)
    return adjacency, truth, config


@pytest.fixture(scope="session")
def chain_fixture_n8():
    """The n=8, K=2, alpha=3 instance used across the exact-chain checks."""
    return small_instance(8, 0.7, 0.2, seed=7)


@pytest.fixture(scope="session")
def triangle_graph():
    return bm.Adjacency(3, np.array([0, 0, 1]), np.array([1, 2, 2]))


@pytest.fixture(scope="session")
def path_graph():
    return bm.Adjacency(3, np.array([0, 1]), np.array([1, 2]))
