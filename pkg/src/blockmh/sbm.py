"""Graphs, label assignments, and the count statistics the posterior consumes."""

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .errors import ConfigError, GuardExceededError

# Exhaustive permutation search is exact but factorial; experiments use K <= 5.
PERMUTATION_GUARD = 10


class Adjacency:
    """Symmetric, hollow 0/1 graph on n nodes.

    Stored as sorted neighbor arrays (CSR layout) for iteration plus a hashed
    edge set for O(1) membership tests. Immutable after construction.
    """

    def __init__(self, n, edges_i, edges_j):
        edges_i = np.asarray(edges_i, dtype=np.int64)
        edges_j = np.asarray(edges_j, dtype=np.int64)
        if edges_i.shape != edges_j.shape:
            raise ValueError("edge endpoint arrays must have equal length")
        if edges_i.size and (edges_i.min() < 0 or edges_j.max() >= n):
            raise ValueError("edge endpoint out of range")
        if np.any(edges_i == edges_j):
            raise ValueError("self-loops are not allowed")
        lo = np.minimum(edges_i, edges_j)
        hi = np.maximum(edges_i, edges_j)
        keys = lo * n + hi
        if np.unique(keys).size != keys.size:
            raise ValueError("duplicate edges")
        self.n = int(n)
        self.edge_count = int(keys.size)
        self._edges_lo = lo
        self._edges_hi = hi
        self._edge_set = None  # built lazily; membership tests are rarer than scans
        degrees = np.bincount(lo, minlength=n) + np.bincount(hi, minlength=n)
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(degrees, out=self.indptr[1:])
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        self.indices = np.ascontiguousarray(dst[order])
        self.degrees = degrees.astype(np.int64)

    def neighbors(self, i):
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def has_edge(self, i, j):
        if i == j:
            return False
        if self._edge_set is None:
            keys = self._edges_lo * self.n + self._edges_hi
            self._edge_set = frozenset(keys.tolist())
        lo, hi = (i, j) if i < j else (j, i)
        return lo * self.n + hi in self._edge_set

    def degree(self, i):
        return int(self.degrees[i])

    @property
    def edge_arrays(self):
        """(lo, hi) endpoint arrays with lo < hi, one row per edge."""
        return self._edges_lo, self._edges_hi

    def to_dense(self):
        dense = np.zeros((self.n, self.n), dtype=np.int8)
        dense[self._edges_lo, self._edges_hi] = 1
        dense[self._edges_hi, self._edges_lo] = 1
        return dense


@dataclass(frozen=True)
class ConnectivityMatrix:
    """Symmetric K x K matrix of edge probabilities.

    The homogeneous flag is set when all diagonal entries equal a common p,
    all off-diagonal entries equal a common q, and p > q (assortative).
    """

    entries: np.ndarray
    homogeneous: bool = field(init=False)
    p: float | None = field(init=False)
    q: float | None = field(init=False)

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError("connectivity matrix must be square")
        if not np.array_equal(entries, entries.T):
            raise ValueError("connectivity matrix must be symmetric")
        if entries.min() < 0 or entries.max() > 1:
            raise ValueError("connectivity entries must lie in [0, 1]")
        object.__setattr__(self, "entries", entries)
        diag = np.diag(entries)
        off = entries[~np.eye(entries.shape[0], dtype=bool)]
        homogeneous = bool(
            np.all(diag == diag[0])
            and (off.size == 0 or np.all(off == off[0]))
            and (off.size == 0 or diag[0] > off[0])
        )
        object.__setattr__(self, "homogeneous", homogeneous)
        object.__setattr__(self, "p", float(diag[0]) if homogeneous else None)
        object.__setattr__(self, "q",
                           float(off[0]) if homogeneous and off.size else None)

    @property
    def K(self):
        return self.entries.shape[0]

    @classmethod
    def from_pq(cls, K, p, q):
        """Matrix with p on the diagonal and q elsewhere."""
        entries = np.full((K, K), float(q))
        np.fill_diagonal(entries, float(p))
        return cls(entries)


@dataclass(frozen=True)
class LabelAssignment:
    """A label vector together with the cached block statistics.

    block_edges is symmetric: diagonal entries count unordered within-block
    edges, off-diagonal entries count edges between the two blocks.
    """

    labels: np.ndarray
    K: int
    sizes: np.ndarray
    block_edges: np.ndarray

    @property
    def n(self):
        return self.labels.shape[0]

    @property
    def block_pairs(self):
        """n_ab matrix: size products off the diagonal, s(s-1)/2 on it."""
        pairs = np.outer(self.sizes, self.sizes)
        np.fill_diagonal(pairs, self.sizes * (self.sizes - 1) // 2)
        return pairs


@dataclass(frozen=True)
class DiscrepancyMatrix:
    """Confusion counts between an assignment and a reference assignment.

    entries holds the reported form: rows permuted to minimize the
    off-diagonal sum, so entries[a, b] counts nodes placed in (permuted)
    community a whose reference community is b.
    """

    entries: np.ndarray
    permutation: tuple

    @property
    def off_diagonal_sum(self):
        return int(self.entries.sum() - np.trace(self.entries))


def _validate_labels(labels, K):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1:
        raise ValueError("labels must be a 1-d array")
    if labels.size and (labels.min() < 0 or labels.max() >= K):
        raise ValueError(f"label out of range for K={K}")
    return labels


def generate_sbm(n, connectivity, truth, seed):
    """Sample a graph whose pair probabilities are connectivity[truth_i, truth_j].

    Every unordered pair is drawn independently; deterministic given seed.
    """
    truth = _validate_labels(truth, connectivity.K)
    if truth.shape[0] != n:
        raise ValueError("truth labels must have length n")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    probs = connectivity.entries[truth[iu], truth[ju]]
    mask = rng.random(iu.shape[0]) < probs
    return Adjacency(n, iu[mask], ju[mask])


def count_statistics(adjacency, labels, K):
    """Populate sizes and block edge counts for a label vector in one pass."""
    labels = _validate_labels(labels, K)
    if labels.shape[0] != adjacency.n:
        raise ValueError("labels must have length n")
    sizes = np.bincount(labels, minlength=K).astype(np.int64)
    lo, hi = adjacency.edge_arrays
    a = labels[lo]
    b = labels[hi]
    block_lo = np.minimum(a, b)
    block_hi = np.maximum(a, b)
    flat = np.bincount(block_lo * K + block_hi, minlength=K * K)
    upper = flat.reshape(K, K)
    block_edges = upper + upper.T - np.diag(np.diag(upper))
    return LabelAssignment(labels=labels, K=K, sizes=sizes,
                           block_edges=block_edges.astype(np.int64))


def confusion_counts(labels, reference, K):
    """Raw K x K counts of (label, reference label) co-occurrences."""
    labels = _validate_labels(labels, K)
    reference = _validate_labels(reference, K)
    if labels.shape[0] != reference.shape[0]:
        raise ValueError("label vectors must have equal length")
    flat = np.bincount(labels * K + reference, minlength=K * K)
    return flat.reshape(K, K).astype(np.int64)


def best_row_permutation(counts):
    """Row permutation of a confusion matrix maximizing the diagonal mass.

    Exhaustive over K! permutations; exact for the K <= PERMUTATION_GUARD
    sizes this library targets.
    """
    K = counts.shape[0]
    if K > PERMUTATION_GUARD:
        raise GuardExceededError(
            f"permutation search unsupported for K={K} > {PERMUTATION_GUARD}")
    best_perm = None
    best_matched = -1
    for perm in permutations(range(K)):
        matched = sum(counts[perm[a], a] for a in range(K))
        if matched > best_matched:
            best_matched = matched
            best_perm = perm
    return best_perm, int(best_matched)


def discrepancy(labels, reference, K):
    """Confusion matrix against a reference, rows permuted to minimize the
    off-diagonal sum."""
    counts = confusion_counts(labels, reference, K)
    perm, _ = best_row_permutation(counts)
    return DiscrepancyMatrix(entries=counts[list(perm)], permutation=perm)


def feasible_size_bounds(n, K, alpha):
    """[n/(alpha K), alpha n/K] community-size window of the prior support."""
    if alpha < 1:
        raise ConfigError("balance parameter alpha must be >= 1")
    return n / (alpha * K), alpha * n / K


def sizes_feasible(sizes, n, K, alpha):
    lo, hi = feasible_size_bounds(n, K, alpha)
    sizes = np.asarray(sizes, dtype=np.float64)
    if sizes.shape[0] != K:
        raise ValueError("need one size per community")
    return bool(np.all(sizes >= lo) and np.all(sizes <= hi))


def in_feasible_set(labels, K, alpha):
    """True iff every community size lies inside the prior support window."""
    labels = _validate_labels(labels, K)
    sizes = np.bincount(labels, minlength=K)
    return sizes_feasible(sizes, labels.shape[0], K, alpha)
