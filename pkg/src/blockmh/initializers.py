"""Chain initializers: spectral clustering, controlled corruption of a
reference assignment, and a uniform baseline. Every initializer returns a
label vector inside the feasible set."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg
from sklearn.cluster import KMeans

from .errors import ConfigError, NumericalError
from .sbm import feasible_size_bounds, in_feasible_set

_DENSE_EIGEN_CUTOFF = 300


@dataclass(frozen=True)
class InitSpec:
    """Initializer choice for experiment drivers.

    method: 'spectral', 'corrupted-truth', or 'uniform-feasible'.
    gamma0/pattern apply to corrupted-truth only.
    """

    method: str
    gamma0: float = 0.0
    pattern: str = "uniform"
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("spectral", "corrupted-truth",
                               "uniform-feasible"):
            raise ConfigError(f"unknown initializer method: {self.method}")
        if self.method == "corrupted-truth" and not 0 <= self.gamma0 < 1:
            raise ConfigError("gamma0 must lie in [0, 1)")

    def build(self, adjacency, K, alpha, truth=None):
        if self.method == "spectral":
            return spectral_init(adjacency, K, alpha, self.seed)
        if self.method == "uniform-feasible":
            return uniform_feasible_init(adjacency.n, K, alpha, self.seed)
        if truth is None:
            raise ConfigError("corrupted-truth initializer needs reference labels")
        return corrupted_truth_init(truth, self.gamma0, K, alpha,
                                    pattern=self.pattern, seed=self.seed)


def project_to_feasible(labels, K, alpha, rng, scores=None):
    """Greedily move nodes from oversized to undersized communities until the
    size window is met.

    scores[i, k], when given, ranks how well node i fits community k (higher
    is better); the node with the largest margin for the move is chosen.
    Without scores the node is drawn uniformly from the donor community.
    """
    labels = np.asarray(labels, dtype=np.int64).copy()
    n = labels.shape[0]
    lo, hi = feasible_size_bounds(n, K, alpha)
    sizes = np.bincount(labels, minlength=K).astype(np.int64)
    for _ in range(2 * n * K):
        too_small = np.where(sizes < lo)[0]
        too_big = np.where(sizes > hi)[0]
        if too_small.size == 0 and too_big.size == 0:
            return labels
        donor = int(too_big[np.argmax(sizes[too_big])]) if too_big.size \
            else int(np.argmax(sizes))
        target = int(too_small[np.argmin(sizes[too_small])]) if too_small.size \
            else int(np.argmin(sizes))
        members = np.where(labels == donor)[0]
        if scores is not None:
            margins = scores[members, target] - scores[members, donor]
            moved = members[int(np.argmax(margins))]
        else:
            moved = members[int(rng.integers(members.shape[0]))]
        labels[moved] = target
        sizes[donor] -= 1
        sizes[target] += 1
    raise NumericalError("feasibility projection failed to terminate")


def _leading_eigenvectors(adjacency, K, seed):
    """K eigenvectors of the adjacency with the largest-magnitude eigenvalues."""
    n = adjacency.n
    if n <= max(_DENSE_EIGEN_CUTOFF, K + 2):
        values, vectors = np.linalg.eigh(adjacency.to_dense().astype(np.float64))
        order = np.argsort(-np.abs(values))[:K]
        return vectors[:, order]
    matrix = scipy.sparse.csr_matrix(
        (np.ones(adjacency.indices.shape[0]),
         adjacency.indices, adjacency.indptr), shape=(n, n))
    v0 = np.random.default_rng(seed).standard_normal(n)
    try:
        values, vectors = scipy.sparse.linalg.eigsh(matrix, k=K, which="LM",
                                                    v0=v0, maxiter=n * 100)
    except scipy.sparse.linalg.ArpackNoConvergence as exc:
        converged = len(exc.eigenvalues)
        raise NumericalError(
            f"eigenvector iteration did not converge: {converged}/{K} "
            f"eigenpairs found") from exc
    order = np.argsort(-np.abs(values))
    return vectors[:, order]


def spectral_init(adjacency, K, alpha, seed):
    """Cluster the rows of the top-K adjacency eigenvectors with k-means
    (k-means++ seeding, 20 restarts, 100 iterations), then project the
    result into the feasible set by largest-margin reassignment."""
    if K < 2:
        raise ConfigError("need at least two communities")
    embedding = _leading_eigenvectors(adjacency, K, seed)
    kmeans = KMeans(n_clusters=K, init="k-means++", n_init=20, max_iter=100,
                    random_state=seed & 0x7FFFFFFF)
    labels = kmeans.fit_predict(embedding).astype(np.int64)
    # margin scores: negative squared distance to each centroid
    scores = -kmeans.transform(embedding) ** 2
    rng = np.random.default_rng(seed)
    return project_to_feasible(labels, K, alpha, rng, scores=scores)


def corrupted_truth_init(truth, gamma0, K, alpha, pattern="uniform", seed=0):
    """Relabel exactly round(gamma0 * n) nodes of a reference assignment.

    'uniform' draws nodes and wrong labels uniformly (re-drawn until the
    result is feasible); 'one-sided' keeps the smaller of two communities
    intact and concentrates every error in the larger one.
    """
    truth = np.asarray(truth, dtype=np.int64)
    n = truth.shape[0]
    if not 0 <= gamma0 <= 1 - 1 / K:
        raise ConfigError("gamma0 must lie in [0, 1 - 1/K]")
    errors = round(gamma0 * n)
    if errors == 0:
        return truth.copy()
    rng = np.random.default_rng(seed)
    if pattern == "one-sided":
        if K != 2:
            raise ConfigError("one-sided corruption is defined for K=2 only")
        sizes = np.bincount(truth, minlength=2)
        large = int(np.argmax(sizes))
        if errors > sizes[large]:
            raise ConfigError("corruption exceeds the larger community")
        members = np.where(truth == large)[0]
        flipped = rng.choice(members, size=errors, replace=False)
        labels = truth.copy()
        labels[flipped] = 1 - large
        if not in_feasible_set(labels, K, alpha):
            raise ConfigError(
                "requested corruption leaves the feasible set")
        return labels
    if pattern != "uniform":
        raise ConfigError(f"unknown corruption pattern: {pattern}")
    for _ in range(10_000):
        flipped = rng.choice(n, size=errors, replace=False)
        labels = truth.copy()
        offsets = rng.integers(1, K, size=errors)
        labels[flipped] = (labels[flipped] + offsets) % K
        if in_feasible_set(labels, K, alpha):
            return labels
    raise ConfigError("could not draw a feasible corrupted assignment")


def uniform_feasible_init(n, K, alpha, seed):
    """Uniform labels projected into the feasible set."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, K, size=n).astype(np.int64)
    return project_to_feasible(labels, K, alpha, rng)
