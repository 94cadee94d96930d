"""Initializer quality, exactness of corruption, and feasibility guarantees."""

import numpy as np
import pytest

import blockmh as bm
from blockmh.errors import ConfigError


class TestSpectralInit:
    def test_strong_signal_recovery(self):
        truth = np.repeat([0, 1], 200)
        cm = bm.ConnectivityMatrix.from_pq(2, 0.2, 0.02)
        good = 0
        for seed in range(20):
            adjacency = bm.generate_sbm(400, cm, truth, seed=seed)
            labels = bm.spectral_init(adjacency, 2, 2.0, seed=seed)
            good += bm.misclassification_loss(labels, truth, 2) <= 0.05
        assert good >= 18

    def test_disconnected_cliques_recovered_exactly(self):
        truth = np.repeat([0, 1], 10)
        cm = bm.ConnectivityMatrix.from_pq(2, 1.0, 0.0)
        adjacency = bm.generate_sbm(20, cm, truth, seed=0)
        labels = bm.spectral_init(adjacency, 2, 2.0, seed=0)
        assert bm.misclassification_loss(labels, truth, 2) == 0.0

    def test_no_signal_still_feasible(self):
        truth = np.repeat([0, 1], 40)
        cm = bm.ConnectivityMatrix.from_pq(2, 0.3, 0.3)
        adjacency = bm.generate_sbm(80, cm, truth, seed=2)
        labels = bm.spectral_init(adjacency, 2, 2.0, seed=5)
        assert bm.in_feasible_set(labels, 2, 2.0)

    def test_deterministic_given_seed(self):
        truth = np.repeat([0, 1, 2], 30)
        cm = bm.ConnectivityMatrix.from_pq(3, 0.4, 0.1)
        adjacency = bm.generate_sbm(90, cm, truth, seed=3)
        a = bm.spectral_init(adjacency, 3, 3.5, seed=12)
        b = bm.spectral_init(adjacency, 3, 3.5, seed=12)
        assert np.array_equal(a, b)


class TestCorruptedTruthInit:
    def test_zero_corruption_returns_truth(self):
        truth = np.repeat([0, 1], 20)
        labels = bm.corrupted_truth_init(truth, 0.0, 2, 2.0, seed=0)
        assert np.array_equal(labels, truth)

    def test_exact_error_count_uniform(self):
        truth = np.repeat([0, 1, 2], 20)
        for gamma0 in (0.05, 0.1, 0.2):
            labels = bm.corrupted_truth_init(truth, gamma0, 3, 4.0, seed=3)
            errors = int((labels != truth).sum())
            assert errors == round(gamma0 * 60)
            assert bm.in_feasible_set(labels, 3, 4.0)

    def test_one_sided_reference_fixture(self):
        # two communities 270/460; errors land only in the larger one
        alpha, epsilon = 1.76, 0.2
        gamma0 = (1 - epsilon) / (2 * alpha)
        truth = np.repeat([0, 1], [270, 460])
        labels = bm.corrupted_truth_init(truth, gamma0, 2, alpha,
                                         pattern="one-sided", seed=0)
        flipped = labels != truth
        assert int(flipped.sum()) == round(gamma0 * 730)
        assert np.all(truth[flipped] == 1)
        assert np.all(labels[truth == 0] == 0)
        loss = bm.misclassification_loss(labels, truth, 2)
        assert abs(loss - gamma0) <= 1.0 / 730

    def test_infeasible_request_rejected(self):
        truth = np.repeat([0, 1], [30, 10])
        with pytest.raises(ConfigError):
            bm.corrupted_truth_init(truth, 0.5, 2, 1.3,
                                    pattern="one-sided", seed=0)

    def test_one_sided_requires_two_communities(self):
        truth = np.repeat([0, 1, 2], 10)
        with pytest.raises(ConfigError):
            bm.corrupted_truth_init(truth, 0.1, 3, 4.0,
                                    pattern="one-sided", seed=0)


class TestUniformFeasibleInit:
    def test_always_feasible(self):
        for seed in range(25):
            labels = bm.uniform_feasible_init(37, 3, 2.0, seed=seed)
            assert bm.in_feasible_set(labels, 3, 2.0)

    def test_deterministic(self):
        a = bm.uniform_feasible_init(50, 2, 2.0, seed=4)
        b = bm.uniform_feasible_init(50, 2, 2.0, seed=4)
        assert np.array_equal(a, b)


class TestInitSpec:
    def test_dispatch(self):
        truth = np.repeat([0, 1], 20)
        cm = bm.ConnectivityMatrix.from_pq(2, 0.6, 0.1)
        adjacency = bm.generate_sbm(40, cm, truth, seed=0)
        for method in ("spectral", "uniform-feasible"):
            spec = bm.InitSpec(method=method, seed=1)
            labels = spec.build(adjacency, 2, 2.0)
            assert bm.in_feasible_set(labels, 2, 2.0)
        spec = bm.InitSpec(method="corrupted-truth", gamma0=0.1, seed=1)
        labels = spec.build(adjacency, 2, 2.0, truth=truth)
        assert int((labels != truth).sum()) == 4

    def test_unknown_method_rejected(self):
        with pytest.raises(ConfigError):
            bm.InitSpec(method="oracle")
