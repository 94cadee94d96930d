"""Log-posterior evaluation, flip deltas, and the modularity diagnostic."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import blockmh as bm
from blockmh.errors import ConfigError
from blockmh.sampler import ChainState

from conftest import naive_log_posterior, small_instance

# high-precision evaluations of the defining formulas (40-digit arithmetic)
T_STAR_03_01 = 0.6749633584745079
LAMBDA_STAR_03_01 = 0.18616894171033564
TEN_TAU_03 = -6.108643020548935
PATH_GRAPH_LOG_POST = -2.4849066497880003


class TestModelConfig:
    def test_validation(self):
        with pytest.raises(ConfigError):
            bm.ModelConfig(n=10, K=2, alpha=2.0, kappa1=0.0)
        with pytest.raises(ConfigError):
            bm.ModelConfig(n=10, K=2, alpha=2.0, xi=0.5)
        with pytest.raises(ConfigError):
            bm.ModelConfig(n=10, K=2, alpha=1.0, beta=1.0)
        with pytest.raises(ConfigError):
            bm.ModelConfig(n=10, K=1, alpha=2.0)

    def test_known_b_constants(self):
        consts = bm.KnownBConstants(0.3, 0.1)
        assert consts.t_star == pytest.approx(T_STAR_03_01, abs=1e-12)
        assert consts.lambda_star == pytest.approx(LAMBDA_STAR_03_01,
                                                   abs=1e-12)
        assert 0.1 < consts.lambda_star < 0.3
        assert consts.t_star > 0
        with pytest.raises(ConfigError):
            bm.KnownBConstants(0.1, 0.3)


class TestLogPosterior:
    def test_path_graph_hand_evaluation(self, path_graph):
        # blocks for Z=[0,0,1]: (0,0): O=1,n=1; (0,1): O=1,n=2; (1,1): O=0,n=0
        config = bm.ModelConfig(n=3, K=2, alpha=10.0)
        stats = bm.count_statistics(path_graph, np.array([0, 0, 1]), 2)
        value = bm.log_posterior(stats, config).value
        expected = (bm.log_beta_function(2, 1) + bm.log_beta_function(2, 2)
                    + bm.log_beta_function(1, 1))
        assert value == pytest.approx(expected, abs=1e-14)
        assert value == pytest.approx(PATH_GRAPH_LOG_POST, abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000), k=st.integers(2, 4))
    def test_permutation_symmetry_exact(self, seed, k):
        rng = np.random.default_rng(seed)
        n = 24
        adjacency, _, _ = small_instance(n, 0.5, 0.2, seed=seed)
        config = bm.ModelConfig(n=n, K=k, alpha=float(k) + 1.0)
        labels = rng.integers(0, k, size=n)
        base = bm.log_posterior(bm.count_statistics(adjacency, labels, k),
                                config)
        for perm in itertools.permutations(range(k)):
            permuted = np.asarray(perm)[labels]
            value = bm.log_posterior(
                bm.count_statistics(adjacency, permuted, k), config)
            assert value.value == base.value  # bitwise equal
            assert value.feasible == base.feasible

    def test_infeasible_sentinel(self):
        adjacency, _, _ = small_instance(10, 0.5, 0.2, seed=1)
        config = bm.ModelConfig(n=10, K=2, alpha=1.2)
        stats = bm.count_statistics(adjacency,
                                    np.repeat([0, 1], [1, 9]), 2)
        result = bm.log_posterior(stats, config)
        assert not result.feasible
        assert result.value == -math.inf

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_matches_naive_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = 16
        adjacency, _, config = small_instance(n, 0.5, 0.2, seed=seed)
        labels = rng.integers(0, 2, size=n)
        stats = bm.count_statistics(adjacency, labels, 2)
        mine = bm.log_posterior(stats, config)
        oracle = naive_log_posterior(adjacency.to_dense(), labels, 2,
                                     config.alpha)
        if oracle is None:
            assert not mine.feasible
        else:
            assert mine.value == pytest.approx(oracle, abs=1e-10)

    def test_known_b_ratio_identity_against_truth(self):
        # log ratio to the reference equals edge_weight*dO_s - pair_weight*dn_s
        n = 40
        adjacency, truth, _ = small_instance(n, 0.3, 0.1, seed=3, alpha=4.0)
        cm = bm.ConnectivityMatrix.from_pq(2, 0.3, 0.1)
        config = bm.ModelConfig(n=n, K=2, alpha=4.0, connectivity=cm)
        consts = bm.KnownBConstants(0.3, 0.1)
        truth_stats = bm.count_statistics(adjacency, truth, 2)
        truth_lp = bm.log_posterior(truth_stats, config).value
        rng = np.random.default_rng(0)
        for _ in range(25):
            labels = rng.integers(0, 2, size=n)
            stats = bm.count_statistics(adjacency, labels, 2)
            lp = bm.log_posterior(stats, config)
            if not lp.feasible:
                continue
            d_edges = (np.trace(stats.block_edges)
                       - np.trace(truth_stats.block_edges))
            d_pairs = (np.trace(stats.block_pairs)
                       - np.trace(truth_stats.block_pairs))
            identity = 2 * consts.t_star * (
                d_edges - consts.lambda_star * d_pairs)
            assert lp.value - truth_lp == pytest.approx(identity, abs=1e-8)


class TestFlipDelta:
    def _state(self, seed=0, n=40, k=3, known=False):
        rng = np.random.default_rng(seed)
        cm = bm.ConnectivityMatrix.from_pq(k, 0.4, 0.1)
        truth = rng.integers(0, k, size=n)
        adjacency = bm.generate_sbm(n, cm, truth, seed=seed)
        config = bm.ModelConfig(n=n, K=k, alpha=float(k) + 1.0,
                                connectivity=cm if known else None)
        labels = bm.uniform_feasible_init(n, k, config.alpha, seed=seed)
        return ChainState.from_labels(adjacency, labels, config, seed=seed)

    def test_flip_and_flip_back_cancel(self):
        state = self._state()
        move = bm.flip_delta(state, 5, (state.labels[5] + 1) % 3)
        from blockmh._kernels import apply_flip
        apply_flip(state.adjacency.indptr, state.adjacency.indices,
                   state.labels, state.sizes, state.block_edges,
                   state.node_comm_degrees, 5, move.new_label)
        back = bm.flip_delta(state, 5, move.old_label)
        assert move.delta + back.delta == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("known", [False, True])
    def test_matches_full_recomputation(self, known):
        state = self._state(seed=2, known=known)
        rng = np.random.default_rng(7)
        config = state.config
        adjacency = state.adjacency
        for _ in range(300):
            node = int(rng.integers(40))
            new = int((state.labels[node] + rng.integers(1, 3)) % 3)
            move = bm.flip_delta(state, node, new)
            flipped = state.labels.copy()
            flipped[node] = new
            reference = (
                bm.log_posterior(bm.count_statistics(adjacency, flipped, 3),
                                 config).value
                - bm.log_posterior(
                    bm.count_statistics(adjacency, state.labels, 3),
                    config).value)
            if math.isinf(reference):
                assert not move.feasible
            else:
                assert move.delta == pytest.approx(reference, abs=1e-9)

    def test_isolated_node_flip_is_pure_size_term(self):
        # node 5 has no edges: every block-edge delta vanishes
        adjacency = bm.Adjacency(6, np.array([0, 0, 1]), np.array([1, 2, 3]))
        config = bm.ModelConfig(n=6, K=2, alpha=3.0)
        labels = np.array([0, 0, 0, 1, 1, 1])
        state = ChainState.from_labels(adjacency, labels, config, seed=0)
        move = bm.flip_delta(state, 5, 0)
        stats = bm.count_statistics(adjacency, labels, 2)
        e = stats.block_edges
        expected = math.fsum([
            bm.log_beta_function(e[0, 0] + 1, 4 * 3 / 2 - e[0, 0] + 1)
            - bm.log_beta_function(e[0, 0] + 1, 3 * 2 / 2 - e[0, 0] + 1),
            bm.log_beta_function(e[0, 1] + 1, 4 * 2 - e[0, 1] + 1)
            - bm.log_beta_function(e[0, 1] + 1, 3 * 3 - e[0, 1] + 1),
            bm.log_beta_function(e[1, 1] + 1, 2 * 1 / 2 - e[1, 1] + 1)
            - bm.log_beta_function(e[1, 1] + 1, 3 * 2 / 2 - e[1, 1] + 1),
        ])
        assert move.delta == pytest.approx(expected, abs=1e-12)

    def test_known_b_single_flip_identity(self):
        state = self._state(seed=4, known=True)
        consts = bm.KnownBConstants(0.4, 0.1)
        node = 11
        new = int((state.labels[node] + 1) % 3)
        old = int(state.labels[node])
        move = bm.flip_delta(state, node, new)
        d = state.node_comm_degrees[node]
        d_edges = d[new] - d[old]
        d_pairs = state.sizes[new] - state.sizes[old] + 1
        expected = 2 * consts.t_star * (d_edges
                                        - consts.lambda_star * d_pairs)
        assert move.delta == pytest.approx(expected, abs=1e-10)

    def test_same_label_rejected(self):
        state = self._state()
        with pytest.raises(ValueError):
            bm.flip_delta(state, 0, int(state.labels[0]))

    def test_out_of_range_label_rejected(self):
        state = self._state()
        with pytest.raises(ValueError):
            bm.flip_delta(state, 0, 3)

    def test_cached_counts_stay_exact(self):
        state = self._state(seed=5)
        from blockmh.sampler import _advance
        _advance(state, 2000, False)
        stats = bm.count_statistics(state.adjacency, state.labels, 3)
        assert np.array_equal(stats.sizes, state.sizes)
        assert np.array_equal(stats.block_edges, state.block_edges)
        degree_table = np.zeros((40, 3), dtype=np.int64)
        lo, hi = state.adjacency.edge_arrays
        np.add.at(degree_table, (lo, state.labels[hi]), 1)
        np.add.at(degree_table, (hi, state.labels[lo]), 1)
        assert np.array_equal(degree_table, state.node_comm_degrees)


class TestLikelihoodModularity:
    def test_empty_graph_zero(self):
        adjacency = bm.Adjacency(6, np.empty(0, dtype=int),
                                 np.empty(0, dtype=int))
        stats = bm.count_statistics(adjacency, np.repeat([0, 1], 3), 2)
        assert bm.likelihood_modularity(stats) == 0.0

    def test_saturated_blocks_zero(self):
        cm = bm.ConnectivityMatrix.from_pq(2, 1.0, 1.0)
        adjacency = bm.generate_sbm(8, cm, np.repeat([0, 1], 4), seed=0)
        stats = bm.count_statistics(adjacency, np.repeat([0, 1], 4), 2)
        assert bm.likelihood_modularity(stats) == 0.0

    def test_single_block_value(self):
        # one community of 5 (10 pairs), 3 edges: 10 * tau(0.3)
        adjacency = bm.Adjacency(5, np.array([0, 0, 0]),
                                 np.array([1, 2, 3]))
        stats = bm.count_statistics(adjacency, np.zeros(5, dtype=int), 1)
        assert bm.likelihood_modularity(stats) == pytest.approx(
            TEN_TAU_03, abs=1e-12)


class TestTemperedLogRatio:
    def test_zero_delta(self):
        assert bm.tempered_log_ratio(0.0, 5.0) == 0.0

    def test_identity_at_xi_one(self):
        assert bm.tempered_log_ratio(-3.25, 1.0) == -3.25

    def test_linearity(self):
        assert bm.tempered_log_ratio(-2.0, 3.0) == -6.0

    def test_infeasible_propagates(self):
        assert bm.tempered_log_ratio(-math.inf, 2.0) == -math.inf

    def test_sign_preserved_for_all_xi(self):
        for xi in (1.0, 2.0, 10.0):
            assert bm.tempered_log_ratio(0.5, xi) > 0
            assert bm.tempered_log_ratio(-0.5, xi) < 0
