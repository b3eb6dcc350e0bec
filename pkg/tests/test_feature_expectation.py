import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irlearn.environments import make_expert
from irlearn.feature_expectation import (
    exact_feature_expectation,
    expert_estimate,
    mc_feature_expectation,
    mc_sample_count,
    truncated_feature_expectation,
    truncation_horizon,
)
from irlearn.mdp import FeatureMap, Mdp, MixedPolicy, Policy, Trajectory, make_rng, sample_trajectories
from oracles import horizon_sum, occupancy_feature_expectation, random_instance, random_policy


class TestTruncationHorizon:
    @pytest.mark.parametrize("eps,gamma,expected", [(1.0, 0.5, 1), (0.3, 0.0, 0), (0.2, 0.9, 43)])
    def test_known_values(self, eps, gamma, expected):
        assert truncation_horizon(eps, gamma) == expected

    def test_boundary_is_inclusive(self):
        # at gamma=0.5, eps=1 the tail equals eps/2 exactly at H=1; just below 1 it needs H=2
        assert truncation_horizon(1.0 - 1e-12, 0.5) == 2

    @pytest.mark.parametrize("eps", [0.0, -0.1, float("nan")])
    def test_rejects_bad_budget(self, eps):
        with pytest.raises(ValueError):
            truncation_horizon(eps, 0.5)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(1e-4, 0.999), st.floats(0.0, 0.995))
    def test_minimality(self, eps, gamma):
        H = truncation_horizon(eps, gamma)
        assert gamma ** (H + 1) / (1 - gamma) <= eps / 2
        if H > 0:
            assert gamma**H / (1 - gamma) > eps / 2


class TestExact:
    def test_single_state_geometric(self):
        m = Mdp(1, 1, [[[1.0]]], 0.5, [1.0])
        f = FeatureMap(np.array([[[0.5, 0.25]]]))
        np.testing.assert_allclose(exact_feature_expectation(m, f, Policy.uniform(1, 1)).vec, [1.0, 0.5])

    def test_myopic(self):
        mdp, f = random_instance(np.random.default_rng(0), 4, 3, 2, 0.0)
        pi = random_policy(np.random.default_rng(1), 4, 3)
        want = np.einsum("s,sa,sak->k", mdp.start_dist, pi.probs, f.data)
        np.testing.assert_allclose(exact_feature_expectation(mdp, f, pi).vec, want, atol=1e-14)

    def test_matches_long_horizon_sum(self):
        rng = np.random.default_rng(3)
        mdp, f = random_instance(rng, 3, 2, 2, 0.9)
        pi = random_policy(rng, 3, 2)
        long = truncated_feature_expectation(mdp, f, pi, 10_000)
        np.testing.assert_allclose(exact_feature_expectation(mdp, f, pi).vec, long, atol=1e-8)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 6), st.integers(1, 3), st.integers(1, 4), st.floats(0.0, 0.98), st.integers(0, 2**32 - 1))
    def test_against_occupancy_oracle(self, S, A, k, gamma, seed):
        rng = np.random.default_rng(seed)
        mdp, f = random_instance(rng, S, A, k, gamma)
        pi = random_policy(rng, S, A)
        mu = exact_feature_expectation(mdp, f, pi).vec
        np.testing.assert_allclose(mu, occupancy_feature_expectation(mdp, f, pi.probs), atol=1e-9)
        assert np.linalg.norm(mu) <= math.sqrt(k) / (1 - gamma) + 1e-9

    def test_mixture_is_linear(self):
        rng = np.random.default_rng(4)
        mdp, f = random_instance(rng, 5, 3, 3, 0.8)
        p1, p2 = random_policy(rng, 5, 3), random_policy(rng, 5, 3)
        mix = MixedPolicy((p1, p2), [0.5, 0.5])
        avg = 0.5 * (exact_feature_expectation(mdp, f, p1).vec + exact_feature_expectation(mdp, f, p2).vec)
        np.testing.assert_allclose(exact_feature_expectation(mdp, f, mix).vec, avg, atol=1e-8)

    def test_tags(self):
        mdp, f = random_instance(np.random.default_rng(0), 2, 2, 2, 0.5)
        fe = exact_feature_expectation(mdp, f, Policy.uniform(2, 2))
        assert (fe.accuracy, fe.confidence, fe.method) == (0.0, 0.0, "exact")


class TestTruncated:
    def test_against_loop_oracle(self):
        rng = np.random.default_rng(7)
        mdp, f = random_instance(rng, 4, 3, 2, 0.7)
        pi = random_policy(rng, 4, 3)
        for H in (0, 1, 5, 17):
            np.testing.assert_allclose(truncated_feature_expectation(mdp, f, pi, H),
                                       horizon_sum(mdp, f, pi.probs, H), atol=1e-12)


class TestMonteCarlo:
    def test_sample_count_formula(self):
        assert mc_sample_count(4, 0.9, 0.1, 0.05) == math.ceil(8 * math.log(160) / (0.01 * 0.0025))

    def test_deterministic_system_has_no_sampling_error(self):
        P = np.zeros((3, 1, 3))
        for s in range(3):
            P[s, 0, (s + 1) % 3] = 1.0
        mdp = Mdp(3, 1, P, 0.8, [1, 0, 0])
        f = FeatureMap(np.eye(3)[:, None, :] * 0.9)
        pi = Policy.uniform(3, 1)
        eps = 0.3
        est = mc_feature_expectation(mdp, f, pi, eps, 0.1, make_rng(0))
        H = truncation_horizon(eps, 0.8)
        np.testing.assert_allclose(est.vec, truncated_feature_expectation(mdp, f, pi, H), atol=1e-12)
        assert np.linalg.norm(est.vec - exact_feature_expectation(mdp, f, pi).vec) <= eps / 2

    def test_myopic_count(self):
        mdp, f = random_instance(np.random.default_rng(0), 3, 2, 3, 0.0)
        est = mc_feature_expectation(mdp, f, Policy.uniform(3, 2), 0.2, 0.1, make_rng(0))
        assert est.horizon == 0
        assert est.n_samples >= 2 * 3 * math.log(2 * 3 / 0.1) * 4 / 0.2**2

    @pytest.mark.parametrize("method", ["counts", "episodes"])
    def test_methods_agree_in_distribution(self, method):
        rng = np.random.default_rng(11)
        mdp, f = random_instance(rng, 4, 2, 2, 0.5)
        pi = random_policy(rng, 4, 2)
        exact = exact_feature_expectation(mdp, f, pi).vec
        errs = [np.linalg.norm(mc_feature_expectation(mdp, f, pi, 0.5, 0.2, make_rng(s), method=method).vec - exact)
                for s in range(30)]
        assert max(errs) <= 0.5

    def test_mixture_estimate(self):
        rng = np.random.default_rng(12)
        mdp, f = random_instance(rng, 4, 2, 2, 0.6)
        mix = MixedPolicy((random_policy(rng, 4, 2, True), random_policy(rng, 4, 2, True)), [0.3, 0.7])
        est = mc_feature_expectation(mdp, f, mix, 0.2, 0.1, make_rng(0))
        assert np.linalg.norm(est.vec - exact_feature_expectation(mdp, f, mix).vec) <= 0.2

    def test_same_rng_same_estimate(self):
        mdp, f = random_instance(np.random.default_rng(0), 4, 2, 2, 0.8)
        a, b = (mc_feature_expectation(mdp, f, Policy.uniform(4, 2), 0.3, 0.1, make_rng(5)).vec for _ in range(2))
        np.testing.assert_array_equal(a, b)

    def test_unknown_method(self):
        mdp, f = random_instance(np.random.default_rng(0), 2, 2, 2, 0.5)
        with pytest.raises(ValueError):
            mc_feature_expectation(mdp, f, Policy.uniform(2, 2), 0.3, 0.1, make_rng(0), method="bogus")

    def test_calibration_failure_rate(self):
        rng = np.random.default_rng(21)
        mdp, f = random_instance(rng, 6, 3, 3, 0.8)
        pi = random_policy(rng, 6, 3)
        exact = exact_feature_expectation(mdp, f, pi).vec
        eps, delta = 0.2, 0.1
        misses = sum(np.linalg.norm(mc_feature_expectation(mdp, f, pi, eps, delta, make_rng(s)).vec - exact) > eps
                     for s in range(200))
        assert misses / 200 <= delta + 0.03


class TestExpertEstimate:
    def test_direct_sum(self):
        f = FeatureMap(np.array([[[1.0, 0.0]], [[0.0, 1.0]]]))
        demo = Trajectory([0, 1], [0, 0])
        np.testing.assert_allclose(expert_estimate([demo], f, 0.5).vec, [1.0, 0.5])
        np.testing.assert_allclose(expert_estimate([demo, demo], f, 0.5).vec, [1.0, 0.5])

    def test_empty(self):
        with pytest.raises(ValueError):
            expert_estimate([], FeatureMap(np.zeros((1, 1, 1))), 0.5)

    def test_gridworld_demos(self, grid4):
        mdp, f = grid4
        bundle = make_expert(mdp, f, [0, 0, 0, 1], 0.05, 0, 0, make_rng(0))
        H = truncation_horizon(0.1, mdp.discount)
        states, actions = sample_trajectories(mdp, bundle.expert_policy, H, 500, make_rng(1))
        demos = [Trajectory(s, a) for s, a in zip(states, actions)]
        est = expert_estimate(demos, f, mdp.discount)
        exact = exact_feature_expectation(mdp, f, bundle.expert_policy).vec
        assert np.linalg.norm(est.vec - exact) <= 0.1
        assert est.method == "from_demos" and est.n_samples == 500 and est.horizon == H
