import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irlearn.mdp import (
    FeatureMap,
    Mdp,
    MixedPolicy,
    Policy,
    Trajectory,
    build_empirical_mdp,
    linear_reward,
    load_mdp,
    make_rng,
    rollout,
    sample_next_state,
    sample_trajectories,
    save_mdp,
)
from oracles import random_instance


def chain(n=3):
    """Deterministic chain 0 -> 1 -> ... -> n-1 (absorbing), one action."""
    P = np.zeros((n, 1, n))
    for s in range(n):
        P[s, 0, min(s + 1, n - 1)] = 1.0
    start = np.zeros(n)
    start[0] = 1.0
    return Mdp(n, 1, P, 0.9, start)


def two_state(row):
    P = np.array([[row], [row]], dtype=float)
    return Mdp(2, 1, P, 0.5, [1.0, 0.0])


class TestMdpValidation:
    def test_accepts_valid(self):
        m = two_state([0.3, 0.7])
        assert m.S == 2 and m.A == 1 and m.gamma == 0.5

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            Mdp(2, 1, np.ones((2, 2, 2)) / 2, 0.5, [1, 0])

    def test_row_not_distribution(self):
        with pytest.raises(ValueError):
            Mdp(2, 1, [[[0.5, 0.6]], [[1, 0]]], 0.5, [1, 0])

    def test_negative_entry(self):
        with pytest.raises(ValueError):
            Mdp(2, 1, [[[1.5, -0.5]], [[1, 0]]], 0.5, [1, 0])

    @pytest.mark.parametrize("gamma", [-0.1, 1.0, 1.5])
    def test_discount_range(self, gamma):
        with pytest.raises(ValueError):
            Mdp(1, 1, [[[1.0]]], gamma, [1.0])

    def test_arrays_are_read_only(self):
        m = two_state([0.3, 0.7])
        with pytest.raises(ValueError):
            m.transition[0, 0, 0] = 1.0

    def test_is_deterministic(self):
        assert chain().is_deterministic()
        assert not two_state([0.3, 0.7]).is_deterministic()


class TestFeatureMap:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            FeatureMap(np.full((1, 1, 2), 1.5))

    def test_rejects_large_norm(self):
        with pytest.raises(ValueError, match="norm"):
            FeatureMap(np.full((1, 1, 2), 0.9))

    def test_compatibility(self):
        with pytest.raises(ValueError):
            FeatureMap(np.zeros((3, 1, 2))).check_compatible(two_state([1, 0]))


class TestSerialization:
    def test_round_trip(self, tmp_path):
        mdp, feats = random_instance(np.random.default_rng(0), 4, 2, 3, 0.8)
        path = tmp_path / "m.json"
        save_mdp(path, mdp, feats)
        mdp2, feats2 = load_mdp(path)
        np.testing.assert_array_equal(mdp2.transition, mdp.transition)
        np.testing.assert_array_equal(mdp2.start_dist, mdp.start_dist)
        np.testing.assert_array_equal(feats2.data, feats.data)
        assert mdp2.discount == mdp.discount

    def test_renormalizes_small_drift(self):
        d = {"num_states": 2, "num_actions": 1, "gamma": 0.5, "start_dist": [1.0, 0.0],
             "transition": [[0.3, 0.7 + 5e-7], [1.0, 0.0]]}
        m = Mdp.from_dict(d)
        assert m.transition[0, 0].sum() == pytest.approx(1.0, abs=1e-15)

    def test_rejects_large_drift(self):
        d = {"num_states": 2, "num_actions": 1, "gamma": 0.5, "start_dist": [1.0, 0.0],
             "transition": [[0.3, 0.71], [1.0, 0.0]]}
        with pytest.raises(ValueError):
            Mdp.from_dict(d)


class TestGenerativeModel:
    def test_point_mass(self):
        m = Mdp(3, 1, [[[0, 0, 1]]] * 3, 0.5, [1, 0, 0])
        assert sample_next_state(m, 0, 0, make_rng(0)) == 2

    def test_reproducible(self):
        m = two_state([0.5, 0.5])
        draws = [[sample_next_state(m, 0, 0, rng) for _ in range(50)] for rng in (make_rng(4), make_rng(4))]
        assert draws[0] == draws[1]

    def test_frequencies(self):
        m = two_state([0.3, 0.7])
        rng = make_rng(1)
        draws = np.array([sample_next_state(m, 0, 0, rng) for _ in range(100_000)])
        assert abs(np.mean(draws == 0) - 0.3) <= 0.01

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            sample_next_state(two_state([1, 0]), 5, 0, make_rng(0))
        with pytest.raises(IndexError):
            sample_next_state(two_state([1, 0]), 0, 1, make_rng(0))

    def test_substreams_differ(self):
        assert make_rng(0, 1).random() != make_rng(0, 2).random()
        assert make_rng(0, 1).random() == make_rng(0, 1).random()


class TestEmpiricalMdp:
    def test_deterministic_kernel_preserved(self):
        m = chain(4)
        e = build_empirical_mdp(m, 7, make_rng(0))
        np.testing.assert_array_equal(e.transition, m.transition)

    def test_one_sample_gives_one_hot(self):
        mdp, _ = random_instance(np.random.default_rng(2), 5, 3, 2, 0.9)
        e = build_empirical_mdp(mdp, 1, make_rng(0))
        assert np.all(np.sort(e.transition, axis=-1)[..., -1] == 1.0)

    def test_frequency_row(self):
        e = build_empirical_mdp(two_state([0.3, 0.7]), 10_000, make_rng(0))
        assert np.max(np.abs(e.transition[0, 0] - [0.3, 0.7])) <= 0.02
        np.testing.assert_allclose(e.transition.sum(-1), 1.0, rtol=0, atol=1e-15)

    def test_hoeffding_row_error(self):
        mdp, _ = random_instance(np.random.default_rng(5), 6, 2, 2, 0.9)
        N = 400
        radius = math.sqrt(math.log(2 * mdp.S / 0.01) / (2 * N))
        hits = 0
        for seed in range(200):
            e = build_empirical_mdp(mdp, N, make_rng(seed))
            hits += np.max(np.abs(e.transition - mdp.transition)) <= radius
        assert hits >= 198


class TestRollout:
    def test_single_state(self):
        m = Mdp(1, 1, [[[1.0]]], 0.9, [1.0])
        t = rollout(m, Policy.uniform(1, 1), 3, make_rng(0))
        assert t.steps == ((0, 0),) * 4

    def test_chain(self):
        t = rollout(chain(3), Policy.uniform(3, 1), 2, make_rng(0))
        assert t.states.tolist() == [0, 1, 2]
        assert t.horizon == 2 and len(t) == 3

    def test_same_seed_same_path(self):
        mdp, _ = random_instance(np.random.default_rng(0), 5, 3, 2, 0.9)
        pi = Policy.uniform(5, 3)
        a, b = (rollout(mdp, pi, 20, make_rng(9)) for _ in range(2))
        assert a.steps == b.steps

    def test_start_frequencies(self):
        mdp, _ = random_instance(np.random.default_rng(0), 5, 2, 2, 0.9)
        states, _ = sample_trajectories(mdp, Policy.uniform(5, 2), 0, 100_000, make_rng(0))
        freq = np.bincount(states[:, 0], minlength=5) / 100_000
        assert np.max(np.abs(freq - mdp.start_dist)) <= 0.01

    def test_mixture_component_share(self):
        P = np.zeros((2, 2, 2))
        P[:, 0, 0] = 1.0
        P[:, 1, 1] = 1.0
        m = Mdp(2, 2, P, 0.5, [1.0, 0.0])
        mix = MixedPolicy((Policy.deterministic([0, 0], 2), Policy.deterministic([1, 1], 2)), [0.25, 0.75])
        states, actions = sample_trajectories(m, mix, 3, 40_000, make_rng(3))
        # each episode keeps one component, so its actions are constant
        assert np.all(actions == actions[:, :1])
        assert abs(np.mean(actions[:, 0] == 1) - 0.75) < 0.01

    def test_policy_shape_checked(self):
        with pytest.raises(ValueError):
            rollout(chain(3), Policy.uniform(2, 1), 2, make_rng(0))

    def test_from_steps(self):
        t = Trajectory.from_steps([(0, 1), (2, 0)])
        assert t.states.tolist() == [0, 2] and t.actions.tolist() == [1, 0]


class TestLinearReward:
    def test_zero_weights(self):
        f = FeatureMap(np.random.default_rng(0).random((3, 2, 4)) / 2)
        assert np.all(linear_reward(f, np.zeros(4)).values == 0)

    def test_unit_weight_picks_coordinate(self):
        f = FeatureMap(np.random.default_rng(0).random((3, 2, 4)) / 2)
        np.testing.assert_array_equal(linear_reward(f, [1, 0, 0, 0]).values, f.data[..., 0])

    def test_dot_product(self):
        f = FeatureMap(np.array([[[0.6, 0.8]]]))
        assert linear_reward(f, [0.6, 0.8]).values[0, 0] == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            linear_reward(FeatureMap(np.zeros((1, 1, 2))), [1.0])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_bounded_reward(self, seed):
        rng = np.random.default_rng(seed)
        _, f = random_instance(rng, 4, 3, 5, 0.9)
        w = rng.normal(size=5)
        w /= max(1.0, np.linalg.norm(w))
        assert np.all(np.abs(linear_reward(f, w).values) <= 1.0 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_random_kernels_validate(S, A, seed):
    rng = np.random.default_rng(seed)
    mdp, _ = random_instance(rng, S, A, 2, 0.5)
    np.testing.assert_allclose(mdp.transition.sum(-1), 1.0, atol=1e-12)
    states, actions = sample_trajectories(mdp, Policy.uniform(S, A), 5, 10, make_rng(seed))
    assert states.max() < S and actions.max() < A
