"""Feature expectations mu(pi) = E[sum_t gamma^t phi(s_t, a_t)], s_0 ~ D.

Three routes: an exact linear solve, truncated Monte Carlo with an l2
accuracy/confidence contract, and the empirical average over expert
demonstrations.
"""

import math
from dataclasses import dataclass

import numpy as np

from irlearn._validation import check_discount, check_open_unit, frozen
from irlearn.mdp import MixedPolicy, _check_policy, sample_trajectories
from irlearn.rl_solver import solve_policy_system


@dataclass(frozen=True, eq=False)
class FeatureExpectation:
    """A k-vector with its declared l2 accuracy and failure probability.

    ``method`` is one of ``"exact"``, ``"monte_carlo"``, ``"from_demos"``.
    ``n_samples`` counts episodes and ``n_steps`` generative-model calls.
    """

    vec: np.ndarray
    accuracy: float = 0.0
    confidence: float = 0.0
    method: str = "exact"
    n_samples: int = 0
    n_steps: int = 0
    horizon: int = None

    def __post_init__(self):
        object.__setattr__(self, "vec", frozen(np.asarray(self.vec, dtype=float)))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.vec, dtype=dtype)


def truncation_horizon(eps, gamma):
    """Smallest H >= 0 with gamma^(H+1) / (1 - gamma) <= eps / 2.

    Equals ``max(0, ceil(log_gamma(eps (1-gamma) / 2) - 1))``; the closed form
    is corrected by one step either way against floating-point rounding.
    Any positive ``eps`` is accepted; budgets of 1 or more are legitimate here.
    """
    if not (isinstance(eps, (int, float)) and math.isfinite(eps) and eps > 0):
        raise ValueError(f"eps must be a positive number, got {eps!r}")
    gamma = check_discount(gamma)
    if gamma == 0.0:
        return 0

    def ok(h):
        return gamma ** (h + 1) / (1.0 - gamma) <= eps / 2.0

    h = max(0, math.ceil(math.log(eps * (1.0 - gamma) / 2.0) / math.log(gamma) - 1.0))
    while h > 0 and ok(h - 1):
        h -= 1
    while not ok(h):
        h += 1
    return h


def _components(policy):
    if isinstance(policy, MixedPolicy):
        return list(zip(policy.components, policy.weights))
    return [(policy, 1.0)]


def state_feature_expectations(mdp, features, policy):
    """``(S, k)`` array of mu(pi | s) for a stationary policy."""
    return solve_policy_system(mdp, policy, features.data)


def exact_feature_expectation(mdp, features, policy):
    """Closed-form mu(pi) from one S-dimensional linear system with k columns."""
    features.check_compatible(mdp)
    _check_policy(mdp, policy)
    vec = sum(w * (mdp.start_dist @ state_feature_expectations(mdp, features, c)) for c, w in _components(policy))
    return FeatureExpectation(vec, 0.0, 0.0, "exact")


def truncated_feature_expectation(mdp, features, policy, horizon):
    """Finite-horizon sum_{t<=H} gamma^t E[phi(s_t, a_t)] by forward propagation."""
    features.check_compatible(mdp)
    _check_policy(mdp, policy)
    total = np.zeros(features.k)
    for comp, w in _components(policy):
        pi = comp.probs
        d = np.array(mdp.start_dist)
        acc = np.zeros(features.k)
        disc = 1.0
        for t in range(horizon + 1):
            sa = d[:, None] * pi
            acc += disc * np.einsum("sa,sak->k", sa, features.data)
            if t < horizon:
                d = np.einsum("sa,sat->t", sa, mdp.transition)
                disc *= mdp.discount
        total += w * acc
    return total


def mc_sample_count(k, gamma, eps, delta):
    """Episodes needed so the sampling error stays within eps/2 w.p. >= 1 - delta.

    Coordinate-wise Hoeffding on truncated sums with range [0, 1/(1-gamma)]
    and a union bound over the k coordinates.
    """
    return math.ceil(2 * k * math.log(2 * k / delta) / ((1.0 - gamma) ** 2 * (eps / 2.0) ** 2))


def _count_chain(mdp, features, pi, m, horizon, rng):
    """Sum of truncated discounted feature sums over ``m`` episodes.

    Tracks how many of the m episodes sit in each (s, a) at every step and
    splits those counts multinomially. The per-step occupancy counts have
    exactly the law induced by m independent episodes, and the sum of
    episode returns depends on the episodes only through those counts.
    """
    total = np.zeros(features.k)
    if m == 0:
        return total
    n_s = rng.multinomial(m, mdp.start_dist)
    disc = 1.0
    for t in range(horizon + 1):
        n_sa = rng.multinomial(n_s, pi)
        total += disc * np.einsum("sa,sak->k", n_sa, features.data)
        if t < horizon:
            n_s = rng.multinomial(n_sa, mdp.transition).sum(axis=(0, 1))
            disc *= mdp.discount
    return total


def _episode_sums(mdp, features, policy, m, horizon, rng):
    states, actions = sample_trajectories(mdp, policy, horizon, m, rng)
    disc = mdp.discount ** np.arange(horizon + 1)
    return np.einsum("t,ntk->k", disc, features.data[states, actions])


def mc_feature_expectation(mdp, features, policy, eps, delta, rng, method="counts"):
    """Monte Carlo estimate with ``||est - mu(pi)||_2 <= eps`` w.p. >= 1 - delta.

    Half of ``eps`` covers truncation at ``truncation_horizon(eps, gamma)``,
    half covers sampling error (see :func:`mc_sample_count`).

    ``method="counts"`` simulates the m episodes jointly through their
    occupancy counts, which costs O(H S A) per estimate regardless of m;
    ``method="episodes"`` draws every trajectory explicitly.
    """
    eps = check_open_unit(eps, "eps")
    delta = check_open_unit(delta, "delta")
    features.check_compatible(mdp)
    _check_policy(mdp, policy)
    H = truncation_horizon(eps, mdp.discount)
    m = mc_sample_count(features.k, mdp.discount, eps, delta)
    if method == "counts":
        if isinstance(policy, MixedPolicy):
            per_comp = rng.multinomial(m, policy.weights)
            total = sum(_count_chain(mdp, features, c.probs, int(n), H, rng) for c, n in zip(policy.components, per_comp))
        else:
            total = _count_chain(mdp, features, policy.probs, m, H, rng)
    elif method == "episodes":
        total = _episode_sums(mdp, features, policy, m, H, rng)
    else:
        raise ValueError(f"unknown method {method!r}")
    return FeatureExpectation(total / m, eps, delta, "monte_carlo", m, m * (H + 1), H)


def expert_estimate(demos, features, gamma, delta=0.05):
    """Empirical (1/m) sum_i sum_t gamma^t phi(s_i^t, a_i^t) over the demos.

    The declared accuracy adds the truncation tail at the shortest demo to
    the Hoeffding radius for confidence ``1 - delta``.
    """
    demos = list(demos)
    if not demos:
        raise ValueError("expert_estimate needs at least one demonstration")
    gamma = check_discount(gamma)
    k = features.k
    vec = np.zeros(k)
    for traj in demos:
        disc = gamma ** np.arange(len(traj))
        vec += disc @ features.data[traj.states, traj.actions]
    m = len(demos)
    vec /= m
    H = min(traj.horizon for traj in demos)
    tail = gamma ** (H + 1) / (1.0 - gamma)
    spread = math.sqrt(k) / (1.0 - gamma) * math.sqrt(math.log(2 * k / delta) / (2 * m))
    return FeatureExpectation(
        vec, tail + spread, delta, "from_demos", m, sum(len(t) for t in demos), H
    )
