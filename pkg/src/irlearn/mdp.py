"""Tabular MDPs without reward, linear features, policies and sampling.

Transition kernels are stored as dense ``(S, A, S)`` arrays, features as
``(S, A, k)`` arrays. Every container is immutable after construction.
Stochastic operations take an explicit ``numpy.random.Generator``; use
:func:`make_rng` to derive reproducible, independent substreams.
"""

import json
from dataclasses import dataclass

import numpy as np

from irlearn._validation import (
    LOAD_TOL,
    check_discount,
    check_distribution,
    check_nonnegative_int,
    check_positive_int,
    check_vector,
    check_weights,
    frozen,
)


def make_rng(seed, *keys):
    """Counter-based (Philox) generator for substream ``keys`` of ``seed``.

    Distinct key tuples give statistically independent streams, so workers
    or algorithm phases can draw in any order without interfering.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True, eq=False)
class Mdp:
    """MDP without reward: dynamics, discount and start distribution."""

    num_states: int
    num_actions: int
    transition: np.ndarray
    discount: float
    start_dist: np.ndarray

    def __post_init__(self):
        S = check_positive_int(self.num_states, "num_states")
        A = check_positive_int(self.num_actions, "num_actions")
        P = np.asarray(self.transition, dtype=float)
        if P.shape != (S, A, S):
            raise ValueError(f"transition must have shape {(S, A, S)}, got {P.shape}")
        P = check_distribution(P, "transition")
        D = check_distribution(check_vector(self.start_dist, "start_dist", size=S), "start_dist")
        object.__setattr__(self, "num_states", S)
        object.__setattr__(self, "num_actions", A)
        object.__setattr__(self, "transition", frozen(P))
        object.__setattr__(self, "start_dist", frozen(D))
        object.__setattr__(self, "discount", check_discount(self.discount))

    @property
    def S(self):
        return self.num_states

    @property
    def A(self):
        return self.num_actions

    @property
    def gamma(self):
        return self.discount

    def is_deterministic(self):
        return bool(np.all(np.isclose(self.transition.max(axis=-1), 1.0)))

    def to_dict(self):
        return {
            "num_states": self.num_states,
            "num_actions": self.num_actions,
            "gamma": self.discount,
            "start_dist": self.start_dist.tolist(),
            "transition": self.transition.reshape(-1, self.num_states).tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        """Build from the JSON layout; rows within 1e-6 of unit sum are renormalized."""
        S, A = d["num_states"], d["num_actions"]
        P = np.asarray(d["transition"], dtype=float)
        if P.ndim == 2:
            if P.shape != (S * A, S):
                raise ValueError(f"transition must hold {S * A} rows of length {S}")
            P = P.reshape(S, A, S)
        P = check_distribution(P, "transition", tol=LOAD_TOL)
        D = check_distribution(np.asarray(d["start_dist"], dtype=float), "start_dist", tol=LOAD_TOL)
        return cls(S, A, P, d["gamma"], D)


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Per state-action feature vectors in [0, 1]^k with l2 norm at most 1."""

    data: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.data, dtype=float)
        if phi.ndim != 3:
            raise ValueError(f"features must have shape (S, A, k), got {phi.shape}")
        if np.any(phi < 0) or np.any(phi > 1):
            raise ValueError("feature entries must lie in [0, 1]")
        if np.any(np.linalg.norm(phi, axis=-1) > 1.0 + 1e-12):
            raise ValueError("feature vectors must have l2 norm at most 1")
        object.__setattr__(self, "data", frozen(phi))

    @property
    def k(self):
        return self.data.shape[2]

    def phi(self, s, a):
        return self.data[s, a]

    def check_compatible(self, mdp):
        if self.data.shape[:2] != (mdp.num_states, mdp.num_actions):
            raise ValueError(
                f"features cover {self.data.shape[:2]} pairs but the MDP has "
                f"{(mdp.num_states, mdp.num_actions)}"
            )


@dataclass(frozen=True, eq=False)
class RewardTable:
    values: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.values, dtype=float)
        if r.ndim != 2:
            raise ValueError(f"reward table must have shape (S, A), got {r.shape}")
        object.__setattr__(self, "values", frozen(r))


@dataclass(frozen=True, eq=False)
class Policy:
    """Stationary policy stored as an ``(S, A)`` matrix of action probabilities.

    ``kind`` is ``"deterministic"`` when built from an action per state.
    """

    probs: np.ndarray
    kind: str = "stochastic"

    def __post_init__(self):
        pi = np.asarray(self.probs, dtype=float)
        if pi.ndim != 2:
            raise ValueError(f"policy must have shape (S, A), got {pi.shape}")
        if self.kind not in ("deterministic", "stochastic"):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        object.__setattr__(self, "probs", frozen(check_distribution(pi, "policy")))

    @classmethod
    def deterministic(cls, actions, num_actions):
        actions = np.asarray(actions, dtype=int)
        if actions.ndim != 1 or np.any(actions < 0) or np.any(actions >= num_actions):
            raise ValueError("deterministic actions out of range")
        probs = np.zeros((actions.size, num_actions))
        probs[np.arange(actions.size), actions] = 1.0
        return cls(probs, "deterministic")

    @classmethod
    def uniform(cls, num_states, num_actions):
        return cls(np.full((num_states, num_actions), 1.0 / num_actions))

    @property
    def num_states(self):
        return self.probs.shape[0]

    @property
    def num_actions(self):
        return self.probs.shape[1]

    @property
    def actions(self):
        if self.kind != "deterministic":
            raise AttributeError("stochastic policies have no action table")
        return np.argmax(self.probs, axis=1)


@dataclass(frozen=True, eq=False)
class MixedPolicy:
    """Episode-level mixture: draw component j ~ weights once, then follow it."""

    components: tuple
    weights: np.ndarray

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("a mixed policy needs at least one component")
        shapes = {c.probs.shape for c in comps}
        if len(shapes) != 1:
            raise ValueError("mixture components must share the same (S, A) shape")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "weights", frozen(check_weights(self.weights, len(comps))))

    @property
    def num_states(self):
        return self.components[0].num_states

    @property
    def num_actions(self):
        return self.components[0].num_actions


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States and actions visited at t = 0..H."""

    states: np.ndarray
    actions: np.ndarray

    def __post_init__(self):
        s = frozen(np.asarray(self.states, dtype=int))
        a = frozen(np.asarray(self.actions, dtype=int))
        if s.ndim != 1 or s.shape != a.shape or s.size == 0:
            raise ValueError("trajectory needs equal-length, non-empty state and action arrays")
        object.__setattr__(self, "states", s)
        object.__setattr__(self, "actions", a)

    @classmethod
    def from_steps(cls, steps):
        steps = list(steps)
        return cls([s for s, _ in steps], [a for _, a in steps])

    @property
    def steps(self):
        return tuple(zip(self.states.tolist(), self.actions.tolist()))

    @property
    def horizon(self):
        return self.states.size - 1

    def __len__(self):
        return self.states.size


def _check_pair(mdp, s, a):
    if not 0 <= s < mdp.num_states:
        raise IndexError(f"state {s} out of range [0, {mdp.num_states})")
    if not 0 <= a < mdp.num_actions:
        raise IndexError(f"action {a} out of range [0, {mdp.num_actions})")


def _inverse_cdf(cdf, u):
    # cdf rows end in exactly 1.0, so the count never reaches the row length.
    return np.sum(np.asarray(u)[..., None] >= cdf, axis=-1)


def _cdf(p):
    c = np.cumsum(p, axis=-1)
    c[..., -1] = 1.0
    return c


def sample_next_state(mdp, s, a, rng):
    """One call to the generative model: draw s' ~ p(.|s, a)."""
    _check_pair(mdp, s, a)
    return int(_inverse_cdf(_cdf(mdp.transition[s, a]), rng.random()))


def build_empirical_mdp(mdp, samples_per_pair, rng):
    """Replace every kernel row by the empirical frequencies of N draws.

    Each row is ``counts / N`` where ``counts`` tallies N generative-model
    draws from that row, so N = 1 yields one-hot rows.
    """
    N = check_positive_int(samples_per_pair, "samples_per_pair")
    counts = rng.multinomial(N, mdp.transition)
    return Mdp(mdp.num_states, mdp.num_actions, counts / N, mdp.discount, mdp.start_dist)


def _check_policy(mdp, policy):
    if (policy.num_states, policy.num_actions) != (mdp.num_states, mdp.num_actions):
        raise ValueError(
            f"policy covers {(policy.num_states, policy.num_actions)} but the MDP has "
            f"{(mdp.num_states, mdp.num_actions)}"
        )


def sample_trajectories(mdp, policy, horizon, n, rng):
    """Draw ``n`` independent trajectories of length ``horizon + 1``.

    Returns ``(states, actions)`` integer arrays of shape ``(n, horizon + 1)``.
    A :class:`MixedPolicy` picks one component per trajectory.
    """
    H = check_nonnegative_int(horizon, "horizon")
    n = check_nonnegative_int(n, "n")
    _check_policy(mdp, policy)
    if isinstance(policy, MixedPolicy):
        comp = _inverse_cdf(_cdf(policy.weights), rng.random(n))
        pi_cdf = np.stack([_cdf(c.probs) for c in policy.components])
    else:
        comp = np.zeros(n, dtype=int)
        pi_cdf = _cdf(policy.probs)[None]
    P_cdf = _cdf(mdp.transition)
    states = np.empty((n, H + 1), dtype=int)
    actions = np.empty((n, H + 1), dtype=int)
    s = _inverse_cdf(_cdf(mdp.start_dist), rng.random(n))
    for t in range(H + 1):
        a = _inverse_cdf(pi_cdf[comp, s], rng.random(n))
        states[:, t] = s
        actions[:, t] = a
        if t < H:
            s = _inverse_cdf(P_cdf[s, a], rng.random(n))
    return states, actions


def rollout(mdp, policy, horizon, rng):
    """Single trajectory s0 ~ D, a_t ~ pi(.|s_t), s_{t+1} ~ p(.|s_t, a_t)."""
    states, actions = sample_trajectories(mdp, policy, horizon, 1, rng)
    return Trajectory(states[0], actions[0])


def linear_reward(features, w):
    """Reward table R(s, a) = w . phi(s, a)."""
    w = check_vector(w, "w", size=features.k)
    return RewardTable(features.data @ w)


def load_mdp(path):
    """Read an MDP JSON file; returns ``(mdp, features_or_None)``."""
    with open(path) as fh:
        d = json.load(fh)
    mdp = Mdp.from_dict(d)
    features = None
    if d.get("features") is not None:
        phi = np.asarray(d["features"], dtype=float)
        if phi.ndim == 2:
            phi = phi.reshape(mdp.num_states, mdp.num_actions, -1)
        features = FeatureMap(phi)
        features.check_compatible(mdp)
    return mdp, features


def save_mdp(path, mdp, features=None):
    d = mdp.to_dict()
    if features is not None:
        d["features"] = features.data.tolist()
    with open(path, "w") as fh:
        json.dump(d, fh)
