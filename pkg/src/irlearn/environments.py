"""Benchmark instances and synthetic experts."""

from dataclasses import dataclass, field

import numpy as np

from irlearn._validation import check_discount, check_positive_int, check_vector, frozen
from irlearn.mdp import FeatureMap, Mdp, Trajectory, linear_reward, make_rng, sample_trajectories
from irlearn.rl_solver import optimality_gap, solve_eps_optimal

# N, E, S, W as (dx, dy); y grows downwards.
MOVES = ((0, -1), (1, 0), (0, 1), (-1, 0))


@dataclass(frozen=True)
class GridworldSpec:
    width: int
    height: int
    macrocell_size: int
    noise: float = 0.0
    discount: float = 0.9
    hidden_w: tuple = None

    def __post_init__(self):
        check_positive_int(self.width, "width")
        check_positive_int(self.height, "height")
        m = check_positive_int(self.macrocell_size, "macrocell_size")
        if self.width % m or self.height % m:
            raise ValueError(
                f"macrocell_size {m} must divide width {self.width} and height {self.height}"
            )
        if not 0.0 <= self.noise < 1.0:
            raise ValueError(f"noise must lie in [0, 1), got {self.noise!r}")
        check_discount(self.discount)
        if self.hidden_w is not None:
            w = check_vector(self.hidden_w, "hidden_w", size=self.num_macrocells)
            if np.abs(w).sum() > 1.0 + 1e-12:
                raise ValueError("hidden_w must have l1 norm at most 1")
            object.__setattr__(self, "hidden_w", tuple(float(v) for v in w))

    @property
    def num_macrocells(self):
        return (self.width // self.macrocell_size) * (self.height // self.macrocell_size)


def make_gridworld(spec):
    """Gridworld with N/E/S/W moves and one-hot macrocell features.

    State ``s = y * width + x``; the start is cell (0, 0). The intended move
    happens with probability ``1 - noise``, each other direction with
    ``noise / 3``. Moves off the grid leave the agent in place.
    """
    W, H, m = spec.width, spec.height, spec.macrocell_size
    S, A = W * H, len(MOVES)
    dest = np.empty((S, A), dtype=int)
    for y in range(H):
        for x in range(W):
            for a, (dx, dy) in enumerate(MOVES):
                nx, ny = x + dx, y + dy
                if not (0 <= nx < W and 0 <= ny < H):
                    nx, ny = x, y
                dest[y * W + x, a] = ny * W + nx
    P = np.zeros((S, A, S))
    for s in range(S):
        for a in range(A):
            for b in range(A):
                P[s, a, dest[s, b]] += (1.0 - spec.noise) if b == a else spec.noise / (A - 1)
    start = np.zeros(S)
    start[0] = 1.0
    cols = W // m
    k = spec.num_macrocells
    phi = np.zeros((S, A, k))
    for y in range(H):
        for x in range(W):
            phi[y * W + x, :, (y // m) * cols + x // m] = 1.0
    return Mdp(S, A, P, spec.discount, start), FeatureMap(phi)


def make_random_mdp(S, A, k, sparsity, seed, gamma=0.9):
    """Random MDP: each (s, a) row has ``sparsity`` successors with Dirichlet(1) weights.

    Features are i.i.d. uniform on [0, 1]^k divided by sqrt(k), which keeps
    every vector inside the unit l2 ball. The start distribution is uniform.
    """
    S, A, k = (check_positive_int(v, n) for v, n in ((S, "S"), (A, "A"), (k, "k")))
    d = check_positive_int(sparsity, "sparsity")
    if d > S:
        raise ValueError(f"sparsity {d} exceeds the number of states {S}")
    rng = make_rng(seed)
    P = np.zeros((S, A, S))
    for s in range(S):
        for a in range(A):
            support = rng.choice(S, size=d, replace=False)
            P[s, a, support] = rng.dirichlet(np.ones(d))
    phi = rng.random((S, A, k)) / np.sqrt(k)
    return Mdp(S, A, P, gamma, np.full(S, 1.0 / S)), FeatureMap(phi)


@dataclass(frozen=True, eq=False)
class ExpertBundle:
    expert_policy: object
    hidden_w: np.ndarray
    demos: list = field(default_factory=list)
    optimality_gap: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "hidden_w", frozen(np.asarray(self.hidden_w, dtype=float)))


def make_expert(mdp, features, hidden_w, eps_rl, m, horizon, rng):
    """Epsilon_RL-optimal expert for reward phi . hidden_w plus ``m`` demonstrations.

    The policy's optimality gap is certified against policy iteration.
    """
    w = check_vector(hidden_w, "hidden_w", size=features.k)
    if np.abs(w).sum() > 1.0 + 1e-12:
        raise ValueError("hidden_w must have l1 norm at most 1")
    reward = linear_reward(features, w)
    policy = solve_eps_optimal(mdp, reward, eps_rl)
    gap = optimality_gap(mdp, reward, policy)
    if gap > eps_rl + 1e-9:
        raise RuntimeError(f"expert certification failed: gap {gap:.3g} > eps_rl {eps_rl}")
    demos = []
    if m > 0:
        states, actions = sample_trajectories(mdp, policy, horizon, m, rng)
        demos = [Trajectory(s, a) for s, a in zip(states, actions)]
    return ExpertBundle(policy, w, demos, gap)
