"""Planning on a known tabular model.

:func:`solve_eps_optimal` stands in for a sample-based epsilon-optimal RL
algorithm: it runs value iteration with a stopping rule that certifies the
greedy policy. With ``||V_{t+1} - V_t||_inf <= eps (1-g)^2 / (2 g^2)`` we get
``||V_{t+1} - V*|| <= g ||V_{t+1} - V_t|| / (1-g) <= eps (1-g) / (2 g)`` and
the greedy policy loses at most ``2 g ||V_{t+1} - V*|| / (1-g) <= eps``.
"""

from dataclasses import dataclass

import numpy as np

from irlearn._validation import check_open_unit, frozen
from irlearn.exceptions import NumericalError
from irlearn.mdp import MixedPolicy, Policy, build_empirical_mdp

RESIDUAL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ValueFunction:
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", frozen(np.asarray(self.v, dtype=float)))


def _reward_values(mdp, reward):
    r = np.asarray(getattr(reward, "values", reward), dtype=float)
    if r.shape != (mdp.num_states, mdp.num_actions):
        raise ValueError(f"reward must have shape {(mdp.num_states, mdp.num_actions)}, got {r.shape}")
    return r


def solve_policy_system(mdp, policy, rhs):
    """Solve ``(I - gamma P_pi) X = rhs_pi`` for a stationary policy.

    ``rhs`` is indexed ``(S, A, ...)`` and is averaged over ``pi(.|s)``
    first. Raises :class:`NumericalError` if the residual exceeds 1e-8.
    """
    pi = policy.probs
    P_pi = np.einsum("sa,sat->st", pi, mdp.transition)
    b = np.einsum("sa,sa...->s...", pi, rhs)
    M = np.eye(mdp.num_states) - mdp.discount * P_pi
    x = np.linalg.solve(M, b)
    resid = np.max(np.abs(M @ x - b)) if b.size else 0.0
    if not resid <= RESIDUAL_TOL:
        raise NumericalError(f"policy evaluation residual {resid:.3g} exceeds {RESIDUAL_TOL}")
    return x


def policy_value(mdp, reward, policy):
    """Exact V^pi. Mixed policies average component values by their weights."""
    r = _reward_values(mdp, reward)
    if isinstance(policy, MixedPolicy):
        v = sum(w * solve_policy_system(mdp, c, r) for c, w in zip(policy.components, policy.weights))
    else:
        v = solve_policy_system(mdp, policy, r)
    return ValueFunction(v)


def q_values(mdp, reward, v):
    r = _reward_values(mdp, reward)
    return r + mdp.discount * (mdp.transition @ np.asarray(v, dtype=float))


def greedy_policy(q):
    # np.argmax returns the lowest index among ties.
    return Policy.deterministic(np.argmax(q, axis=1), q.shape[1])


def value_iteration(mdp, reward, eps_rl, max_sweeps=1_000_000):
    """Return ``(V, sweeps)`` with V meeting the certified stopping rule."""
    g = mdp.discount
    v = np.zeros(mdp.num_states)
    if g == 0.0:
        return q_values(mdp, reward, v).max(axis=1), 1
    threshold = eps_rl * (1.0 - g) ** 2 / (2.0 * g * g)
    for sweep in range(1, max_sweeps + 1):
        v_next = q_values(mdp, reward, v).max(axis=1)
        diff = np.max(np.abs(v_next - v))
        v = v_next
        if diff <= threshold:
            return v, sweep
    raise RuntimeError(f"value iteration did not reach {threshold:.3g} in {max_sweeps} sweeps")


def solve_eps_optimal(mdp, reward, eps_rl, samples_per_pair=None, rng=None):
    """Greedy policy after certified value iteration.

    With ``samples_per_pair`` set, planning runs on an empirical kernel built
    from that many generative-model draws per (s, a); the certificate then
    holds for the empirical model only.
    """
    eps_rl = check_open_unit(eps_rl, "eps_rl")
    model = mdp
    if samples_per_pair is not None:
        if rng is None:
            raise ValueError("sample-based planning needs an rng")
        model = build_empirical_mdp(mdp, samples_per_pair, rng)
    v, _ = value_iteration(model, reward, eps_rl)
    return greedy_policy(q_values(model, reward, v))


def policy_iteration(mdp, reward, max_iter=10_000):
    """Exact optimal policy and V* by Howard's policy iteration.

    Actions only switch on a strict improvement above 1e-12, which rules out
    cycling between tied actions.
    """
    r = _reward_values(mdp, reward)
    policy = greedy_policy(r)
    for _ in range(max_iter):
        v = solve_policy_system(mdp, policy, r)
        q = q_values(mdp, r, v)
        current = policy.actions
        best = np.argmax(q, axis=1)
        gain = q[np.arange(mdp.num_states), best] - q[np.arange(mdp.num_states), current]
        improved = gain > 1e-12
        if not np.any(improved):
            return policy, ValueFunction(v)
        policy = Policy.deterministic(np.where(improved, best, current), mdp.num_actions)
    raise RuntimeError("policy iteration did not stabilise")


def optimality_gap(mdp, reward, policy):
    """``max_s V*(s) - V^pi(s)`` against the policy-iteration oracle."""
    _, v_star = policy_iteration(mdp, reward)
    return float(np.max(v_star.v - policy_value(mdp, reward, policy).v))
