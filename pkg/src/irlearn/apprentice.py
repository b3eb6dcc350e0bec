"""Apprenticeship learning loop: margin solve, stop check, RL solve, estimate.

``mode="ideal"`` uses exact feature expectations and stops when the margin
drops to ``eps``. ``mode="approximate"`` works from Monte Carlo estimates
with error ``eps/3`` each, a margin solver with error ``eps/3``, and stops
when the closest single policy is within ``eps + 2 eps/3 + rho`` of the
expert estimate.
"""

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from irlearn._validation import check_vector, check_weights
from irlearn.diagnostics import contraction_certificate, iteration_bound
from irlearn.exceptions import ConfigError, MaxIterationsError
from irlearn.feature_expectation import (
    FeatureExpectation,
    exact_feature_expectation,
    expert_estimate,
    mc_feature_expectation,
    truncation_horizon,
)
from irlearn.max_margin import solve_max_margin
from irlearn.mdp import MixedPolicy, Policy, Trajectory, linear_reward, make_rng, sample_trajectories
from irlearn.rl_solver import solve_eps_optimal

MODES = ("ideal", "approximate")
EXPERT_SOURCES = ("demos", "monte_carlo", "exact")

# substream keys for make_rng(seed, ...)
_DEMO_STREAM = 0
_ESTIMATE_STREAM = 1
_EXPERT_STREAM = 2


@dataclass(frozen=True)
class ApprenticeConfig:
    eps: float
    eps_rl: float
    delta: float = 0.1
    rho: float = None
    mode: str = "approximate"
    max_iterations: int = 100
    n_demos: int = 1000
    seed: int = 0
    expert_source: str = "demos"

    def __post_init__(self):
        for name in ("eps", "eps_rl", "delta"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not 0.0 < v < 1.0:
                raise ConfigError(name, f"must lie in (0, 1), got {v!r}")
        if self.eps < math.sqrt(self.eps_rl):
            raise ConfigError(
                "eps",
                f"input condition eps >= sqrt(eps_rl) violated: eps={self.eps}, "
                f"sqrt(eps_rl)={math.sqrt(self.eps_rl):.6g}",
            )
        if self.rho is not None and not self.rho >= 0:
            raise ConfigError("rho", f"must be non-negative, got {self.rho!r}")
        if self.mode not in MODES:
            raise ConfigError("mode", f"must be one of {MODES}, got {self.mode!r}")
        if self.expert_source not in EXPERT_SOURCES:
            raise ConfigError("expert_source", f"must be one of {EXPERT_SOURCES}, got {self.expert_source!r}")
        for name in ("max_iterations", "n_demos"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError(name, f"must be a positive integer, got {v!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed", f"must be a non-negative integer, got {self.seed!r}")

    @property
    def radius(self):
        return self.eps / 3.0 if self.rho is None else self.rho

    @property
    def threshold(self):
        """Stop threshold on the best single-policy distance (approximate mode)."""
        return self.eps + 2.0 * self.eps / 3.0 + self.radius


@dataclass
class IterationRecord:
    """One pass of the loop; fields after ``i_min`` are unset on the final pass."""

    iteration: int
    w: np.ndarray
    t_margin: float
    dist_min: float
    i_min: int
    mu_estimate: np.ndarray = None
    mc_samples: int = 0
    mc_steps: int = 0
    wallclock_ms: float = 0.0
    diagnostic: object = None


@dataclass
class RunResult:
    config: ApprenticeConfig
    mu_expert: FeatureExpectation
    policies: list
    estimates: list
    records: list
    status: str = "running"
    n: int = None
    i_min: int = None
    weights: np.ndarray = None
    n_max: int = None
    initial_samples: int = 0
    warnings: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def history(self):
        """Rows: the expert estimate, then expert minus each policy estimate."""
        mu_e = np.asarray(self.mu_expert.vec)
        return np.vstack([mu_e] + [mu_e - mu for mu in self.estimates])

    @property
    def distances(self):
        mu_e = np.asarray(self.mu_expert.vec)
        return [float(np.linalg.norm(mu_e - mu)) for mu in self.estimates]

    @property
    def terminal_distance(self):
        return self.distances[self.i_min]

    @property
    def best_policy(self):
        return self.policies[self.i_min]

    @property
    def mixed_policy(self):
        return mix_policies(self.policies[: len(self.weights)], self.weights)

    @property
    def converged(self):
        return self.status in ("converged", "hull-reached")


def select_best(distances):
    """Index of the smallest distance, lowest index on ties."""
    d = np.asarray(distances, dtype=float)
    if d.size == 0:
        raise ValueError("select_best needs at least one distance")
    return int(np.argmin(d))


def mix_policies(policies, weights):
    """Episode-level mixture of ``policies``; a singleton is returned unchanged."""
    policies = list(policies)
    w = check_weights(weights, len(policies))
    if len(policies) == 1:
        return policies[0]
    return MixedPolicy(tuple(policies), w)


def iteration_cap(config, k, gamma):
    """Iterations used for the union bound: min(max_iterations, iteration bound)."""
    if config.eps**2 > config.eps_rl:
        bound = iteration_bound(k, gamma, config.eps, config.eps_rl)
        if not bound.vacuous:
            return max(1, min(config.max_iterations, math.ceil(bound.iterations)))
    return config.max_iterations


def _expert_mu(config, mdp, features, expert_policy, demos, expert_mu):
    if expert_mu is not None:
        if isinstance(expert_mu, FeatureExpectation):
            return expert_mu
        return FeatureExpectation(check_vector(expert_mu, "expert_mu", size=features.k), 0.0, 0.0, "exact")
    if demos is not None:
        return expert_estimate(demos, features, mdp.discount)
    if expert_policy is None:
        raise ValueError("need expert_mu, demos or expert_policy")
    if config.expert_source == "exact" or config.mode == "ideal":
        return exact_feature_expectation(mdp, features, expert_policy)
    if config.expert_source == "monte_carlo":
        rng = make_rng(config.seed, _EXPERT_STREAM)
        return mc_feature_expectation(mdp, features, expert_policy, config.eps / 3.0, config.delta / 3.0, rng)
    horizon = truncation_horizon(config.eps / 2.0, mdp.discount)
    rng = make_rng(config.seed, _DEMO_STREAM)
    states, actions = sample_trajectories(mdp, expert_policy, horizon, config.n_demos, rng)
    return expert_estimate([Trajectory(s, a) for s, a in zip(states, actions)], features, mdp.discount)


def run_apprenticeship(config, mdp, features, expert_policy=None, demos=None, expert_mu=None,
                       initial_policy=None):
    """Run the loop until the stop rule fires.

    The expert enters as a fixed vector ``expert_mu``, as demonstrations, or
    as a policy from which ``config.expert_source`` derives the estimate.
    Raises :class:`MaxIterationsError` (carrying the partial result) if
    ``config.max_iterations`` passes do not suffice.
    """
    features.check_compatible(mdp)
    t_start = time.perf_counter()
    k, gamma = features.k, mdp.discount
    ideal = config.mode == "ideal"
    n_max = iteration_cap(config, k, gamma)
    conf_each = config.delta / (3.0 * n_max)
    est_eps = config.eps / 3.0

    mu_e = _expert_mu(config, mdp, features, expert_policy, demos, expert_mu)
    mu_e_vec = np.asarray(mu_e.vec)
    result = RunResult(config, mu_e, [], [], [], n_max=n_max)
    if mu_e_vec @ mu_e_vec < 2.0 * config.eps_rl:
        msg = (f"||mu_E||^2 = {mu_e_vec @ mu_e_vec:.4g} < 2 eps_rl; "
               "the per-iteration contraction bound may not apply")
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        result.warnings.append(msg)
    result.timings["expert_s"] = time.perf_counter() - t_start

    def estimate(policy, i):
        if ideal:
            return exact_feature_expectation(mdp, features, policy)
        return mc_feature_expectation(mdp, features, policy, est_eps, conf_each,
                                      make_rng(config.seed, _ESTIMATE_STREAM, i))

    policy = initial_policy if initial_policy is not None else Policy.uniform(mdp.num_states, mdp.num_actions)
    first = estimate(policy, 0)
    result.policies.append(policy)
    result.estimates.append(np.asarray(first.vec))
    result.initial_samples = first.n_samples

    margin_eps = config.eps * 1e-3 if ideal else est_eps
    i = 1
    while True:
        t_iter = time.perf_counter()
        try:
            sol = solve_max_margin(result.history[1:], margin_eps)
        except Exception as exc:
            raise RuntimeError(f"iteration {i}: margin solve failed: {exc}") from exc
        dists = result.distances
        i_min = select_best(dists)
        rec = IterationRecord(i, np.asarray(sol.w), sol.t, dists[i_min], i_min)
        result.records.append(rec)
        result.weights = np.asarray(sol.weights)
        result.i_min = i_min

        if ideal and sol.t <= config.eps:
            result.status = "converged"
        elif not ideal and dists[i_min] <= config.threshold:
            result.status = "converged"
        elif not sol.separable:
            result.status = "hull-reached"
        if result.status != "running":
            result.n = i
            rec.wallclock_ms = (time.perf_counter() - t_iter) * 1e3
            break
        if i >= config.max_iterations:
            result.status = "max-iterations"
            result.n = i
            result.timings["total_s"] = time.perf_counter() - t_start
            raise MaxIterationsError(f"no convergence after {config.max_iterations} iterations", result)

        try:
            policy = solve_eps_optimal(mdp, linear_reward(features, sol.w), config.eps_rl)
            est = estimate(policy, i)
        except Exception as exc:
            raise RuntimeError(f"iteration {i}: {exc}") from exc
        mu_next = np.asarray(est.vec)
        mu_bar = mu_e_vec - np.asarray(sol.point)
        if not np.allclose(mu_next, mu_bar, rtol=0.0, atol=1e-15):
            rec.diagnostic = contraction_certificate(
                i, mu_e_vec, mu_bar, mu_next, k, gamma, float(np.linalg.norm(sol.point)) * config.eps_rl
            )
        result.policies.append(policy)
        result.estimates.append(mu_next)
        rec.mu_estimate = mu_next
        rec.mc_samples = est.n_samples
        rec.mc_steps = est.n_steps
        rec.wallclock_ms = (time.perf_counter() - t_iter) * 1e3
        i += 1
    result.timings["total_s"] = time.perf_counter() - t_start
    return result


class ApprenticeshipLearner(BaseEstimator):
    """Estimator front end for :func:`run_apprenticeship`.

    ``fit`` takes expert demonstrations (a list of :class:`Trajectory`) or a
    precomputed expert feature-expectation vector. ``predict`` maps states to
    the actions of the closest learned policy.
    """

    def __init__(self, mdp=None, features=None, eps=0.3, eps_rl=0.05, delta=0.1, rho=None,
                 mode="approximate", max_iterations=100, initial_policy=None, seed=0):
        self.mdp = mdp
        self.features = features
        self.eps = eps
        self.eps_rl = eps_rl
        self.delta = delta
        self.rho = rho
        self.mode = mode
        self.max_iterations = max_iterations
        self.initial_policy = initial_policy
        self.seed = seed

    def _config(self):
        return ApprenticeConfig(self.eps, self.eps_rl, self.delta, self.rho, self.mode,
                                self.max_iterations, seed=self.seed)

    def fit(self, X, y=None):
        if self.mdp is None or self.features is None:
            raise ValueError("ApprenticeshipLearner needs mdp and features")
        config = self._config()
        if len(X) and isinstance(X[0], Trajectory):
            result = run_apprenticeship(config, self.mdp, self.features, demos=X,
                                        initial_policy=self.initial_policy)
        else:
            result = run_apprenticeship(config, self.mdp, self.features, expert_mu=X,
                                        initial_policy=self.initial_policy)
        self.result_ = result
        self.policies_ = list(result.policies)
        self.weights_ = np.asarray(result.weights)
        self.best_index_ = result.i_min
        self.n_iter_ = result.n
        self.mu_expert_ = np.asarray(result.mu_expert.vec)
        separating = [r.w for r in result.records if np.any(r.w)]
        self.coef_ = separating[-1] if separating else np.zeros(self.features.k)
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "result_")
        states = np.asarray(X, dtype=int).ravel()
        return np.asarray(self.policies_[self.best_index_].probs)[states]

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)

    def mixed_policy(self):
        check_is_fitted(self, "result_")
        return self.result_.mixed_policy

    def reward(self):
        """Reward table from the last separating direction."""
        check_is_fitted(self, "result_")
        return linear_reward(self.features, self.coef_)

    def score(self, X, y=None):
        """Negative l2 distance between the mixture's exact feature expectation and the expert's."""
        check_is_fitted(self, "result_")
        if len(X) and isinstance(X[0], Trajectory):
            target = expert_estimate(X, self.features, self.mdp.discount).vec
        else:
            target = check_vector(X, "X", size=self.features.k)
        mu = exact_feature_expectation(self.mdp, self.features, self.mixed_policy()).vec
        return -float(np.linalg.norm(np.asarray(target) - mu))
