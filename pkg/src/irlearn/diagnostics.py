"""Numerical certificates for the per-iteration contraction and iteration bound.

All logarithms are natural; the base cancels in the iteration-count quotient.
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class IterationBound:
    """Iteration bound with an explicit vacuity flag.

    ``iterations`` is ``None`` when the contraction factor is not below one,
    in which case no finite count follows. ``simplified`` is the leading-order
    form ``2k ln(sqrt(k)/((1-g) eps)) / ((1-g)^2 (eps^2 - eps_rl))``; it is
    finite even when the exact quotient is vacuous.
    """

    iterations: float | None
    simplified: float
    vacuous: bool

    def ceil(self):
        if self.vacuous:
            raise ValueError("iteration bound is vacuous for these parameters")
        return math.ceil(self.iterations)


@dataclass(frozen=True)
class IterationDiagnostic:
    iteration: int
    distance: float
    ratio_observed: float
    ratio_bound: float
    hypotheses_hold: bool
    mix_weight: float

    @property
    def satisfied(self):
        return self.ratio_observed <= self.ratio_bound + 1e-9


def projection_update(mu_expert, mu_bar, mu_next, eps_rl):
    """Point on the line through ``mu_bar`` and ``mu_next`` used in the contraction argument.

    ``mu_bar + c (mu_next - mu_bar)`` with
    ``c = ((mu_E - mu_bar).(mu_next - mu_bar) - eps_rl) / ||mu_next - mu_bar||^2``.
    """
    mu_expert, mu_bar, mu_next = (np.asarray(v, dtype=float) for v in (mu_expert, mu_bar, mu_next))
    step = mu_next - mu_bar
    denom = step @ step
    if denom == 0.0:
        raise ZeroDivisionError("mu_next coincides with mu_bar")
    c = ((mu_expert - mu_bar) @ step - eps_rl) / denom
    return c * step + mu_bar


def projection_weight(mu_expert, mu_bar, mu_next, eps_rl):
    """The coefficient ``c`` of :func:`projection_update` (weight on ``mu_next``)."""
    mu_expert, mu_bar, mu_next = (np.asarray(v, dtype=float) for v in (mu_expert, mu_bar, mu_next))
    step = mu_next - mu_bar
    return float(((mu_expert - mu_bar) @ step - eps_rl) / (step @ step))


def contraction_ratio_bound(k, gamma, eps_rl, dist):
    """``(sqrt(k) + (1-g) sqrt(eps_rl/2)) / sqrt(k + (1-g)^2 (dist^2 - eps_rl))``."""
    h = 1.0 - gamma
    radicand = k + h * h * (dist * dist - eps_rl)
    if radicand <= 0:
        raise ValueError(f"non-positive radicand {radicand!r}: contraction hypotheses violated")
    return (math.sqrt(k) + h * math.sqrt(eps_rl / 2.0)) / math.sqrt(radicand)


def iteration_bound(k, gamma, eps, eps_rl):
    """Iterations after which the distance to the expert is guaranteed below ``eps``.

    Evaluates ``ln(sqrt(k)/((1-g) eps)) / ln(sqrt(k + (1-g)^2 (eps^2 - eps_rl))
    / (sqrt(k) + (1-g) sqrt(eps_rl/2)))``. The result is flagged vacuous
    when the inner ratio is at most one.
    """
    if not eps * eps > eps_rl:
        raise ValueError(f"need eps^2 > eps_rl, got eps={eps!r}, eps_rl={eps_rl!r}")
    h = 1.0 - gamma
    num = math.log(math.sqrt(k) / (h * eps))
    simplified = 2.0 * k * num / (h * h * (eps * eps - eps_rl))
    den = math.log(math.sqrt(k + h * h * (eps * eps - eps_rl)) / (math.sqrt(k) + h * math.sqrt(eps_rl / 2.0)))
    if den <= 0:
        return IterationBound(None, simplified, True)
    return IterationBound(num / den, simplified, False)


def contraction_certificate(iteration, mu_expert, mu_bar, mu_next, k, gamma, eps_rl):
    """Check one step of the contraction argument.

    ``eps_rl`` must be the optimality slack in units of the unnormalized
    reward ``(mu_E - mu_bar) . phi``. The observed ratio is
    ``||mu_E - mu_tilde|| / ||mu_E - mu_bar||``.
    """
    mu_expert, mu_bar, mu_next = (np.asarray(v, dtype=float) for v in (mu_expert, mu_bar, mu_next))
    dist = float(np.linalg.norm(mu_expert - mu_bar))
    c = projection_weight(mu_expert, mu_bar, mu_next, eps_rl)
    mu_tilde = projection_update(mu_expert, mu_bar, mu_next, eps_rl)
    observed = float(np.linalg.norm(mu_expert - mu_tilde)) / dist
    bound = contraction_ratio_bound(k, gamma, eps_rl, dist)
    return IterationDiagnostic(iteration, dist, observed, bound, dist * dist >= 2 * eps_rl, c)


def certify_run(result, k, gamma):
    """Contraction and iteration-count certificates for a finished run.

    Each step's slack is ``||mu_E - mu_bar|| * eps_rl`` (the solver certifies
    ``eps_rl`` for the unit-norm reward); the iteration bound is evaluated
    with the largest such slack, floored at ``eps_rl``.
    """
    eps, eps_rl = result.config.eps, result.config.eps_rl
    steps = [r.diagnostic for r in result.records if r.diagnostic is not None]
    checked = [d for d in steps if d.distance >= eps]
    slack = max([eps_rl] + [d.distance * eps_rl for d in steps])
    bound = iteration_bound(k, gamma, eps, slack) if eps * eps > slack else None
    vacuous = bound is None or bound.vacuous
    return {
        "steps": steps,
        "contraction_ok": all(d.satisfied for d in checked),
        "iterations_observed": result.n,
        "eps_rl_effective": slack,
        "iteration_bound": None if vacuous else bound.iterations,
        "bound_vacuous": vacuous,
        "iterations_ok": None if vacuous else result.n <= math.ceil(bound.iterations),
    }
