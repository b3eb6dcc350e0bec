"""Max-margin direction over difference vectors via the hull's min-norm point.

For difference vectors d_j the problem ``max_{||w||<=1} min_j w.d_j`` is
dual to finding the point x* of minimum norm in Co{d_j}: the optimal margin
is ``||x*||`` and ``w* = x*/||x*||`` whenever the origin lies outside the hull.
"""

from dataclasses import dataclass

import numpy as np

from irlearn._validation import check_open_unit, frozen
from irlearn.exceptions import ConvergenceError


@dataclass(frozen=True, eq=False)
class MarginSolution:
    """Unit direction ``w`` (or 0), margin ``t``, hull weights and the hull point."""

    w: np.ndarray
    t: float
    weights: np.ndarray
    eps_used: float
    point: np.ndarray

    def __post_init__(self):
        for name in ("w", "weights", "point"):
            object.__setattr__(self, name, frozen(np.asarray(getattr(self, name), dtype=float)))

    @property
    def separable(self):
        return bool(np.any(self.w))


def _as_points(points):
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.size == 0 or P.ndim != 2:
        raise ValueError("need at least one point of dimension >= 1")
    if not np.all(np.isfinite(P)):
        raise ValueError("points contain non-finite entries")
    return P


def min_norm_point(points, tol, max_iter=200_000):
    """Minimum-norm point of the convex hull of ``points`` (rows).

    Frank-Wolfe with away steps and exact line search on ``0.5 ||x||^2``.
    Stops once the duality gap ``||x||^2 - min_j x.p_j`` is at most
    ``tol**2``. Returns ``(x, weights)`` with ``x = weights @ points``.
    """
    P = _as_points(points)
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    n = P.shape[0]
    gram_diag = np.einsum("ij,ij->i", P, P)
    lam = np.zeros(n)
    lam[int(np.argmin(gram_diag))] = 1.0
    x = lam @ P
    target = tol * tol
    best = (np.inf, x, lam.copy())
    for _ in range(max_iter):
        scores = P @ x
        xx = x @ x
        s = int(np.argmin(scores))
        fw_gap = xx - scores[s]
        if fw_gap < best[0]:
            best = (fw_gap, x, lam.copy())
        if fw_gap <= target:
            return x, lam
        active = np.flatnonzero(lam > 0)
        v = active[int(np.argmax(scores[active]))]
        away_gap = scores[v] - xx
        if fw_gap >= away_gap:
            d = P[s] - x
            step_max = 1.0
        else:
            d = x - P[v]
            step_max = lam[v] / (1.0 - lam[v])
        dd = d @ d
        if dd == 0.0:
            break
        step = min(max(-(x @ d) / dd, 0.0), step_max)
        if fw_gap >= away_gap:
            lam *= 1.0 - step
            lam[s] += step
        else:
            lam *= 1.0 + step
            lam[v] -= step
            if step == step_max:
                lam[v] = 0.0
        lam = np.clip(lam, 0.0, None)
        lam /= lam.sum()
        x = lam @ P
    gap, x_best, lam_best = best
    raise ConvergenceError(
        f"min_norm_point stopped with duality gap {gap:.3g} > {target:.3g}",
        best=x_best,
        weights=lam_best,
        gap=gap,
    )


def solve_max_margin(deltas, eps):
    """Direction ``w`` with ``d_j . w >= t* - eps`` for every difference vector.

    The hull point is solved to tolerance ``eps / 2``. If its norm does not
    exceed that tolerance the origin is (numerically) inside the hull and the
    result is ``w = 0, t = 0``.
    """
    eps = check_open_unit(eps, "eps")
    D = _as_points(deltas)
    tol = eps / 2.0
    x, lam = min_norm_point(D, tol)
    norm = float(np.linalg.norm(x))
    if norm > tol:
        w = x / norm
        t = float(np.min(D @ w))
    else:
        w = np.zeros(D.shape[1])
        t = 0.0
    return MarginSolution(w, t, lam, eps, x)
