"""Input validation helpers shared across the package."""

import numbers

import numpy as np

ROW_TOL = 1e-9
LOAD_TOL = 1e-6


def check_open_unit(value, name):
    """Return ``value`` as float after checking it lies in (0, 1)."""
    if not isinstance(value, numbers.Real) or not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {value!r}")
    return float(value)


def check_discount(gamma):
    if not isinstance(gamma, numbers.Real) or not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma!r}")
    return float(gamma)


def check_positive_int(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_nonnegative_int(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < 0:
        raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
    return int(value)


def check_distribution(p, name, axis=-1, tol=ROW_TOL):
    """Validate non-negative rows summing to one and return them renormalized.

    The renormalization only removes rounding drift (at most ``tol``); it
    keeps downstream samplers such as ``Generator.multinomial`` from
    rejecting rows whose partial sums overshoot 1 by a few ulps.
    """
    p = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p)):
        raise ValueError(f"{name} contains non-finite entries")
    if np.any(p < 0):
        raise ValueError(f"{name} has negative entries")
    sums = p.sum(axis=axis, keepdims=True)
    if np.any(np.abs(sums - 1.0) > tol):
        worst = float(np.max(np.abs(sums - 1.0)))
        raise ValueError(f"{name} rows must sum to 1 (max deviation {worst:.3g})")
    return p / sums


def check_vector(x, name, size=None):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {x.shape}")
    if size is not None and x.shape[0] != size:
        raise ValueError(f"{name} must have length {size}, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")
    return x


def check_weights(weights, n, name="weights"):
    """Convex-combination weights of length ``n``."""
    w = check_vector(weights, name, size=n)
    if np.any(w < 0):
        raise ValueError(f"{name} must be non-negative")
    if abs(w.sum() - 1.0) > ROW_TOL:
        raise ValueError(f"{name} must sum to 1, got {w.sum()!r}")
    return w / w.sum()


def frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a
