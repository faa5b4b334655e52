"""C-infinity step and cutoff helpers used for partitions of unity."""

import numpy as np


def _bump(u):
    """exp(-1/u) for u > 0, zero otherwise; smooth at 0."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        out[pos] = np.exp(-1.0 / u[pos])
    return out


def _bump_d(u):
    """Derivative of _bump: exp(-1/u)/u^2 on u > 0."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        out[pos] = np.exp(-1.0 / u[pos]) / u[pos] ** 2
    return out


def smooth_step(t):
    """Smooth transition: 0 for t <= 0, 1 for t >= 1, C-infinity in between."""
    t = np.asarray(t, dtype=float)
    a = _bump(t)
    b = _bump(1.0 - t)
    with np.errstate(invalid="ignore"):
        s = np.where(a + b > 0, a / (a + b), 0.0)
    return np.where(t <= 0, 0.0, np.where(t >= 1, 1.0, s))


def smooth_step_d(t):
    """Derivative of smooth_step (vanishes outside (0, 1))."""
    t = np.asarray(t, dtype=float)
    a, b = _bump(t), _bump(1.0 - t)
    ap, bp = _bump_d(t), _bump_d(1.0 - t)
    den = (a + b) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        d = np.where(den > 0, (ap * b + a * bp) / den, 0.0)
    return np.where((t <= 0) | (t >= 1), 0.0, d)


def zeta_cutoff(t):
    """Smooth cutoff: 1 on |t| <= 1/2, 0 on |t| >= 1."""
    t = np.asarray(t, dtype=float)
    return smooth_step(2.0 * (1.0 - np.abs(t)))


def zeta_cutoff_d(t):
    """Derivative of zeta_cutoff."""
    t = np.asarray(t, dtype=float)
    return -2.0 * np.sign(t) * smooth_step_d(2.0 * (1.0 - np.abs(t)))
