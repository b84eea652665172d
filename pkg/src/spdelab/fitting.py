"""Least-squares helpers shared by the verifiers and estimators."""

from __future__ import annotations

import numpy as np


def linfit(x, y):
    """Ordinary least squares y = a x + b; returns (a, b, residuals)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return float(coef[0]), float(coef[1]), resid


def fit_loglog(t_values, norms, drop_head: int = 0, drop_tail: int = 0):
    """Slope of log(norm) against log(t) over a trimmed dyadic ladder.

    ``drop_head`` removes the largest-t levels, ``drop_tail`` the smallest.
    Returns (slope, rms_residual, used_window).
    """
    t = np.asarray(t_values, dtype=float)
    v = np.asarray(norms, dtype=float)
    order = np.argsort(t)[::-1]  # largest t first
    t, v = t[order], v[order]
    lo = drop_head
    hi = len(t) - drop_tail
    if hi - lo < 2:
        raise ValueError("fewer than two levels left after trimming")
    t, v = t[lo:hi], v[lo:hi]
    if np.any(v <= 0):
        raise ValueError("norms must be positive for a log-log fit")
    slope, _, resid = linfit(np.log(t), np.log(v))
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return slope, rms, (float(t[-1]), float(t[0]))


def slope_with_se(x, y, y_se=None):
    """Slope, its standard error, and R^2.

    With ``y_se`` given, the slope uncertainty is propagated from the
    per-point errors (Monte Carlo use); otherwise it comes from the fit
    residuals.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept, resid = linfit(x, y)
    sxx = float(np.sum((x - x.mean()) ** 2))
    ssr = float(np.sum(resid ** 2))
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0
    if y_se is not None:
        w = (x - x.mean()) / sxx
        se = float(np.sqrt(np.sum((w * np.asarray(y_se, dtype=float)) ** 2)))
    else:
        dof = max(len(x) - 2, 1)
        se = float(np.sqrt(ssr / dof / sxx))
    return slope, se, r2
