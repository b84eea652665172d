"""Semigroup-based Besov norms and regularity estimation.

Negative regularity is read off the decay of ||Q_t f||, positive regularity
off the growth of ||(Q_t - id) f||; the regularity gain of the kernel K is
their difference.  All slopes are fitted on dyadic t-ladders with the
largest and smallest configured levels excluded, because the damping
constant c contaminates the large-t end and grid resolution the small-t end.

The default ladders sit deep in the grid's inertial range: with angular
frequencies on the unit torus, a spatial mode k feels the fourth-order flow
at times of order ((2 pi k)^-4), so useful windows for grids up to 512^2 lie
around t in [2^-34, 2^-16].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .fields import Field2, Field3, sup_weighted_norm
from .fitting import fit_loglog
from .scaling import WeightSpec

DEFAULT_NEG_LEVELS = tuple(2.0 ** (-j) for j in range(20, 35))
DEFAULT_POS_LEVELS = DEFAULT_NEG_LEVELS


@dataclass(frozen=True)
class BesovEstimate:
    t_levels: tuple
    norms: tuple
    alpha_hat: float
    residual: float
    window: tuple
    mode: str
    c_dominated: bool = False

    def as_dict(self):
        return {
            "mode": self.mode,
            "t_levels": list(self.t_levels),
            "norms": list(self.norms),
            "alpha_hat": self.alpha_hat,
            "residual": self.residual,
            "window": list(self.window),
            "c_dominated": self.c_dominated,
        }


def _levels(t_range):
    ts = sorted(float(t) for t in t_range)
    if len(ts) == 2:
        lo, hi = ts
        js = range(int(np.floor(-np.log2(hi))), int(np.ceil(-np.log2(lo))) + 1)
        ts = sorted(2.0 ** (-j) for j in js)
    return tuple(sorted(ts, reverse=True))


def besov_norm(f, alpha: float, w: WeightSpec, provider,
               t_levels=DEFAULT_NEG_LEVELS) -> float:
    """sup over the ladder of t^{-alpha/ell} ||Q_t f||_{L^inf(w)}."""
    if alpha > 0:
        raise ConfigError("this norm is defined for alpha <= 0")
    ell = provider.scaling.ell
    best = 0.0
    for t in t_levels:
        qf = provider.apply(f, t)
        best = max(best, t ** (-alpha / ell) * sup_weighted_norm(qf, w, provider.scaling))
    return best


def _sweep(f, provider, t_levels, subtract_identity: bool):
    norms = []
    for t in t_levels:
        qf = provider.apply(f, t)
        vals = qf.values - f.values if subtract_identity else qf.values
        norms.append(float(np.abs(vals).max()))
    return norms


def estimate_regularity_neg(f, provider, t_range=DEFAULT_NEG_LEVELS,
                            drop_head: int = 2, drop_tail: int = 2) -> BesovEstimate:
    """alpha_hat = ell * slope of log ||Q_t f||_inf against log t."""
    ts = _levels(t_range)
    if len(ts) < 4:
        raise ConfigError("need at least 4 dyadic levels")
    norms = _sweep(f, provider, ts, subtract_identity=False)
    slope, rms, window = fit_loglog(ts, norms, drop_head, drop_tail)
    ell = provider.scaling.ell
    return BesovEstimate(ts, tuple(norms), ell * slope, rms, window, "neg")


def estimate_regularity_pos(f, provider, t_range=DEFAULT_POS_LEVELS,
                            drop_head: int = 2, drop_tail: int = 2) -> BesovEstimate:
    """alpha_hat = ell * slope of log ||(Q_t - id) f||_inf, valid in (0, ell)."""
    ts = _levels(t_range)
    if len(ts) < 4:
        raise ConfigError("need at least 4 dyadic levels")
    norms = _sweep(f, provider, ts, subtract_identity=True)
    slope, rms, window = fit_loglog(ts, norms, drop_head, drop_tail)
    ell = provider.scaling.ell
    # constants see only the damping: (Q_t - id) f = (e^{-ct} - 1) f
    c = provider.c
    ref = np.array([abs(np.expm1(-c * t)) for t in ts])
    ratios = np.array(norms) / (ref * float(np.abs(f.values).max()) + 1e-300)
    c_dominated = bool(np.ptp(ratios) < 1e-6 * np.max(ratios))
    return BesovEstimate(ts, tuple(norms), ell * slope, rms, window, "pos", c_dominated)


def schauder_gain(f, provider, t_range=DEFAULT_NEG_LEVELS,
                  neg_bounds=(-2.0, 0.0)) -> dict:
    """Regularity gained by the kernel K: pos(K f) - neg(f), contract ~ 2."""
    from .kernels import PamProvider

    if not isinstance(provider, PamProvider):
        raise ConfigError("the Schauder gain is measured for the pam kernels")
    neg = estimate_regularity_neg(f, provider, t_range)
    if not neg_bounds[0] < neg.alpha_hat < neg_bounds[1]:
        raise ConfigError(
            f"input regularity {neg.alpha_hat:.3f} outside {neg_bounds}; "
            "the gain contract covers (-2, 0)")
    if isinstance(f, Field2):
        kf = Field2(f.grid, provider.k2(f.values))
    else:
        kf = Field3(f.grid, provider.k3(f.values))
    pos = estimate_regularity_pos(kf, provider, t_range)
    return {
        "neg": neg,
        "pos": pos,
        "gain": pos.alpha_hat - neg.alpha_hat,
    }


def median_regularity(fields, provider, mode: str, t_range=DEFAULT_NEG_LEVELS) -> dict:
    """Median alpha_hat over a batch of fields (variance control for the
    sup-norm slopes of Gaussian data)."""
    est = estimate_regularity_neg if mode == "neg" else estimate_regularity_pos
    alphas = [est(f, provider, t_range).alpha_hat for f in fields]
    return {"alphas": alphas, "median": float(np.median(alphas))}
