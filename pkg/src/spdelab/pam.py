"""Semi-implicit solver for the renormalized multiplicative-noise equation

    (d_1 - a(x') Delta + c) u_n = b(u_n) xi_n - C_n (b b')(u_n)

and the coupled-level convergence harness.  All levels of a study share one
white-noise sample; changing n changes only the mollification filter, so
solution differences across n measure renormalization convergence rather
than sampling noise.

Forcing products are assembled pseudospectrally with 2/3-rule dealiasing.
Built-in nonlinearities carry analytic b' and (b b')' to keep the
counterterm free of differencing error.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DivergenceSignal
from .fields import Field2, Grid2, dealias_mask
from .kernels import Coefficient, _heat_step
from .model import ModelledDistribution, PamStructure, md_norms
from .noise import Mollifier, NoiseSample, get_profile, mollify, sample_white_noise
from .scaling import Scaling

BLOWUP_GUARD = 1e6


@dataclass(frozen=True)
class Nonlinearity:
    name: str
    b: callable
    bprime: callable
    bbprime: callable

    @classmethod
    def builtin(cls, kind: str) -> "Nonlinearity":
        if kind == "cos":
            return cls("cos", np.cos,
                       lambda u: -np.sin(u),
                       lambda u: -0.5 * np.sin(2.0 * u))
        if kind == "tanh":
            return cls("tanh", np.tanh,
                       lambda u: 1.0 / np.cosh(u) ** 2,
                       lambda u: np.tanh(u) / np.cosh(u) ** 2)
        raise ConfigError(f"unknown nonlinearity {kind!r} (builtins: cos, tanh)")


def holder_initial_condition(grid: Grid2, theta: float, amplitude: float = 1.0) -> Field2:
    """|sin(2 pi x2) sin(2 pi x3)|^theta, an exactly theta-Hoelder profile."""
    X2, X3 = grid.coords()
    vals = amplitude * np.abs(np.sin(2 * np.pi * X2) * np.sin(2 * np.pi * X3)) ** theta
    return Field2(grid, vals)


def holder_norm(u: Field2, theta: float, lags=(1, 2, 4, 8)) -> float:
    """Grid Hoelder norm: sup plus the lag-based seminorm."""
    semi = 0.0
    for axis, n in ((0, u.grid.n2), (1, u.grid.n3)):
        for lag in lags:
            h = lag / n
            semi = max(semi, float(np.abs(np.roll(u.values, lag, axis=axis)
                                          - u.values).max()) / h ** theta)
    return float(np.abs(u.values).max()) + semi


@dataclass(frozen=True)
class PamProblem:
    coef: Coefficient
    b: Nonlinearity
    u0: Field2
    theta: float
    T: float
    dt: float
    n: int
    renormalize: bool = True
    seed: int = 0
    eps: float = 0.05
    profile: str = "bump"

    def __post_init__(self):
        if not 0 < self.theta < 1 - self.eps:
            raise ConfigError("theta must lie in (0, 1 - eps)")
        if not 0 < self.eps < 0.25:
            raise ConfigError("the solver requires eps in (0, 1/4)")
        if self.T <= 0 or self.dt <= 0 or self.dt > self.T:
            raise ConfigError("need 0 < dt <= T")
        # forcing-resolution guard: the mollified noise varies on scale 2^-n
        if self.dt * 4.0 ** self.n > 8.0:
            raise ConfigError(
                f"dt * 4^n = {self.dt * 4.0 ** self.n:.3g} too large; "
                "the level-n forcing is unresolved at this step size")


@dataclass
class PamSolution:
    times: np.ndarray
    values: np.ndarray = field(repr=False)
    sup_history: np.ndarray
    rejections: int
    noise_hash: str
    cn_hash: str


def _hash_array(arr) -> str:
    return hashlib.sha256(np.ascontiguousarray(arr).tobytes()).hexdigest()[:16]


def solve_pam(p: PamProblem, Cn=None, noise: NoiseSample | None = None,
              record_every: int | None = None) -> PamSolution:
    """March the renormalized equation from u0 over (0, T]."""
    if p.renormalize:
        cn_vals = np.asarray(getattr(Cn, "values", Cn), dtype=float)
        if getattr(Cn, "n", p.n) != p.n:
            raise ConfigError("Cn level does not match the problem level")
        if cn_vals.shape != p.coef.a.grid.shape:
            raise ConfigError("Cn grid does not match")
    else:
        cn_vals = None
    grid = p.coef.a.grid
    if noise is None:
        noise = sample_white_noise(grid, p.seed)
    xi = mollify(noise, Mollifier(get_profile(p.profile), p.n)).values
    mask = dealias_mask(grid)
    nsteps = int(round(p.T / p.dt))
    if abs(nsteps * p.dt - p.T) > 1e-9 * p.T:
        raise ConfigError("T must be an integer number of steps")
    if record_every is None:
        record_every = max(1, nsteps // 32)

    def dprod(f, g):
        ft = np.fft.ifft2(np.fft.fft2(f) * mask).real
        gt = np.fft.ifft2(np.fft.fft2(g) * mask).real
        return np.fft.ifft2(np.fft.fft2(ft * gt) * mask).real

    u = p.u0.values.copy()
    sup_hist = [float(np.abs(u).max())]
    rec_times, rec_vals = [], []
    rejections = 0
    for step in range(1, nsteps + 1):
        forcing = dprod(p.b.b(u), xi)
        if p.renormalize:
            forcing = forcing - dprod(cn_vals, p.b.bbprime(u))
        u = _heat_step(u, p.coef, p.dt, forcing)
        sup = float(np.abs(u).max())
        sup_hist.append(sup)
        if sup > BLOWUP_GUARD:
            raise DivergenceSignal(
                f"sup norm {sup:.3g} beyond the blow-up guard at step {step}")
        if step % record_every == 0:
            rec_times.append(step * p.dt)
            rec_vals.append(u.copy())
    return PamSolution(
        times=np.array(rec_times),
        values=np.stack(rec_vals),
        sup_history=np.array(sup_hist),
        rejections=rejections,
        noise_hash=_hash_array(noise.spectrum),
        cn_hash=_hash_array(cn_vals) if cn_vals is not None else "none",
    )


def holder_seminorm_spacetime(times, values, theta: float,
                              sc: Scaling = Scaling.pam(),
                              time_lags=(1, 2, 4), space_lags=(1, 2, 4, 8)) -> float:
    """Anisotropic theta-Hoelder seminorm of a snapshot stack: increments
    along the axes at dyadic lags, time counted with exponent 1/s_1."""
    best = 0.0
    nt = len(times)
    for lag in time_lags:
        if lag >= nt:
            continue
        dtau = float(times[lag] - times[0])
        dist = dtau ** (1.0 / sc.s[0])
        diff = np.abs(values[lag:] - values[:-lag]).max()
        best = max(best, float(diff) / dist ** theta)
    n2, n3 = values.shape[1:]
    for lag in space_lags:
        for axis, n in ((1, n2), (2, n3)):
            h = lag / n
            diff = np.abs(np.roll(values, lag, axis=axis) - values).max()
            best = max(best, float(diff) / h ** theta)
    return best


@dataclass
class ConvergenceReport:
    n_range: list
    d_n: list
    d_n_full: list
    ratios: list
    holder_diffs: list
    holder_ratios: list
    sup_norms: list
    renormalized: bool
    verdict: bool
    inconclusive: bool
    noise_hash: str
    details: dict

    def as_dict(self):
        return {
            "n_range": self.n_range,
            "d_n": self.d_n,
            "d_n_full_interval": self.d_n_full,
            "ratios": self.ratios,
            "holder_diffs": self.holder_diffs,
            "holder_ratios": self.holder_ratios,
            "sup_norms": self.sup_norms,
            "renormalized": self.renormalized,
            "verdict": self.verdict,
            "inconclusive": self.inconclusive,
            "noise_hash": self.noise_hash,
            **self.details,
        }


def convergence_study(base: PamProblem, n_range, renormalize: bool,
                      t_cut: float, cn_map: dict | None = None,
                      record_every: int | None = None,
                      ratio_bound: float = 0.8) -> ConvergenceReport:
    """Run coupled levels and fit the geometric decay of the differences.

    Verdicts: renormalized studies pass when the ratios across the top three
    increments stay below ``ratio_bound``; un-renormalized studies are
    expected to show monotone growth of the sup norm (or of d_n) in n.
    """
    ns = sorted(n_range)
    grid = base.coef.a.grid
    noise = sample_white_noise(grid, base.seed)
    if renormalize and cn_map is None:
        from .renorm import compute_renorm
        prof = get_profile(base.profile)
        cn_map = {n: compute_renorm(base.coef, Mollifier(prof, n)) for n in ns}
    sols = {}
    sups = {}
    diverged = {}
    for n in ns:
        prob = PamProblem(base.coef, base.b, base.u0, base.theta, base.T, base.dt,
                          n, renormalize, base.seed, base.eps, base.profile)
        try:
            sol = solve_pam(prob, cn_map[n] if renormalize else None, noise,
                            record_every)
            sols[n] = sol
            keep = sol.times > t_cut
            sups[n] = float(np.abs(sol.values[keep]).max())
        except DivergenceSignal:
            diverged[n] = True
            sups[n] = BLOWUP_GUARD
    d_n, d_full, holders = [], [], []
    pairs = [(ns[i], ns[i + 1]) for i in range(len(ns) - 1)]
    for lo, hi in pairs:
        if lo in diverged or hi in diverged:
            d_n.append(float("inf"))
            d_full.append(float("inf"))
            holders.append(float("inf"))
            continue
        keep = sols[lo].times > t_cut
        diff = sols[hi].values - sols[lo].values
        d_n.append(float(np.abs(diff[keep]).max()))
        d_full.append(float(np.abs(diff).max()))
        holders.append(holder_seminorm_spacetime(
            sols[lo].times[keep], diff[keep], base.theta))
    ratios = [d_n[i + 1] / d_n[i] if d_n[i] > 0 else float("inf")
              for i in range(len(d_n) - 1)]
    hratios = [holders[i + 1] / holders[i] if holders[i] > 0 else float("inf")
               for i in range(len(holders) - 1)]
    floor = 1e-11 * max(sups.values())
    inconclusive = bool(d_n and min(d_n) < floor)
    if renormalize:
        top = ratios[-2:] if len(ratios) >= 2 else ratios
        verdict = bool(top and all(r < ratio_bound for r in top))
    else:
        sup_seq = [sups[n] for n in ns]
        sup_monotone = all(sup_seq[i + 1] > sup_seq[i] for i in range(len(sup_seq) - 1))
        dn_monotone = len(d_n) >= 2 and all(d_n[i + 1] > d_n[i] for i in range(len(d_n) - 1))
        verdict = bool(sup_monotone or dn_monotone)
    details = {
        "t_cut": t_cut,
        "dt": base.dt,
        "T": base.T,
        "seed": base.seed,
        "cn_hashes": {n: _hash_array(np.asarray(getattr(cn_map[n], "values", cn_map[n])))
                      for n in ns} if renormalize else {},
        "diverged_levels": sorted(diverged),
        "sup_monotone": (not renormalize) and all(
            sups[ns[i + 1]] > sups[ns[i]] for i in range(len(ns) - 1)),
    }
    return ConvergenceReport(ns, d_n, d_full, ratios, holders, hratios,
                             [sups[n] for n in ns], renormalize, verdict,
                             inconclusive, _hash_array(noise.spectrum), details)


# ---------------------------------------------------------------------------
# the initial-condition lift


def heat_flow_slices(u0: Field2, coef: Coefficient, times, substeps: int = 4):
    """P_{x_1} u0 at the given times (exact multiplier for constant a,
    substepped semi-implicit march otherwise)."""
    grid = u0.grid
    kt2 = grid.angular_sq()
    times = np.asarray(times, dtype=float)
    out = np.empty((len(times),) + grid.shape)
    if coef.is_constant:
        spec = np.fft.fft2(u0.values)
        for i, t in enumerate(times):
            out[i] = np.fft.ifft2(spec * np.exp(-t * (coef.abar * kt2 + coef.c))).real
        return out
    u = u0.values.copy()
    t_prev = 0.0
    # rough initial data has a large discrete Laplacian; grade the first gap
    # so the explicit coefficient correction stays inside the stability guard
    n = max(grid.n2, grid.n3)
    dt_first = 1.0 / (max(coef.c2 - coef.c1, 1e-6) * n ** 1.5 * 4.0)
    for i, t in enumerate(times):
        gap = t - t_prev
        if i == 0:
            m = max(substeps, int(np.ceil(gap / dt_first)))
        else:
            m = substeps
        for _ in range(m):
            u = _heat_step(u, coef, gap / m)
        out[i] = u
        t_prev = t
    return out


def polynomial_lift(slices, times, grid: Grid2, gamma: float, eta: float,
                    eps: float = 0.05) -> ModelledDistribution:
    """L f = f 1 + (d_2 f) X_2 + (d_3 f) X_3 on the given slices."""
    K2, K3 = grid.wavenumbers()
    spec = np.fft.fft2(slices, axes=(1, 2))
    d2 = np.fft.ifft2(spec * (2j * np.pi * K2), axes=(1, 2)).real
    d3 = np.fft.ifft2(spec * (2j * np.pi * K3), axes=(1, 2)).real
    return ModelledDistribution(np.asarray(times, dtype=float),
                                {"One": np.asarray(slices), "X2": d2, "X3": d3},
                                gamma, eta, PamStructure(eps))


def initial_lift_check(u0: Field2, theta: float, gamma: float,
                       coef: Coefficient, t_window: float = 0.5,
                       nslices: int = 24, eps: float = 0.05) -> dict:
    """Norms of the lifted heat flow L(P u0) on (0, t) against the grid
    Hoelder norm of u0; the ratio should stay bounded across a u0 family.

    Coefficient norms are taken on a geometric time ladder (their sup sits
    at times comparable to the squared profile scale); the pair norm uses
    uniform slices, which is what its offset machinery assumes.
    """
    if not 0 < theta < 1:
        raise ConfigError("theta must lie in (0, 1)")
    geo_times = t_window * 2.0 ** (-np.arange(18, dtype=float))[::-1]
    geo = polynomial_lift(heat_flow_slices(u0, coef, geo_times), geo_times,
                          u0.grid, gamma, theta, eps)
    coeff_norms = md_norms(geo, None, time_lags=(), space_lags=())
    times = t_window * np.arange(1, nslices + 1) / nslices
    lift = polynomial_lift(heat_flow_slices(u0, coef, times), times,
                           u0.grid, gamma, theta, eps)
    pair_norms = md_norms(lift, None)
    h = holder_norm(u0, theta)
    triple = coeff_norms["coefficient_norm"] + pair_norms["pair_norm"]
    return {
        "triple_norm": triple,
        "coefficient_norm": coeff_norms["coefficient_norm"],
        "ring_norm": coeff_norms["ring_norm"],
        "pair_norm": pair_norms["pair_norm"],
        "holder_norm_u0": h,
        "ratio": triple / h if h > 0 else 0.0,
    }
