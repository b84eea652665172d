"""The three kernels of the fourth-order parabolic problem and their
verifiers.

For a diffusion coefficient a(x') on T^2 and damping c > 0:

* the parabolic propagator for d_1 - a Delta + c, advanced per time step by
  ``heat_propagate`` (semi-implicit around the mean coefficient, exact
  exponential treatment of the damping);
* the semigroup Q_t = exp(t(L - c)) with L = (d_1 - a Delta)(d_1 + Delta),
  an exact spectral multiplier for constant a and an exponential-Euler
  splitting around the mean symbol otherwise;
* the time-truncated kernel K = -int_0^1 (d_1 + Delta) Q_t dt, realized by a
  dyadic Gauss quadrature in t (``k_apply``) and, on time-independent
  inputs, by the resolvent identity K f = -Delta (c - L)^{-1} (f - Q_1 f)
  (``k_apply_static``).

Frequencies are angular on the unit torus: a mode cos(2 pi k x) decays under
the heat flow like exp(-t a (2 pi k)^2).

Substep counts for the variable-coefficient semigroup are quantized so that
requested times that are multiples of the quantum compose exactly; the
semigroup law then holds to accumulation error for dyadic times.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConditioningError, ConfigError, StepSizeError
from .fields import Field1, Field2, Field3, Grid1, Grid2, Grid3
from .fitting import fit_loglog
from .scaling import GaussEnvelope, Scaling

DEFAULT_C = 1.0


@dataclass(frozen=True)
class Coefficient:
    """Diffusion coefficient a on T^2 with its bounds and the damping c."""

    a: Field2
    c: float = DEFAULT_C

    def __post_init__(self):
        if self.c <= 0:
            raise ConfigError("damping constant c must be positive")
        if float(self.a.values.min()) <= 0:
            raise ConfigError("diffusion coefficient must be strictly positive")

    @property
    def c1(self) -> float:
        return float(self.a.values.min())

    @property
    def c2(self) -> float:
        return float(self.a.values.max())

    @property
    def abar(self) -> float:
        return float(self.a.values.mean())

    @property
    def is_constant(self) -> bool:
        return self.c2 - self.c1 < 1e-14

    def holder_seminorm(self, theta: float = 1.0) -> float:
        """Grid Hoelder seminorm of a, reported for diagnostics."""
        vals = self.a.values
        best = 0.0
        for axis, n in ((0, self.a.grid.n2), (1, self.a.grid.n3)):
            for lag in (1, 2, 4):
                h = lag / n
                diff = np.abs(np.roll(vals, lag, axis=axis) - vals).max()
                best = max(best, diff / h ** theta)
        return float(best)

    @classmethod
    def constant(cls, grid: Grid2, value: float = 1.0, c: float = DEFAULT_C):
        return cls(Field2(grid, np.full(grid.shape, float(value))), c)

    @classmethod
    def cosine_profile(cls, grid: Grid2, contrast: float, base: float = 1.0,
                       c: float = DEFAULT_C):
        """a = base + contrast cos(2 pi x2) cos(2 pi x3), bounds base -+ contrast."""
        if not 0 <= contrast < base:
            raise ConfigError("contrast must lie in [0, base)")
        X2, X3 = grid.coords()
        vals = base + contrast * np.cos(2 * np.pi * X2) * np.cos(2 * np.pi * X3)
        return cls(Field2(grid, vals), c)


@dataclass(frozen=True)
class StepPolicy:
    """Substep policy for the variable-coefficient semigroup."""

    quantum: float = 2.0 ** -8
    growth_tol: float = 0.05
    min_substeps: int = 1

    def substeps(self, t: float) -> tuple[int, float]:
        m = max(int(np.ceil(t / self.quantum - 1e-12)), self.min_substeps)
        # exact quantum when t is a multiple: composition is then exact
        if abs(round(t / self.quantum) - t / self.quantum) < 1e-12:
            m = max(int(round(t / self.quantum)), self.min_substeps)
        return m, t / m


# ---------------------------------------------------------------------------
# elliptic solves


def _spectral2(values):
    return np.fft.fft2(values)


def _inv_spectral2(coeffs):
    return np.fft.ifft2(coeffs).real


def elliptic_solve(g: Field2, coef: Coefficient, tol: float = 1e-10,
                   max_iter: int = 500) -> Field2:
    """Solve (c - a Delta) h = g with a mean-coefficient preconditioner."""
    vals = _elliptic_solve_arr(g.values, coef, tol, max_iter)
    return Field2(g.grid, vals)


def _elliptic_solve_arr(g, coef: Coefficient, tol=1e-10, max_iter=500):
    grid = coef.a.grid
    kt2 = grid.angular_sq()
    pre = 1.0 / (coef.c + coef.abar * kt2)
    h = _inv_spectral2(_spectral2(g) * pre)
    if coef.is_constant:
        return h
    a = coef.a.values
    scale = float(np.abs(g).max())
    if scale == 0.0:
        return np.zeros_like(g)
    for _ in range(max_iter):
        lap_h = _inv_spectral2(_spectral2(h) * (-kt2))
        res = g - (coef.c * h - a * lap_h)
        if float(np.abs(res).max()) < tol * scale:
            return h
        h = h + _inv_spectral2(_spectral2(res) * pre)
    raise ConditioningError(
        f"elliptic solve did not reach tol {tol:g} in {max_iter} iterations "
        f"(contrast {coef.c2 - coef.c1:.3g})")


def _elliptic4_solve_arr(g, coef: Coefficient, tol=1e-12, max_iter=500):
    """Solve (c + a Delta^2) h = g (the static resolvent of c - L).

    Converges on the preconditioned update: the raw residual of a
    fourth-order operator sits above eps * |k|^4 in double precision.
    """
    grid = coef.a.grid
    kt2 = grid.angular_sq()
    pre = 1.0 / (coef.c + coef.abar * kt2 ** 2)
    h = _inv_spectral2(_spectral2(g) * pre)
    if coef.is_constant:
        return h
    a = coef.a.values
    scale = float(np.abs(h).max())
    if scale == 0.0:
        return np.zeros_like(g)
    for _ in range(max_iter):
        bilap_h = _inv_spectral2(_spectral2(h) * kt2 ** 2)
        res = g - (coef.c * h + a * bilap_h)
        upd = _inv_spectral2(_spectral2(res) * pre)
        if float(np.abs(upd).max()) < tol * scale:
            return h
        h = h + upd
    raise ConditioningError("fourth-order resolvent solve did not converge")


# ---------------------------------------------------------------------------
# one parabolic step


def heat_propagate(u: Field2, coef: Coefficient, dt: float,
                   forcing: Field2 | None = None,
                   stability_factor: float = 1.0) -> Field2:
    """One semi-implicit step of d_1 u = a Delta u - c u + forcing.

    The mean part is solved implicitly in spectral space, the coefficient
    fluctuation explicitly, and the damping by its exact exponential factor
    (so constants decay by exp(-c dt) to rounding).
    """
    if dt <= 0:
        raise ConfigError("dt must be positive")
    arr = _heat_step(u.values, coef, dt,
                     None if forcing is None else forcing.values,
                     stability_factor)
    return Field2(u.grid, arr)


def _heat_step(u, coef: Coefficient, dt, forcing=None, stability_factor=1.0):
    grid = coef.a.grid
    kt2 = grid.angular_sq()
    rhs = u
    if not coef.is_constant:
        lap_u = _inv_spectral2(_spectral2(u) * (-kt2))
        corr = dt * (coef.a.values - coef.abar) * lap_u
        bound = stability_factor * max(float(np.abs(u).max()), 1e-300)
        if float(np.abs(corr).max()) > bound:
            raise StepSizeError(
                f"explicit correction {np.abs(corr).max():.3g} exceeds "
                f"stability bound {bound:.3g}; reduce dt")
        rhs = rhs + corr
    if forcing is not None:
        rhs = rhs + dt * forcing
    solved = _inv_spectral2(_spectral2(rhs) / (1.0 + dt * coef.abar * kt2))
    return np.exp(-coef.c * dt) * solved


# ---------------------------------------------------------------------------
# semigroup providers


class PamProvider:
    """Q_t and K for d_t - L + c, L = (d_1 - a Delta)(d_1 + Delta).

    Works on time-independent fields (Field2, through the static reduction
    L = -a Delta^2) and on space-time fields (Field3 on a periodic window).
    """

    scaling = Scaling.pam()

    def __init__(self, coef: Coefficient, grid3: Grid3 | None = None,
                 policy: StepPolicy = StepPolicy()):
        if grid3 is not None and grid3.spatial != coef.a.grid:
            raise ConfigError("grid3 spatial part must match the coefficient grid")
        self.coef = coef
        self.grid2 = coef.a.grid
        self.grid3 = grid3
        self.policy = policy

    @property
    def c(self) -> float:
        return self.coef.c

    @property
    def mode(self) -> str:
        return "pam_constant_a" if self.coef.is_constant else "pam_variable_a"

    # -- static (time independent) path ------------------------------------

    @cached_property
    def _kt2(self):
        return self.grid2.angular_sq()

    def qhat2(self, t: float):
        """Static multiplier of Q_t for the mean coefficient."""
        return np.exp(-t * (self.coef.abar * self._kt2 ** 2 + self.c))

    @cached_property
    def khat2(self):
        """Static multiplier of K for constant a (exact t-integral)."""
        kt2 = self._kt2
        sym = self.coef.abar * kt2 ** 2 + self.c
        return kt2 * (1.0 - np.exp(-sym)) / sym

    def one(self, t: float) -> float:
        """Q_t applied to the constant 1 (exact for both modes)."""
        return float(np.exp(-self.c * t))

    def q2(self, values: np.ndarray, t: float) -> np.ndarray:
        if t <= 0:
            raise ConfigError("Q_t requires t > 0")
        if self.coef.is_constant:
            return _inv_spectral2(_spectral2(values) * self.qhat2(t))
        return self._etd2(values, t)

    def _etd2(self, values, t):
        # exponential sandwich: the coefficient fluctuation acts on the
        # half-damped state, so rough input cannot leak an un-damped copy of
        # itself through the explicit term
        kt2 = self._kt2
        m, delta = self.policy.substeps(t)
        lam = -(self.coef.abar * kt2 ** 2 + self.c)
        Eh = np.exp(0.5 * delta * lam)
        da = self.coef.a.values - self.coef.abar
        v = values
        for _ in range(m):
            vh = _spectral2(v) * Eh
            bilap = _inv_spectral2(vh * kt2 ** 2)
            r = -da * bilap
            v_new = _inv_spectral2((vh + delta * _spectral2(r)) * Eh)
            self._guard(v, v_new)
            v = v_new
        return v

    def _guard(self, v, v_new):
        lim = (1.0 + self.policy.growth_tol) * float(np.abs(v).max()) + 1e-300
        if float(np.abs(v_new).max()) > lim:
            raise StepSizeError("semigroup substep grew beyond the stability guard")

    def k2(self, values: np.ndarray) -> np.ndarray:
        """K on a time-independent field: -Delta (c - L)^{-1} (f - Q_1 f)."""
        if self.coef.is_constant:
            return _inv_spectral2(_spectral2(values) * self.khat2)
        g = values - self.q2(values, 1.0)
        h = _elliptic4_solve_arr(g, self.coef)
        return _inv_spectral2(_spectral2(h) * self._kt2)

    def dk2(self, values: np.ndarray, axis: int) -> np.ndarray:
        """Spatial derivative d_axis of K f for axis in {2, 3}."""
        kvals = self.k2(values)
        K2, K3 = self.grid2.wavenumbers()
        mult = 2j * np.pi * (K2 if axis == 2 else K3)
        return np.fft.ifft2(np.fft.fft2(kvals) * mult).real

    # -- space-time path ----------------------------------------------------

    def _require_grid3(self) -> Grid3:
        if self.grid3 is None:
            raise ConfigError("provider was constructed without a space-time grid")
        return self.grid3

    @cached_property
    def _symbols3(self):
        g3 = self._require_grid3()
        tau = g3.angular_tau()[:, None, None]
        kt2 = g3.spatial.angular_sq()[None, :, :]
        d1 = 1j * tau
        return d1, kt2

    @cached_property
    def _sigma_bar(self):
        d1, kt2 = self._symbols3
        return (d1 + self.coef.abar * kt2) * (d1 - kt2)

    @cached_property
    def _dsym(self):
        """Symbol of Delta (d_1 + Delta), the coefficient of the fluctuation."""
        d1, kt2 = self._symbols3
        return (-kt2) * (d1 - kt2)

    def q3(self, values: np.ndarray, t: float) -> np.ndarray:
        if t <= 0:
            raise ConfigError("Q_t requires t > 0")
        if values.shape != self._require_grid3().shape:
            raise ConfigError("field shape does not match the provider's space-time grid")
        if self.coef.is_constant:
            return np.fft.ifftn(np.fft.fftn(values) * np.exp(t * (self._sigma_bar - self.c))).real
        return self._etd3(values, t)

    def _etd3(self, values, t):
        # same exponential sandwich as the static path
        m, delta = self.policy.substeps(t)
        lam = self._sigma_bar - self.c
        Eh = np.exp(0.5 * delta * lam)
        da = (self.coef.a.values - self.coef.abar)[None, :, :]
        v = values
        for _ in range(m):
            vh = np.fft.fftn(v) * Eh
            r = -da * np.fft.ifftn(self._dsym * vh).real
            v_new = np.fft.ifftn((vh + delta * np.fft.fftn(r)) * Eh).real
            self._guard(v, v_new)
            v = v_new
        return v

    def _deep_level(self) -> int:
        """Dyadic depth needed to resolve the fastest mode on the grid."""
        sp_max = float(self._kt2.max())
        tau_max = (float(np.abs(self.grid3.angular_tau()).max())
                   if self.grid3 is not None else 0.0)
        rate = self.coef.c2 * sp_max ** 2 + tau_max ** 2 + self.c
        return int(np.ceil(np.log2(max(rate, 2.0) / 0.05)))

    def k3(self, values: np.ndarray, J: int = 12) -> np.ndarray:
        """K f = -int_0^1 (d_1+Delta) Q_t f dt by dyadic Gauss quadrature.

        ``J`` sets the user-facing dyadic grid; the partition is refined
        toward t=0 automatically until the grid's fastest decay scale is
        resolved, so refining J beyond its default only reshuffles nodes.
        """
        if J < 8:
            raise ConfigError("k_apply requires at least J = 8 dyadic levels")
        self._require_grid3()
        nodes, weights = _dyadic_gauss_nodes(max(J, self._deep_level()))
        d1, kt2 = self._symbols3
        dplus = d1 - kt2
        if self.coef.is_constant:
            vh = np.fft.fftn(values)
            acc = np.zeros_like(vh)
            sig = self._sigma_bar - self.c
            for t, w in zip(nodes, weights):
                acc += w * np.exp(t * sig) * vh
            return np.fft.ifftn(-dplus * acc).real
        # variable coefficient: advance once through the sorted nodes
        order = np.argsort(nodes)
        acc = np.zeros_like(values)
        v = values
        t_prev = 0.0
        for idx in order:
            t = nodes[idx]
            gap = t - t_prev
            if gap > 1e-15:
                v = self._etd3(v, gap)
            acc = acc + weights[idx] * v
            t_prev = t
        return -np.fft.ifftn(dplus * np.fft.fftn(acc)).real

    def apply(self, f, t: float):
        """Q_t on a Field2 (static) or Field3 (space-time)."""
        if isinstance(f, Field2):
            return Field2(f.grid, self.q2(f.values, t))
        if isinstance(f, Field3):
            return Field3(f.grid, self.q3(f.values, t))
        raise ConfigError("pam providers act on Field2 or Field3")


def _dyadic_gauss_nodes(J: int):
    """Gauss-Legendre nodes on the dyadic partition of (0, 1].

    Eight points per interval [2^-, 2^-(j+1)] for j < J, plus a midpoint cell
    for the remaining (0, 2^-J] (the integrand is bounded there for the
    regularities this package works at).
    """
    gx, gw = np.polynomial.legendre.leggauss(8)
    nodes, weights = [], []
    for j in range(J):
        hi, lo = 2.0 ** (-j), 2.0 ** (-j - 1)
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        nodes.extend(mid + half * gx)
        weights.extend(half * gw)
    nodes.append(2.0 ** (-J - 1))
    weights.append(2.0 ** (-J))
    return np.array(nodes), np.array(weights)


class HeatProvider:
    """e^{t(Delta - c)} on the circle or the torus (cheap test modes)."""

    def __init__(self, grid: Grid1 | Grid2, c: float = DEFAULT_C):
        self.grid = grid
        self.c = c
        if isinstance(grid, Grid1):
            self.mode = "heat_1d"
            self.scaling = Scaling.heat_1d()
            kt = grid.angular_freq()
            self._sym = kt ** 2
        else:
            self.mode = "heat_2d"
            self.scaling = Scaling((1.0, 1.0), 2.0)
            self._sym = grid.angular_sq()

    def one(self, t: float) -> float:
        return float(np.exp(-self.c * t))

    def q(self, values: np.ndarray, t: float) -> np.ndarray:
        if t <= 0:
            raise ConfigError("Q_t requires t > 0")
        return np.fft.ifftn(np.fft.fftn(values) * np.exp(-t * (self._sym + self.c))).real

    def apply(self, f, t: float):
        if isinstance(f, Field1) and self.mode == "heat_1d":
            return Field1(f.grid, self.q(f.values, t))
        if isinstance(f, Field2) and self.mode == "heat_2d":
            return Field2(f.grid, self.q(f.values, t))
        raise ConfigError(f"{self.mode} provider got an incompatible field")


def semigroup_provider(mode: str, grid, coef: Coefficient | None = None,
                       c: float = DEFAULT_C, policy: StepPolicy = StepPolicy()):
    """Factory over the four provider modes."""
    if mode in ("pam_constant_a", "pam_variable_a"):
        if coef is None:
            raise ConfigError("pam modes need a Coefficient")
        grid3 = grid if isinstance(grid, Grid3) else None
        prov = PamProvider(coef, grid3, policy)
        if prov.mode != mode:
            raise ConfigError(f"coefficient is {prov.mode}, not {mode}")
        return prov
    if mode == "heat_1d":
        return HeatProvider(grid if isinstance(grid, Grid1) else Grid1(grid), c)
    if mode == "heat_2d":
        return HeatProvider(grid, c)
    raise ConfigError(f"unknown provider mode {mode!r}")


# ---------------------------------------------------------------------------
# public op wrappers


def q_apply(f, t: float, provider) -> Field2 | Field3:
    return provider.apply(f, t)


def k_apply(f: Field3, provider: PamProvider, J: int = 12) -> Field3:
    return Field3(f.grid, provider.k3(f.values, J))


def k_apply_static(f: Field2, provider: PamProvider) -> Field2:
    return Field2(f.grid, provider.k2(f.values))


# ---------------------------------------------------------------------------
# verifiers


def resample_coefficient(coef: Coefficient, grid: Grid2) -> Coefficient:
    """Spectral resampling of the diffusion coefficient onto another grid."""
    if coef.a.grid == grid:
        return coef
    src = coef.a.grid
    spec = np.fft.fft2(coef.a.values) / src.npoints
    out = np.zeros(grid.shape, dtype=complex)
    k2max = min(src.n2, grid.n2) // 2
    k3max = min(src.n3, grid.n3) // 2
    for k2 in range(-k2max + 1, k2max):
        for k3 in range(-k3max + 1, k3max):
            out[k2 % grid.n2, k3 % grid.n3] = spec[k2 % src.n2, k3 % src.n3]
    vals = np.fft.ifft2(out).real * grid.npoints
    return Coefficient(Field2(grid, vals), coef.c)


def _delta_column(grid3: Grid3):
    vals = np.zeros(grid3.shape)
    center = (grid3.n1 // 2, grid3.spatial.n2 // 2, grid3.spatial.n3 // 2)
    vals[center] = 1.0 / grid3.cell_volume
    return vals, center


def _periodized_envelope(grid3: Grid3, center, t: float, sc: Scaling, C: float):
    """G_t around the column center, with spatial wrap images summed."""
    env = GaussEnvelope(sc, C)
    x1 = grid3.time_coords() - grid3.time_coords()[center[0]]
    x2 = np.arange(grid3.spatial.n2) / grid3.spatial.n2 - center[1] / grid3.spatial.n2
    x3 = np.arange(grid3.spatial.n3) / grid3.spatial.n3 - center[2] / grid3.spatial.n3
    st = t ** (sc.s[0] / sc.ell)
    ss = t ** (sc.s[1] / sc.ell)
    f1 = env.axis_factor(0, x1 / st)
    f2 = sum(env.axis_factor(1, (x2 + m) / ss) for m in (-1.0, 0.0, 1.0))
    f3 = sum(env.axis_factor(2, (x3 + m) / ss) for m in (-1.0, 0.0, 1.0))
    prof = f1[:, None, None] * (f2[:, None] * f3[None, :])[None, :, :]
    return t ** (-sc.total / sc.ell) * prof


def verify_gtype(provider: PamProvider, t_sweep=None, grid3: Grid3 | None = None,
                 C: float = 0.2, slope_band: float = 0.1, core_floor: float = 1e-8):
    """Empirical envelope constants for Q_t and its t-derivative.

    Kernel columns are rebuilt from lattice deltas; the report carries the
    smallest constants C1(t), C2(t) against the (periodized) dilated envelope
    and passes when their log-log trends are flat within ``slope_band``.
    The envelope constants themselves are reported, never asserted (the
    existence result fixes no value).  The default envelope constant sits
    below the kernel's true decay constants (1/4 in time, ~0.47 in space) so
    the ratio is dominated by the resolved core; the default window keeps
    the kernel width above four cells on each axis.
    """
    if t_sweep is None:
        t_sweep = [2.0 ** (-j) for j in range(12, 16)]
    if grid3 is None:
        grid3 = Grid3(2048, 2.0, Grid2.square(64))
    work = PamProvider(resample_coefficient(provider.coef, grid3.spatial), grid3,
                       provider.policy)
    delta, center = _delta_column(grid3)
    sc = work.scaling
    c1s, c2s, cons = [], [], []
    ones = np.ones(grid3.shape)
    for t in sorted(t_sweep, reverse=True):
        col = work.q3(delta, t)
        envlp = _periodized_envelope(grid3, center, t, sc, C)
        core = envlp >= core_floor * envlp.max()
        c1s.append(float(np.max(np.abs(col[core]) / envlp[core])))
        cons.append(float(np.abs(work.q3(ones, t) - work.one(t)).max()))
        h = t / 8.0
        dcol = (work.q3(delta, t + h) - work.q3(delta, t - h)) / (2 * h)
        c2s.append(float(np.max(np.abs(dcol[core]) / (envlp[core] / t))))
    ts = sorted(t_sweep, reverse=True)
    s1, rms1, _ = fit_loglog(ts, c1s)
    s2, rms2, _ = fit_loglog(ts, c2s)
    checks = [
        {"name": "gauss_envelope_flat", "statistic": s1, "pass": abs(s1) <= slope_band},
        {"name": "time_derivative_envelope_flat", "statistic": s2, "pass": abs(s2) <= slope_band},
        {"name": "conservativity_exp(-ct)", "statistic": float(max(cons)),
         "pass": max(cons) < 1e-10},
    ]
    return {
        "mode": work.mode,
        "contrast": work.coef.c2 - work.coef.c1,
        "t_sweep": ts,
        "C1": c1s,
        "C2": c2s,
        "checks": checks,
        "passed": all(ch["pass"] for ch in checks),
    }


def _time_gauss(t: float, npts: int = 4097, span: float = 12.0):
    """Continuum time factor of Q_t for a = const: a Gaussian of variance 2t,
    and its derivative, on an adaptive grid."""
    sigma = np.sqrt(2.0 * t)
    x = np.linspace(-span * sigma, span * sigma, npts)
    g = np.exp(-x ** 2 / (4.0 * t)) / np.sqrt(4.0 * np.pi * t)
    gp = -x / (2.0 * t) * g
    return x, g, gp


def verify_regularizing(provider: PamProvider, k_multiindex=(0, 0, 0),
                        t_sweep=None, spatial_n: int = 256,
                        tol: float = 0.05):
    """Fit the t-exponent of the L^1 column norms of d^k K_t and compare with
    (2 - |k|_s)/4 - 1.  Requires unit constant diffusion, where the symbol
    tensorizes into (time Gaussian) x (2D spatial kernel) exactly.

    Also checks the convolution identity K_{t-s} Q_s = K_t through the
    operator algebra on a random space-time field.
    """
    if not provider.coef.is_constant or abs(provider.coef.abar - 1.0) > 1e-12:
        raise ConfigError("regularizing verifier runs at constant a = 1")
    if t_sweep is None:
        t_sweep = [2.0 ** (-j) for j in range(16, 27, 2)]
    k1, k2, k3 = k_multiindex
    if k1 != 0:
        raise ConfigError("only spatial derivative multiindices are measured")
    sc = provider.scaling
    ksum = k2 * sc.s[1] + k3 * sc.s[2]
    grid = Grid2.square(spatial_n)
    kt2 = grid.angular_sq()
    K2, K3 = grid.wavenumbers()
    dk = (2j * np.pi * K2) ** k2 * (2j * np.pi * K3) ** k3
    c = provider.c
    norms = []
    for t in sorted(t_sweep, reverse=True):
        # spatial factors: h_t and Delta h_t with the derivative applied
        base = np.exp(-t * kt2 ** 2)
        h = np.fft.ifft2(dk * base).real * grid.npoints
        lap_h = np.fft.ifft2(dk * (-kt2) * base).real * grid.npoints
        x, g, gp = _time_gauss(t)
        # |K_t| = |g' h + g Delta h| integrated over the tensor grid
        dx1 = x[1] - x[0]
        total = 0.0
        chunk = 64
        hf, lf = h.ravel(), lap_h.ravel()
        for lo in range(0, hf.size, chunk * grid.n3):
            hi = min(lo + chunk * grid.n3, hf.size)
            block = np.abs(np.outer(gp, hf[lo:hi]) + np.outer(g, lf[lo:hi]))
            total += float(block.sum())
        norms.append(total * dx1 * grid.cell_volume * np.exp(-c * t))
    ts = sorted(t_sweep, reverse=True)
    slope, rms, window = fit_loglog(ts, norms)
    target = (2.0 - ksum) / sc.ell - 1.0

    # convolution identity K_{t-s} Q_s = K_t through operator application,
    # probed at times where low modes are still alive under the angular
    # frequency convention (a mode k decays at rate (2 pi k)^4)
    g3 = Grid3(64, 2.0, Grid2.square(16))
    small = PamProvider(Coefficient.constant(g3.spatial, 1.0, c), g3, provider.policy)
    rng = np.random.default_rng(7)
    spec = np.zeros(g3.shape, dtype=complex)
    spec[:3, :3, :3] = rng.standard_normal((3, 3, 3)) + 1j * rng.standard_normal((3, 3, 3))
    f3 = np.fft.ifftn(spec).real
    f3 /= np.abs(f3).max()
    d1s, kks = small._symbols3

    def k_single(v, tt):
        # the single-scale kernel K_t = -(d_1 + Delta) Q_t as an operator
        return np.fft.ifftn(-(d1s - kks) * np.fft.fftn(small.q3(v, tt))).real

    t0, s0 = 2.0 ** -16, 2.0 ** -17
    rhs = k_single(f3, t0)
    comp_err = float(np.abs(k_single(small.q3(f3, s0), t0 - s0) - rhs).max()
                     / np.abs(rhs).max())

    return {
        "k_multiindex": list(k_multiindex),
        "t_sweep": ts,
        "norms": norms,
        "exponent": slope,
        "target": target,
        "fit_rms": rms,
        "window": window,
        "composition_rel_err": comp_err,
        "passed": abs(slope - target) <= tol and comp_err < 1e-8,
    }
