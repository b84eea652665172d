"""Spatial white noise on T^2, the mollifier family rho_n, mollified noises
coupled across levels through one underlying sample, and their covariance.

A noise sample is its Hermitian spectrum xi_hat(k) = fft2(w)/N for an iid
standard normal array w, so that E[xi_hat(k) conj(xi_hat(k'))] = delta_{kk'}
and the lattice field xi = N * w has covariance N^2 * 1{x=y}: the lattice
realization of E[xi(f) xi(g)] = <f, g>_{L^2(T^2)}.

Mollification is a deterministic spectral filter applied to the same sample:
xi_n_hat(k) = rhohat(2^-n k) xi_hat(k), the exact Fourier-side form of
periodized convolution with rho_n(x) = 2^{2n} rho(2^n x).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ResolutionError
from .fields import Field2, Grid2


def derive_seed(seed: int, index: int) -> int:
    """Per-sample seed for Monte Carlo batches: seed xor index."""
    return int(seed) ^ int(index)


class MollifierProfile:
    """Even unit-mass profile rho on R^2, known through its continuous Fourier
    transform rhohat (convention rhohat(xi) = int rho(x) e^{-2 pi i xi.x} dx,
    so rhohat(0) = 1)."""

    name: str

    def rhohat(self, r):
        raise NotImplementedError

    def l2_norm_sq(self) -> float:
        """int rho^2, used by the covariance-peak oracle."""
        raise NotImplementedError


class GaussProfile(MollifierProfile):
    def __init__(self, sigma: float = 0.5):
        self.sigma = sigma
        self.name = f"gauss{sigma:g}"

    def rhohat(self, r):
        return np.exp(-2.0 * np.pi ** 2 * self.sigma ** 2 * np.asarray(r, dtype=float) ** 2)

    def l2_norm_sq(self) -> float:
        return 1.0 / (4.0 * np.pi * self.sigma ** 2)


@lru_cache(maxsize=1)
def _bump_table(smax: float = 384.0):
    """Tabulated Fourier transform of the normalized bump
    rho(x) = c exp(-1/(1-|x|^2)) on |x| < 1, via the 1D reduction
    psi(u) = int rho(sqrt(u^2+v^2)) dv followed by a cosine transform."""
    nu = 8193
    u = np.linspace(-1.0, 1.0, nu)
    v = np.linspace(-1.0, 1.0, nu)
    psi = np.zeros(nu)
    psi2 = np.zeros(nu)
    for lo in range(0, nu, 512):
        hi = min(lo + 512, nu)
        r2 = u[lo:hi, None] ** 2 + v[None, :] ** 2
        inner = np.where(r2 < 1.0, np.exp(-1.0 / np.maximum(1.0 - r2, 1e-300)), 0.0)
        psi[lo:hi] = np.trapezoid(inner, v, axis=1)
        psi2[lo:hi] = np.trapezoid(inner * inner, v, axis=1)
    mass = np.trapezoid(psi, u)
    psi /= mass
    l2 = float(np.trapezoid(psi2, u)) / mass ** 2
    s = np.linspace(0.0, smax, 24577)
    du = u[1] - u[0]
    vals = np.empty_like(s)
    chunk = 2048
    for lo in range(0, len(s), chunk):
        hi = min(lo + chunk, len(s))
        vals[lo:hi] = (np.cos(2.0 * np.pi * np.outer(s[lo:hi], u)) @ psi) * du
    return s, vals, float(l2)


class BumpProfile(MollifierProfile):
    """Normalized exp(-1/(1-|x|^2)) bump supported in the unit disc."""

    name = "bump"

    def rhohat(self, r):
        s, vals, _ = _bump_table()
        return np.interp(np.abs(np.asarray(r, dtype=float)), s, vals, right=0.0)

    def l2_norm_sq(self) -> float:
        return _bump_table()[2]


_PROFILES = {"bump": BumpProfile, "gauss": GaussProfile}


def get_profile(name: str) -> MollifierProfile:
    if name not in _PROFILES:
        raise ValueError(f"unknown mollifier profile {name!r}; choose from {sorted(_PROFILES)}")
    return _PROFILES[name]()


@dataclass(frozen=True)
class Mollifier:
    profile: MollifierProfile
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("mollifier level must be nonnegative")

    @classmethod
    def default(cls, n: int) -> "Mollifier":
        return cls(BumpProfile(), n)

    def filter_array(self, grid: Grid2) -> np.ndarray:
        """rhohat(2^-n k) sampled on the grid's integer frequencies."""
        K2, K3 = grid.wavenumbers()
        r = np.sqrt(K2 ** 2 + K3 ** 2)
        return self.profile.rhohat(r / 2.0 ** self.n)


@dataclass(frozen=True)
class NoiseSample:
    grid: Grid2
    seed: int
    spectrum: np.ndarray

    def field(self) -> Field2:
        """The raw (unmollified) lattice white noise."""
        vals = np.fft.ifft2(self.spectrum).real * self.grid.npoints
        return Field2(self.grid, vals)


def sample_white_noise(grid: Grid2, seed: int) -> NoiseSample:
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(grid.shape)
    spectrum = np.fft.fft2(w) / np.sqrt(grid.npoints)
    return NoiseSample(grid, int(seed), spectrum)


def _check_level(m: Mollifier, grid: Grid2):
    # resolvable means the mollification scale 2^-n is not below the spacing
    if 2 ** m.n > max(grid.n2, grid.n3):
        raise ResolutionError(
            f"mollifier level {m.n} too fine for a {grid.n2}x{grid.n3} grid")


def mollify(noise: NoiseSample, m: Mollifier) -> Field2:
    """xi_n as a lattice field: spectral multiplication by rhohat(2^-n k)."""
    _check_level(m, noise.grid)
    filt = m.filter_array(noise.grid)
    vals = np.fft.ifft2(noise.spectrum * filt).real * noise.grid.npoints
    return Field2(noise.grid, vals)


def covariance_function(m: Mollifier, grid: Grid2) -> Field2:
    """c_n(z) = E[xi_n(x) xi_n(x+z)], the field with spectrum |rhohat(2^-n k)|^2."""
    _check_level(m, grid)
    filt = m.filter_array(grid)
    vals = np.fft.ifft2(filt.astype(complex) ** 2).real * grid.npoints
    return Field2(grid, vals)
