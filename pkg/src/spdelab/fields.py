"""Lattice fields on the unit torus and on a periodic time window, their
spectral duals, weighted sup norms, and the FLD1 binary interchange format.

Array layout is row major with the time axis slowest, so per-slice spatial
transforms are contiguous.  All data is float64; summations rely on numpy's
pairwise reduction for bit reproducibility.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, FormatError
from .scaling import Scaling, WeightSpec, PAM

_FLD_MAGIC = "FLD1"
_NSE_MAGIC = "NSE1"


def _check_pow2(n: int, what: str, minimum: int = 8):
    if n < minimum or (n & (n - 1)) != 0:
        raise ConfigError(f"{what} must be a power of two >= {minimum}, got {n}")


@dataclass(frozen=True)
class Grid1:
    """Circle of unit circumference (cheap 1D test mode)."""

    n: int

    def __post_init__(self):
        _check_pow2(self.n, "grid points")

    @property
    def shape(self):
        return (self.n,)

    def coords(self):
        return np.arange(self.n) / self.n

    def angular_freq(self):
        return 2.0 * np.pi * np.fft.fftfreq(self.n) * self.n

    @property
    def cell_volume(self):
        return 1.0 / self.n


@dataclass(frozen=True)
class Grid2:
    """Spatial grid on the unit torus T^2."""

    n2: int
    n3: int

    def __post_init__(self):
        _check_pow2(self.n2, "n2")
        _check_pow2(self.n3, "n3")

    @classmethod
    def square(cls, n: int) -> "Grid2":
        return cls(n, n)

    @property
    def shape(self):
        return (self.n2, self.n3)

    @property
    def npoints(self):
        return self.n2 * self.n3

    def coords(self):
        x2 = np.arange(self.n2) / self.n2
        x3 = np.arange(self.n3) / self.n3
        return np.meshgrid(x2, x3, indexing="ij")

    def wavenumbers(self):
        k2 = np.fft.fftfreq(self.n2) * self.n2
        k3 = np.fft.fftfreq(self.n3) * self.n3
        return np.meshgrid(k2, k3, indexing="ij")

    def angular_sq(self):
        """|k tilde|^2 = (2 pi)^2 (k2^2 + k3^2) on the unit torus."""
        K2, K3 = self.wavenumbers()
        return (2.0 * np.pi) ** 2 * (K2 ** 2 + K3 ** 2)

    @property
    def cell_volume(self):
        return 1.0 / self.npoints


@dataclass(frozen=True)
class Grid3:
    """Periodic time window [-T1, T1) times the spatial torus."""

    n1: int
    t_extent: float
    spatial: Grid2

    def __post_init__(self):
        _check_pow2(self.n1, "n1")
        if self.t_extent < 2.0:
            raise ConfigError("time half-width T1 must be >= 2 for tail containment")

    @property
    def shape(self):
        return (self.n1,) + self.spatial.shape

    def time_coords(self):
        return -self.t_extent + np.arange(self.n1) * (2.0 * self.t_extent / self.n1)

    @property
    def time_step(self):
        return 2.0 * self.t_extent / self.n1

    def angular_tau(self):
        """Temporal angular frequencies 2 pi j / (2 T1)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n1) * self.n1 / (2.0 * self.t_extent)

    @property
    def cell_volume(self):
        return self.time_step * self.spatial.cell_volume


def _validate_values(values, shape):
    values = np.asarray(values, dtype=float)
    if values.shape != shape:
        raise ConfigError(f"value shape {values.shape} != grid shape {shape}")
    if not np.all(np.isfinite(values)):
        raise ConfigError("field values must be finite")
    return values


@dataclass(frozen=True)
class Field1:
    grid: Grid1
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _validate_values(self.values, self.grid.shape))


@dataclass(frozen=True)
class Field2:
    grid: Grid2
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _validate_values(self.values, self.grid.shape))


@dataclass(frozen=True)
class Field3:
    grid: Grid3
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _validate_values(self.values, self.grid.shape))


Field = Field1 | Field2 | Field3


@dataclass(frozen=True)
class SpectralField:
    grid: Grid1 | Grid2 | Grid3
    coeffs: np.ndarray = field(repr=False)


def forward_transform(f: Field) -> SpectralField:
    """Unitary-normalization DFT of a real lattice field."""
    return SpectralField(f.grid, np.fft.fftn(f.values, norm="ortho"))


def inverse_transform(sf: SpectralField) -> Field:
    values = np.fft.ifftn(sf.coeffs, norm="ortho").real
    cls = {1: Field1, 2: Field2, 3: Field3}[sf.coeffs.ndim]
    return cls(sf.grid, values)


def _weight_values(f: Field, w: WeightSpec, sc: Scaling):
    """Weight array broadcast against the field; spatial-only fields see the
    time-axis weights as 1 (there is no time coordinate to evaluate)."""
    if isinstance(f, Field3):
        x1 = f.grid.time_coords()
        return w.weight_time(x1, sc)[:, None, None]
    if isinstance(f, Field1):
        # the single circle coordinate plays the temporal role
        return w.weight_time(f.grid.coords(), sc)
    return np.ones((1, 1))


def sup_weighted_norm(f: Field, w: WeightSpec = WeightSpec.flat(),
                      sc: Scaling = PAM) -> float:
    """max over lattice points of |f(x)| w(x)."""
    return float(np.max(np.abs(f.values) * _weight_values(f, w, sc)))


# ---------------------------------------------------------------------------
# FLD1 / NSE1 interchange formats


def _grid_extents(grid) -> tuple[float, ...]:
    if isinstance(grid, Grid1):
        return (1.0,)
    if isinstance(grid, Grid2):
        return (1.0, 1.0)
    return (2.0 * grid.t_extent, 1.0, 1.0)


def _header(magic: str, dims, extents) -> bytes:
    parts = [magic, str(len(dims))] + [str(d) for d in dims] + [repr(float(e)) for e in extents]
    return (" ".join(parts) + "\n").encode("ascii")


def write_fld1(path, f: Field):
    data = _header(_FLD_MAGIC, f.values.shape, _grid_extents(f.grid))
    data += np.ascontiguousarray(f.values, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(data)


def write_fld1_raw(path, values: np.ndarray, extents):
    """Dump a bare array (e.g. a solver trajectory) with declared extents."""
    data = _header(_FLD_MAGIC, values.shape, extents)
    data += np.ascontiguousarray(values, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(data)


def _parse_header(line: bytes, magic: str):
    try:
        parts = line.decode("ascii").split()
    except UnicodeDecodeError as exc:
        raise FormatError("unreadable header") from exc
    if not parts or parts[0] != magic:
        raise FormatError(f"expected {magic} header, got {parts[:1]}")
    d = int(parts[1])
    dims = tuple(int(p) for p in parts[2:2 + d])
    extents = tuple(float(p) for p in parts[2 + d:2 + 2 * d])
    if len(extents) != d:
        raise FormatError("truncated header")
    return dims, extents


def read_fld1(path):
    """Read an FLD1 file; returns (values, extents)."""
    with open(path, "rb") as fh:
        line = fh.readline()
        dims, extents = _parse_header(line, _FLD_MAGIC)
        count = int(np.prod(dims))
        raw = fh.read(8 * count)
    if len(raw) != 8 * count:
        raise FormatError("payload shorter than header promises")
    return np.frombuffer(raw, dtype="<f8").reshape(dims).copy(), extents


def read_fld1_field(path):
    """Reconstruct a Field2/Field3 from an FLD1 file on standard grids."""
    values, extents = read_fld1(path)
    if values.ndim == 2:
        return Field2(Grid2(*values.shape), values)
    if values.ndim == 3:
        grid = Grid3(values.shape[0], extents[0] / 2.0, Grid2(*values.shape[1:]))
        return Field3(grid, values)
    raise FormatError(f"unsupported rank {values.ndim}")


def write_nse1(path, spectrum: np.ndarray):
    """Persist a complex Hermitian noise spectrum (interleaved re/im doubles)."""
    data = _header(_NSE_MAGIC, spectrum.shape, (1.0,) * spectrum.ndim)
    data += np.ascontiguousarray(spectrum, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(data)


def read_nse1(path) -> np.ndarray:
    with open(path, "rb") as fh:
        line = fh.readline()
        dims, _ = _parse_header(line, _NSE_MAGIC)
        count = int(np.prod(dims))
        raw = fh.read(16 * count)
    if len(raw) != 16 * count:
        raise FormatError("payload shorter than header promises")
    return np.frombuffer(raw, dtype="<c16").reshape(dims).copy()


def dealias_mask(grid: Grid2):
    """2/3-rule mask in spectral space for quadratic products."""
    K2, K3 = grid.wavenumbers()
    return (np.abs(K2) <= grid.n2 // 3) & (np.abs(K3) <= grid.n3 // 3)


def dealiased_product(f: np.ndarray, g: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Pseudospectral product of two 2D arrays with 2/3-rule dealiasing."""
    ft = np.fft.ifft2(np.fft.fft2(f) * mask).real
    gt = np.fft.ifft2(np.fft.fft2(g) * mask).real
    return np.fft.ifft2(np.fft.fft2(ft * gt) * mask).real
