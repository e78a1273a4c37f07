"""Uniform grids, scalar and spinor fields, physical parameter sets.

Everything in here is a value object: arrays stored on a field are flagged
read-only so a snapshot can be shared between threads or kept in a history
without defensive copies.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import DomainError, NormalizationError, ResolutionError

__all__ = [
    "Grid",
    "ComplexField",
    "SpinorField",
    "PhysicalParams",
    "Scaling",
    "gaussian_packet",
    "polarized_spinor",
    "norm2",
    "expectation_position",
    "fourier_interpolate",
]

CODATA_HBAR = 1.054571817e-34
CODATA_MU_B = 9.2740100783e-24


def _tuple(value, dims, cast=float):
    if np.ndim(value) == 0:
        return tuple(cast(value) for _ in range(dims))
    out = tuple(cast(v) for v in value)
    if len(out) != dims:
        raise ValueError(f"expected {dims} entries, got {len(out)}")
    return out


def _frozen(arr, dtype):
    arr = np.asarray(arr, dtype=dtype)
    if arr.flags.writeable:
        arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Grid:
    """Uniform 1D or 2D cell-centred grid.

    Point ``i`` along an axis sits at ``origin + i * spacing``.  Axes are
    indexed ``ij`` (first axis varies slowest).
    """

    n: tuple[int, ...]
    spacing: tuple[float, ...]
    origin: tuple[float, ...]

    def __post_init__(self):
        n = tuple(int(v) for v in np.atleast_1d(self.n))
        dims = len(n)
        if dims not in (1, 2):
            raise ValueError("only 1D and 2D grids are supported")
        spacing = _tuple(self.spacing, dims)
        origin = _tuple(self.origin, dims)
        if any(v < 8 for v in n):
            raise ValueError("need at least 8 points per axis")
        if any(not np.isfinite(h) or h <= 0 for h in spacing):
            raise ValueError("spacing must be positive")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)

    @classmethod
    def centered(cls, n, spacing, center=0.0):
        """Grid with ``center`` on point ``n // 2`` of each axis.

        With an even ``n`` this is symmetric under reflection through the
        centre once periodicity is taken into account.
        """
        n = tuple(int(v) for v in np.atleast_1d(n))
        spacing = _tuple(spacing, len(n))
        center = _tuple(center, len(n))
        origin = tuple(c - (k // 2) * h for k, h, c in zip(n, spacing, center))
        return cls(n, spacing, origin)

    @classmethod
    def spanning(cls, n, lo, hi):
        """Grid of ``n`` points covering ``[lo, hi)`` per axis."""
        n = tuple(int(v) for v in np.atleast_1d(n))
        lo = _tuple(lo, len(n))
        hi = _tuple(hi, len(n))
        spacing = tuple((b - a) / k for a, b, k in zip(lo, hi, n))
        return cls(n, spacing, lo)

    @property
    def dims(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    @property
    def size(self) -> int:
        return int(np.prod(self.n))

    @property
    def extent(self) -> tuple[float, ...]:
        return tuple(k * h for k, h in zip(self.n, self.spacing))

    @property
    def lower(self) -> tuple[float, ...]:
        return self.origin

    @property
    def upper(self) -> tuple[float, ...]:
        """Coordinate of the last grid point on each axis."""
        return tuple(o + (k - 1) * h for o, k, h in zip(self.origin, self.n, self.spacing))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis(self, i: int = 0) -> np.ndarray:
        return self.origin[i] + self.spacing[i] * np.arange(self.n[i])

    @property
    def axes(self) -> list[np.ndarray]:
        return [self.axis(i) for i in range(self.dims)]

    def mesh(self) -> list[np.ndarray]:
        if self.dims == 1:
            return [self.axis(0)]
        return list(np.meshgrid(*self.axes, indexing="ij"))

    def wavenumbers(self, i: int = 0) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n[i], d=self.spacing[i])

    def kmax(self, i: int = 0) -> float:
        return np.pi / self.spacing[i]

    def contains(self, point, margin=0.0) -> bool:
        point = np.atleast_1d(np.asarray(point, dtype=float))
        return all(
            lo + margin <= p <= hi - margin
            for p, lo, hi in zip(point, self.lower, self.upper)
        )


@dataclass(frozen=True)
class ComplexField:
    """Complex amplitude sampled on a grid at a given time."""

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = _frozen(self.values, np.complex128)
        if values.shape != self.grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "time", float(self.time))

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def with_values(self, values, time=None) -> "ComplexField":
        return ComplexField(self.grid, values, self.time if time is None else time)

    def __mul__(self, scalar):
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class SpinorField:
    """Multi-component field; components share one grid.

    ``values`` has shape ``(ncomp, *grid.shape)``.  Two components describe
    one spin-1/2 particle (up, down); four describe a pair, ordered
    ``(++, +-, -+, --)`` with the first sign belonging to particle A.
    """

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = _frozen(self.values, np.complex128)
        if values.shape[1:] != self.grid.shape or values.shape[0] not in (2, 4):
            raise ValueError(f"spinor shape {values.shape} incompatible with grid {self.grid.shape}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "time", float(self.time))

    @classmethod
    def from_components(cls, components: Sequence[ComplexField], time=None):
        grids = {c.grid for c in components}
        if len(grids) != 1:
            raise ValueError("spinor components must share one grid")
        t = components[0].time if time is None else time
        return cls(components[0].grid, np.stack([c.values for c in components]), t)

    @property
    def ncomp(self) -> int:
        return self.values.shape[0]

    @property
    def components(self) -> tuple[ComplexField, ...]:
        return tuple(ComplexField(self.grid, v, self.time) for v in self.values)

    def component(self, i: int) -> ComplexField:
        return ComplexField(self.grid, self.values[i], self.time)

    def density(self) -> np.ndarray:
        return np.sum(np.abs(self.values) ** 2, axis=0)

    def with_values(self, values, time=None) -> "SpinorField":
        return SpinorField(self.grid, values, self.time if time is None else time)

    def __mul__(self, scalar):
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class PhysicalParams:
    """Mass, Planck constant and couplings, in whatever unit system the
    caller works in (SI, or scaled via :class:`Scaling`).

    ``axis_masses`` is used for configuration-space grids whose axes belong
    to different particles; when unset every axis carries ``mass``.
    """

    mass: float
    hbar: float = CODATA_HBAR
    g: tuple[float, ...] = (0.0,)
    mu_b: float = CODATA_MU_B
    charge: float = 0.0
    axis_masses: tuple[float, ...] | None = None

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        object.__setattr__(self, "g", tuple(float(v) for v in np.atleast_1d(self.g)))
        if self.axis_masses is not None:
            am = tuple(float(v) for v in self.axis_masses)
            if any(v <= 0 for v in am):
                raise ValueError("axis masses must be positive")
            object.__setattr__(self, "axis_masses", am)

    def mass_along(self, axis: int) -> float:
        if self.axis_masses is None:
            return self.mass
        return self.axis_masses[axis]

    def g_along(self, axis: int) -> float:
        if len(self.g) == 1:
            return self.g[0] if axis == 0 else 0.0
        return self.g[axis] if axis < len(self.g) else 0.0

    def replace(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class Scaling:
    """Reference length, time and mass for dimensionless runs.

    Magnetic fields stay in tesla; the magneton is rescaled instead.
    """

    length: float
    time: float
    mass: float

    @property
    def energy(self) -> float:
        return self.mass * self.length**2 / self.time**2

    @property
    def velocity(self) -> float:
        return self.length / self.time

    def params(self, p: PhysicalParams) -> PhysicalParams:
        am = None if p.axis_masses is None else tuple(m / self.mass for m in p.axis_masses)
        return PhysicalParams(
            mass=p.mass / self.mass,
            hbar=p.hbar / (self.energy * self.time),
            g=tuple(v * self.time**2 / self.length for v in p.g),
            mu_b=p.mu_b / self.energy,
            charge=p.charge,
            axis_masses=am,
        )

    def to_length(self, x):
        return np.asarray(x) / self.length

    def from_length(self, x):
        return np.asarray(x) * self.length

    def to_time(self, t):
        return np.asarray(t) / self.time

    def from_time(self, t):
        return np.asarray(t) * self.time

    def to_velocity(self, v):
        return np.asarray(v) / self.velocity

    def from_velocity(self, v):
        return np.asarray(v) * self.velocity


def gaussian_packet(grid: Grid, center, sigma0, velocity, params: PhysicalParams, time=0.0) -> ComplexField:
    """Normalized Gaussian with a linear phase ramp ``m v x / hbar``.

    Per axis the amplitude is ``(2 pi sigma0^2)^(-1/4) exp(-(x-c)^2 / 4 sigma0^2)``
    so the density peaks at ``(2 pi sigma0^2)^(-1/2)``.

    Raises
    ------
    ResolutionError
        spacing exceeds ``sigma0 / 4`` or a quarter de Broglie wavelength.
    DomainError
        the ``4 sigma0`` window leaves the grid.
    """
    dims = grid.dims
    center = _tuple(center, dims)
    sigma0 = _tuple(sigma0, dims)
    velocity = _tuple(velocity, dims)
    values = np.ones(grid.shape, dtype=np.complex128)
    for i, x in enumerate(grid.mesh()):
        h, s, c, v = grid.spacing[i], sigma0[i], center[i], velocity[i]
        m = params.mass_along(i)
        if s <= 0:
            raise ValueError("sigma0 must be positive")
        if h > s / 4:
            raise ResolutionError(f"axis {i}: spacing {h:g} > sigma0/4 = {s / 4:g}")
        if v != 0.0:
            lam = 2.0 * np.pi * params.hbar / (m * abs(v))
            if h > lam / 4:
                raise ResolutionError(f"axis {i}: spacing {h:g} > de Broglie wavelength/4 = {lam / 4:g}")
        if c - 4 * s < grid.lower[i] or c + 4 * s > grid.upper[i]:
            raise DomainError(f"axis {i}: packet [{c - 4 * s:g}, {c + 4 * s:g}] leaves the grid")
        values *= (2.0 * np.pi * s * s) ** -0.25 * np.exp(-((x - c) ** 2) / (4.0 * s * s) + 1j * m * v * x / params.hbar)
    return ComplexField(grid, values, time)


def polarized_spinor(f: ComplexField, theta0: float, phi0: float) -> SpinorField:
    """Attach the pure spin state ``(cos(t/2) e^{i p/2}, i sin(t/2) e^{-i p/2})``."""
    up = np.cos(theta0 / 2) * np.exp(0.5j * phi0)
    dn = 1j * np.sin(theta0 / 2) * np.exp(-0.5j * phi0)
    return SpinorField(f.grid, np.stack([up * f.values, dn * f.values]), f.time)


def norm2(f: ComplexField | SpinorField) -> float:
    """Riemann sum of ``|values|^2`` times the cell volume."""
    return float(np.sum(np.abs(f.values) ** 2) * f.grid.cell_volume)


def expectation_position(f: ComplexField | SpinorField, tol=1e-6):
    """Centre of mass ``sum x |psi|^2 dV``; a float in 1D, an array in 2D."""
    n = norm2(f)
    if abs(n - 1.0) > tol:
        raise NormalizationError(f"norm^2 = {n!r} deviates from 1 by more than {tol:g}")
    rho = f.density()
    dv = f.grid.cell_volume
    out = np.array([np.sum(x * rho) * dv for x in f.grid.mesh()])
    return float(out[0]) if f.grid.dims == 1 else out


def fourier_interpolate(f: ComplexField, x, chunk=1024) -> np.ndarray:
    """Evaluate the trigonometric interpolant of a 1D periodic field at ``x``.

    Exact (to roundoff) for band-limited fields; points are taken modulo the
    period.
    """
    if f.grid.dims != 1:
        raise ValueError("fourier_interpolate handles 1D fields")
    n = f.grid.n[0]
    coef = np.fft.fft(f.values) / n
    k = f.grid.wavenumbers(0)
    if n % 2 == 0:
        # split the Nyquist mode symmetrically so real data stay real
        coef = np.concatenate([coef, [0.5 * coef[n // 2]]])
        coef[n // 2] *= 0.5
        k = np.concatenate([k, [-k[n // 2]]])
    u = np.asarray(x, dtype=float).ravel() - f.grid.origin[0]
    out = np.empty(u.size, dtype=np.complex128)
    for lo in range(0, u.size, chunk):
        out[lo:lo + chunk] = np.exp(1j * np.outer(u[lo:lo + chunk], k)) @ coef
    return out.reshape(np.shape(x))
