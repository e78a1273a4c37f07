"""Madelung fields and de Broglie-Bohm trajectories.

Velocities always come from the current ``Im(psi* grad psi) / rho`` rather
than from an unwrapped phase, so nodes never need special handling beyond
the low-density mask.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.fft as sfft

from . import rng as _rng
from .errors import LowDensityError
from .fields import ComplexField, Grid, PhysicalParams, SpinorField

__all__ = [
    "DENSITY_CUTOFF",
    "MadelungView",
    "madelung_decompose",
    "scalar_velocity",
    "spinor_velocity",
    "spin_vector_field",
    "spin_angles",
    "spin_vector",
    "VelocitySnapshot",
    "velocity_snapshot",
    "envelope_snapshot",
    "Trajectory",
    "Ensemble",
    "EnsembleIntegrator",
    "integrate_ensemble",
    "integrate_trajectory",
    "sample_initial_positions",
]

DENSITY_CUTOFF = 1e-12


def _spectral_derivative(values: np.ndarray, grid: Grid, axis: int, order=1) -> np.ndarray:
    ax = values.ndim - grid.dims + axis
    k = grid.wavenumbers(axis)
    shape = [1] * values.ndim
    shape[ax] = k.size
    factor = ((1j * k) ** order).reshape(shape)
    return sfft.ifft(factor * sfft.fft(values, axis=ax), axis=ax)


def _valid_mask(rho: np.ndarray) -> np.ndarray:
    return rho >= DENSITY_CUTOFF * rho.max()


@dataclass(frozen=True)
class MadelungView:
    """Density, velocity field, quantum potential and validity mask.

    ``velocity`` has shape ``(dims, *grid.shape)``; ``velocity`` and
    ``quantum_potential`` are NaN wherever ``valid`` is false.
    """

    grid: Grid
    density: np.ndarray
    velocity: np.ndarray
    quantum_potential: np.ndarray
    valid: np.ndarray
    time: float = 0.0


def madelung_decompose(state: ComplexField | SpinorField, params: PhysicalParams, with_q=True) -> MadelungView:
    """Madelung decomposition of a scalar field or spinor.

    ``Q = -(hbar^2/2m) Lap(sqrt rho)/sqrt rho`` is evaluated through the
    identity ``Lap(sqrt rho)/sqrt rho = Re(Lap psi / psi) + |grad S|^2 / hbar^2``
    for scalar fields, and directly from ``sqrt rho`` for spinors.
    """
    grid = state.grid
    comps = state.values[None] if isinstance(state, ComplexField) else state.values
    rho = np.sum(np.abs(comps) ** 2, axis=0)
    valid = _valid_mask(rho)
    safe = np.where(valid, rho, 1.0)
    hbar = params.hbar
    vel = np.empty((grid.dims,) + grid.shape)
    q = np.zeros(grid.shape)
    amp = np.sqrt(rho) if with_q else None
    for i in range(grid.dims):
        m = params.mass_along(i)
        d1 = _spectral_derivative(comps, grid, i)
        cur = np.sum(np.imag(np.conj(comps) * d1), axis=0)
        vel[i] = hbar / m * cur / safe
        if not with_q:
            continue
        if isinstance(state, ComplexField):
            d2 = _spectral_derivative(comps[0], grid, i, order=2)
            psi = np.where(valid, comps[0], 1.0)
            lap = np.real(d2 / psi) + (m * vel[i] / hbar) ** 2
        else:
            lap = np.real(_spectral_derivative(amp, grid, i, order=2)) / np.where(valid, amp, 1.0)
        q -= hbar * hbar / (2 * m) * lap
    vel[:, ~valid] = np.nan
    q[~valid] = np.nan
    if not with_q:
        q[:] = np.nan
    return MadelungView(grid, rho, vel, q, valid, state.time)


def spin_vector_field(spinor: SpinorField, particle: int | None = None) -> np.ndarray:
    """Unit Bloch vector ``Psi^dag sigma Psi / rho``, shape ``(3, *grid.shape)``.

    Multiply by ``hbar/2`` for the spin vector itself.  For a pair
    (4 components) give ``particle`` to get that particle's local reduced
    Bloch vector (its length is below one when the pair is entangled).
    """
    v = spinor.values
    if spinor.ncomp == 2:
        pairs = [(0, 1)]
    else:
        if particle is None:
            raise ValueError("a two-particle spinor needs the particle index")
        pairs = [(0, 2), (1, 3)] if particle == 0 else [(0, 1), (2, 3)]
    rho = np.sum(np.abs(v) ** 2, axis=0)
    safe = np.where(_valid_mask(rho), rho, np.inf)
    cross = sum(np.conj(v[u]) * v[d] for u, d in pairs)
    sz = sum(np.abs(v[u]) ** 2 - np.abs(v[d]) ** 2 for u, d in pairs)
    return np.stack([2 * cross.real / safe, 2 * cross.imag / safe, sz / safe])


def spin_angles(s: np.ndarray):
    """Polar angles of ``s = (sin t sin p, sin t cos p, cos t)`` (leading axis 3).

    ``theta`` comes from the z component; ``phi`` is put to 0 at the poles
    and lies in ``(-pi, pi]``.
    """
    s = np.asarray(s, dtype=float)
    norm = np.sqrt(np.sum(s * s, axis=0))
    with np.errstate(invalid="ignore", divide="ignore"):
        cz = np.clip(s[2] / norm, -1.0, 1.0)
    theta = np.arccos(cz)
    phi = np.arctan2(s[0], s[1])
    phi = np.where(np.hypot(s[0], s[1]) <= 1e-12 * norm, 0.0, phi)
    phi = np.where(phi <= -math.pi, math.pi, phi)
    return theta, phi


# --- point queries ----------------------------------------------------------


def _interp(arrays: np.ndarray, valid: np.ndarray, grid: Grid, pts: np.ndarray):
    """Multilinear interpolation of ``arrays`` (c, *shape) at ``pts`` (n, dims).

    Returns ``(values (c, n), ok (n,))``; ``ok`` is false where any stencil
    node is masked or the point lies outside the grid.
    """
    dims = grid.dims
    n = pts.shape[0]
    idx = []
    wts = []
    ok = np.ones(n, dtype=bool)
    for i in range(dims):
        u = (pts[:, i] - grid.origin[i]) / grid.spacing[i]
        ok &= np.isfinite(u) & (u >= 0) & (u <= grid.n[i] - 1)
        u = np.where(ok, u, 0.0)
        j = np.minimum(np.floor(u).astype(np.int64), grid.n[i] - 2)
        idx.append(j)
        wts.append(u - j)
    flat_arrays = arrays.reshape(arrays.shape[0], -1)
    flat_valid = valid.reshape(-1)
    strides = np.cumprod((1,) + grid.n[::-1])[:-1][::-1]
    out = np.zeros((arrays.shape[0], n))
    for corner in range(1 << dims):
        w = np.ones(n)
        lin = np.zeros(n, dtype=np.int64)
        for i in range(dims):
            bit = (corner >> i) & 1
            w = w * (wts[i] if bit else 1.0 - wts[i])
            lin = lin + (idx[i] + bit) * strides[i]
        ok &= flat_valid[lin] | (w == 0.0)
        vals = flat_arrays[:, lin]
        out += np.where(w > 0, w * np.nan_to_num(vals), 0.0)
    return out, ok


def _point(at, dims):
    return np.atleast_1d(np.asarray(at, dtype=float)).reshape(1, dims)


def _velocity_at(state, at, params):
    view = madelung_decompose(state, params)
    vals, ok = _interp(np.nan_to_num(view.velocity), view.valid, view.grid, _point(at, view.grid.dims))
    if not ok[0]:
        raise LowDensityError(f"density below cutoff (or outside grid) at {at}")
    v = vals[:, 0]
    return float(v[0]) if view.grid.dims == 1 else v


def scalar_velocity(field: ComplexField, at, params: PhysicalParams):
    """Bohm velocity of a scalar field at one point (linear/bilinear interpolation)."""
    if not isinstance(field, ComplexField):
        raise TypeError("scalar_velocity expects a ComplexField")
    return _velocity_at(field, at, params)


def spinor_velocity(spinor: SpinorField, at, params: PhysicalParams):
    """Bohm velocity ``(hbar/m) Im(Psi^dag grad Psi) / rho`` at one point."""
    if not isinstance(spinor, SpinorField):
        raise TypeError("spinor_velocity expects a SpinorField")
    return _velocity_at(spinor, at, params)


def spin_vector(spinor: SpinorField, at):
    """``(theta, phi)`` of the local spin vector at one point."""
    s = spin_vector_field(spinor)
    rho = spinor.density()
    vals, ok = _interp(np.nan_to_num(s), _valid_mask(rho), spinor.grid, _point(at, spinor.grid.dims))
    if not ok[0]:
        raise LowDensityError(f"density below cutoff (or outside grid) at {at}")
    th, ph = spin_angles(vals[:, 0])
    return float(th), float(ph)


# --- snapshots and trajectories ---------------------------------------------


@dataclass(frozen=True)
class VelocitySnapshot:
    """Velocity (and optionally unit spin vector) on a grid at one time."""

    time: float
    grid: Grid
    velocity: np.ndarray
    valid: np.ndarray
    spin: np.ndarray | None = None

    def arrays(self):
        v = np.nan_to_num(self.velocity)
        if self.spin is None:
            return v
        return np.concatenate([v, np.nan_to_num(self.spin)])


def velocity_snapshot(state, params: PhysicalParams, spin=False) -> VelocitySnapshot:
    view = madelung_decompose(state, params, with_q=False)
    s = spin_vector_field(state) if spin else None
    return VelocitySnapshot(state.time, state.grid, view.velocity, view.valid, s)


def envelope_snapshot(components: Sequence, mass: float, hbar: float, spin=False) -> VelocitySnapshot:
    """Snapshot from carrier-envelope components sharing one coarse grid.

    Each component is ``exp(i (k_c z + phase)) a(z)``; the current picks up
    ``k_c |a|^2`` from the carrier and ``Im(a* a')`` from the envelope.
    """
    grid = components[0].grid
    if any(c.grid != grid for c in components):
        raise ValueError("envelope components must share a grid")
    t = components[0].time
    a = np.stack([c.values for c in components])
    dens = np.abs(a) ** 2
    rho = dens.sum(axis=0)
    valid = _valid_mask(rho)
    safe = np.where(valid, rho, 1.0)
    da = _spectral_derivative(a, grid, 0)
    cur = sum(c.carrier * dens[i] + np.imag(np.conj(a[i]) * da[i]) for i, c in enumerate(components))
    vel = (hbar / mass * cur / safe)[None]
    vel[:, ~valid] = np.nan
    s = None
    if spin:
        if len(components) != 2:
            raise ValueError("spin needs two components")
        z = grid.axis(0)
        up, dn = components
        rel = np.exp(1j * (dn.carrier_phase(z) - up.carrier_phase(z)))
        cross = np.conj(a[0]) * a[1] * rel
        sv = np.where(valid, 1.0 / safe, np.nan)
        s = np.stack([2 * cross.real * sv, 2 * cross.imag * sv, (dens[0] - dens[1]) * sv])
    return VelocitySnapshot(t, grid, vel, valid, s)


@dataclass
class Trajectory:
    """One Bohmian path; ``theta``/``phi`` are present for spinor runs."""

    label: int
    times: np.ndarray
    positions: np.ndarray
    theta: np.ndarray | None = None
    phi: np.ndarray | None = None
    aborted: bool = False
    abort_time: float | None = None


@dataclass
class Ensemble:
    """Bulk trajectory record: ``positions`` is ``(n_times, n, dims)``."""

    times: np.ndarray
    positions: np.ndarray
    theta: np.ndarray | None
    phi: np.ndarray | None
    aborted: np.ndarray
    abort_time: np.ndarray
    max_cells_per_snapshot: float = 0.0

    @property
    def size(self):
        return self.positions.shape[1]

    @property
    def final(self):
        return self.positions[-1]

    def trajectory(self, i: int) -> Trajectory:
        keep = slice(None)
        if self.aborted[i]:
            keep = self.times <= self.abort_time[i]
        th = None if self.theta is None else self.theta[keep, i]
        ph = None if self.phi is None else self.phi[keep, i]
        return Trajectory(i, self.times[keep], self.positions[keep, i], th, ph,
                          bool(self.aborted[i]), float(self.abort_time[i]) if self.aborted[i] else None)


class EnsembleIntegrator:
    """RK4 integration of ``dX/dt = v(X, t)`` fed one snapshot at a time.

    The velocity between consecutive snapshots is interpolated linearly in
    time and multilinearly in space.  Positions (and spin angles when the
    snapshots carry spin) are recorded at every snapshot time.  A sample
    whose RK stencil touches the low-density mask or leaves the grid is
    frozen and flagged as aborted.
    """

    def __init__(self, x0, dt: float, record_positions=True):
        x0 = np.asarray(x0, dtype=float)
        if x0.ndim == 1:
            x0 = x0[:, None]
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.x = x0.copy()
        self.dt = dt
        self.record_positions = record_positions
        n = x0.shape[0]
        self.aborted = np.zeros(n, dtype=bool)
        self.abort_time = np.full(n, np.nan)
        self._prev: VelocitySnapshot | None = None
        self._times: list = []
        self._pos: list = []
        self._theta: list = []
        self._phi: list = []
        self._cells = 0.0

    def _sample(self, snap: VelocitySnapshot, x):
        return _interp(snap.arrays(), snap.valid, snap.grid, x)

    def _record(self, snap: VelocitySnapshot):
        self._times.append(snap.time)
        if self.record_positions:
            self._pos.append(self.x.copy())
        if snap.spin is not None:
            vals, ok = self._sample(snap, self.x)
            th, ph = spin_angles(vals[-3:])
            self._theta.append(np.where(ok | self.aborted, th, np.nan))
            self._phi.append(np.where(ok | self.aborted, ph, np.nan))

    def feed(self, snap: VelocitySnapshot):
        prev = self._prev
        if prev is None:
            _, ok = self._sample(snap, self.x)
            if not np.all(ok):
                bad = np.flatnonzero(~ok)
                raise LowDensityError(f"{bad.size} initial positions lie outside the valid density region")
            self._prev = snap
            self._record(snap)
            return
        t0, t1 = prev.time, snap.time
        if not t1 > t0:
            raise ValueError("snapshot times must increase strictly")
        nsub = max(1, int(math.ceil((t1 - t0) / self.dt - 1e-9)))
        h = (t1 - t0) / nsub
        live = ~self.aborted
        vmax = np.nanmax(np.abs(snap.velocity)) if np.any(snap.valid) else 0.0
        self._cells = max(self._cells, vmax * (t1 - t0) / min(snap.grid.spacing))
        va, vb = np.nan_to_num(prev.velocity), np.nan_to_num(snap.velocity)

        def vel(x, tau):
            w = (tau - t0) / (t1 - t0)
            a, oka = _interp(va, prev.valid, prev.grid, x)
            b, okb = _interp(vb, snap.valid, snap.grid, x)
            return ((1 - w) * a + w * b).T, oka & okb

        for k in range(nsub):
            idx = np.flatnonzero(live)
            if idx.size == 0:
                break
            x = self.x[idx]
            tau = t0 + k * h
            k1, ok1 = vel(x, tau)
            k2, ok2 = vel(x + 0.5 * h * k1, tau + 0.5 * h)
            k3, ok3 = vel(x + 0.5 * h * k2, tau + 0.5 * h)
            k4, ok4 = vel(x + h * k3, tau + h)
            ok = ok1 & ok2 & ok3 & ok4
            new = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            self.x[idx[ok]] = new[ok]
            dead = idx[~ok]
            if dead.size:
                live[dead] = False
                self.aborted[dead] = True
                self.abort_time[dead] = tau
        self._prev = snap
        self._record(snap)

    def result(self) -> Ensemble:
        pos = np.array(self._pos) if self.record_positions else self.x[None].copy()
        theta = np.array(self._theta) if self._theta else None
        phi = np.array(self._phi) if self._phi else None
        return Ensemble(np.array(self._times), pos, theta, phi, self.aborted.copy(),
                        self.abort_time.copy(), self._cells)


def integrate_ensemble(snapshots: Iterable[VelocitySnapshot], x0, dt: float) -> Ensemble:
    """Integrate many starting points through a snapshot history."""
    integ = EnsembleIntegrator(x0, dt)
    for s in snapshots:
        integ.feed(s)
    return integ.result()


def integrate_trajectory(snapshots: Iterable[VelocitySnapshot], x0, dt: float) -> Trajectory:
    """Integrate a single starting point; see :class:`EnsembleIntegrator`."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))[None]
    return integrate_ensemble(snapshots, x0, dt).trajectory(0)


def sample_initial_positions(state, n: int, seed=0, label="initial_positions") -> np.ndarray:
    """Draw ``n`` i.i.d. positions from the density of ``state``.

    1D: inverse CDF of the cell-wise constant density.  2D: rejection from
    the bounding box of the support.  ``seed`` may be an integer or a numpy
    Generator.  Returns shape ``(n,)`` in 1D and ``(n, 2)`` in 2D.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    gen = seed if isinstance(seed, np.random.Generator) else _rng.stream(seed, label)
    grid = state.grid
    rho = state.density()
    h = np.asarray(grid.spacing)
    if grid.dims == 1:
        cdf = np.cumsum(rho)
        cdf = cdf / cdf[-1]
        u = gen.random(n)
        i = np.minimum(np.searchsorted(cdf, u, side="right"), grid.n[0] - 1)
        lo = np.concatenate([[0.0], cdf[:-1]])
        frac = np.where(rho[i] > 0, (u - lo[i]) / (cdf[i] - lo[i] + 1e-300), 0.5)
        return grid.origin[0] + (i + np.clip(frac, 0, 1) - 0.5) * h[0]
    rmax = rho.max()
    support = np.argwhere(rho >= DENSITY_CUTOFF * rmax)
    lo = support.min(axis=0)
    hi = support.max(axis=0) + 1
    out = np.empty((0, grid.dims))
    while out.shape[0] < n:
        m = max(1024, 2 * (n - out.shape[0]))
        cells = lo + np.floor(gen.random((m, grid.dims)) * (hi - lo)).astype(int)
        acc = gen.random(m) * rmax < rho[tuple(cells.T)]
        jit = gen.random((m, grid.dims)) - 0.5
        pts = np.asarray(grid.origin) + (cells + jit) * h
        out = np.concatenate([out, pts[acc]])
    return out[:n]
