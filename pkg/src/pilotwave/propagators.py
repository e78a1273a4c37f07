"""Split-operator time evolution for scalar and Pauli-spinor fields.

The kinetic factor is applied in Fourier space (periodic boundaries), the
potential factor pointwise; one step is the symmetric Strang product
``exp(-iV dt/2h) exp(-iT dt/h) exp(-iV dt/2h)``.  Magnetic coupling
``mu_B B.sigma`` is folded into the potential half-steps through the exact
closed-form SU(2) exponential in every cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.fft as sfft

from .errors import DomainError, NumericalBlowupError, ResolutionError, StepSizeError
from .fields import ComplexField, Grid, PhysicalParams, SpinorField

__all__ = [
    "Potential",
    "MagneticField",
    "StepConfig",
    "Environment",
    "SplitStepper",
    "schrodinger_step",
    "pauli_step",
    "evolve",
    "rotate_spin_basis",
    "external_potential",
    "EnvelopeField",
    "demodulate",
    "embed_envelope",
    "free_flight",
]

PHASE_WRAP_LIMIT = math.pi / 4


@dataclass(frozen=True, eq=False)
class Potential:
    """Real scalar potential; build with the classmethods and add with ``+``."""

    kind: str = "none"
    data: dict = field(default_factory=dict)

    @classmethod
    def none(cls):
        return cls("none")

    @classmethod
    def constant(cls, value):
        return cls("constant", {"value": float(value)})

    @classmethod
    def linear_gravity(cls):
        """``sum_axes m_axis g_axis x_axis`` taken from the PhysicalParams."""
        return cls("linear_gravity")

    @classmethod
    def harmonic(cls, omega, center=0.0, axes=None):
        """``1/2 m omega^2 (x - c)^2`` on the listed axes (all by default)."""
        return cls("harmonic", {"omega": float(omega), "center": center, "axes": axes})

    @classmethod
    def pairwise(cls, func=None, *, stiffness=None):
        """Interaction ``U(x1 - x2)`` on a 2D configuration grid.

        Either a vectorized callable of the separation or, with ``stiffness``,
        the harmonic bond ``1/2 k (x1 - x2)^2``.
        """
        if (func is None) == (stiffness is None):
            raise ValueError("give exactly one of func or stiffness")
        if func is None:
            k = float(stiffness)

            def func(r):
                return 0.5 * k * r * r

        return cls("pairwise", {"func": func})

    @classmethod
    def sampled(cls, values_or_func):
        """Arbitrary potential: an array on the grid or ``f(*mesh)``."""
        return cls("sampled", {"source": values_or_func})

    def __add__(self, other: "Potential") -> "Potential":
        terms = []
        for p in (self, other):
            if p.kind == "sum":
                terms.extend(p.data["terms"])
            elif p.kind != "none":
                terms.append(p)
        return Potential("sum", {"terms": tuple(terms)})

    def sample(self, grid: Grid, params: PhysicalParams) -> np.ndarray:
        kind = self.kind
        if kind == "none":
            return np.zeros(grid.shape)
        if kind == "constant":
            return np.full(grid.shape, self.data["value"])
        mesh = grid.mesh()
        if kind == "linear_gravity":
            out = np.zeros(grid.shape)
            for i, x in enumerate(mesh):
                gi = params.g_along(i)
                if gi:
                    out = out + params.mass_along(i) * gi * x
            return out
        if kind == "harmonic":
            axes = self.data["axes"]
            axes = range(grid.dims) if axes is None else axes
            center = np.broadcast_to(np.asarray(self.data["center"], dtype=float), (grid.dims,))
            w = self.data["omega"]
            out = np.zeros(grid.shape)
            for i in axes:
                out = out + 0.5 * params.mass_along(i) * w * w * (mesh[i] - center[i]) ** 2
            return out
        if kind == "pairwise":
            if grid.dims != 2:
                raise ValueError("pairwise potential needs a 2D configuration grid")
            return np.asarray(self.data["func"](mesh[0] - mesh[1]), dtype=float)
        if kind == "sampled":
            src = self.data["source"]
            vals = src(*mesh) if callable(src) else src
            vals = np.asarray(vals)
            if np.iscomplexobj(vals):
                if np.any(vals.imag != 0):
                    raise ValueError("sampled potential must be real")
                vals = vals.real
            return np.broadcast_to(vals.astype(float), grid.shape).copy()
        if kind == "sum":
            out = np.zeros(grid.shape)
            for term in self.data["terms"]:
                out = out + term.sample(grid, params)
            return out
        raise ValueError(f"unknown potential kind {kind!r}")


def external_potential(params: PhysicalParams, vq: Callable | None = None) -> Potential:
    """Centre-of-mass potential ``M g.x + Q V_q(x)`` for a weakly polarizable system."""
    pot = Potential.linear_gravity()
    if vq is not None and params.charge:
        q = params.charge
        pot = pot + Potential.sampled(lambda *x: q * np.asarray(vq(*x)))
    return pot


@dataclass(frozen=True)
class MagneticField:
    """Stern-Gerlach field ``Bz = B0 - B'0 z``, ``Bx = B'0 x``, ``By = 0``.

    ``z_axis`` / ``x_axis`` name the grid axes carrying those coordinates
    (``x_axis=None`` evaluates on the ``x = 0`` plane).  ``particle`` picks
    which spin the field couples to on a two-particle spinor.  The field is
    switched on for ``t_on <= t < t_off``.
    """

    b0: float
    gradient: float
    t_on: float = -math.inf
    t_off: float = math.inf
    z_axis: int = 0
    x_axis: int | None = None
    particle: int = 0

    def components(self, grid: Grid):
        mesh = grid.mesh()
        z = mesh[self.z_axis]
        bz = self.b0 - self.gradient * z
        if self.x_axis is None:
            bx = np.zeros_like(bz)
        else:
            bx = self.gradient * mesh[self.x_axis]
        return bx, bz

    def overlap(self, t0: float, t1: float) -> float:
        return max(0.0, min(t1, self.t_off) - max(t0, self.t_on))


@dataclass(frozen=True)
class StepConfig:
    dt: float
    boundary: str = "periodic"
    absorb_width: int = 0
    absorb_strength: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.boundary not in ("periodic", "absorbing"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.boundary == "absorbing":
            if self.absorb_width <= 0:
                raise ValueError("absorbing boundary needs a positive width")
            if not 0 < self.absorb_strength <= 1:
                raise ValueError("absorb_strength must lie in (0, 1]")

    def mask(self, grid: Grid):
        if self.boundary == "periodic":
            return None
        if any(self.absorb_width >= n / 4 for n in grid.n):
            raise ValueError("absorbing width must stay below n_points/4")
        out = np.ones(grid.shape)
        w = self.absorb_width
        for i, n in enumerate(grid.n):
            depth = np.zeros(n)
            ramp = (np.arange(w, 0, -1)) / w  # 1 at the wall
            depth[:w] = ramp
            depth[n - w:] = ramp[::-1]
            m1 = 1.0 - self.absorb_strength * np.sin(0.5 * np.pi * depth) ** 2
            shape = [1] * grid.dims
            shape[i] = n
            out = out * m1.reshape(shape)
        return out


@dataclass(frozen=True, eq=False)
class Environment:
    """Everything besides the state that a step needs."""

    params: PhysicalParams
    cfg: StepConfig
    potential: Potential = field(default_factory=Potential.none)
    bfields: tuple[MagneticField, ...] = ()

    def __post_init__(self):
        b = self.bfields
        if isinstance(b, MagneticField):
            b = (b,)
        object.__setattr__(self, "bfields", tuple(b))


def _kinetic_exponent(grid: Grid, params: PhysicalParams) -> np.ndarray:
    """``hbar k^2 / 2m`` summed over axes, in FFT ordering."""
    out = np.zeros(grid.shape)
    for i in range(grid.dims):
        k = grid.wavenumbers(i)
        shape = [1] * grid.dims
        shape[i] = grid.n[i]
        out = out + (params.hbar * k * k / (2.0 * params.mass_along(i))).reshape(shape)
    return out


def _check_phase_wrap(values: np.ndarray, dt: float, hbar: float, what: str):
    """Adjacent-cell phase increment of a pointwise factor must stay resolvable."""
    for axis in range(values.ndim):
        if values.shape[axis] < 2:
            continue
        jump = np.max(np.abs(np.diff(values, axis=axis))) * dt / hbar
        if jump >= PHASE_WRAP_LIMIT:
            raise StepSizeError(
                f"{what}: adjacent-cell phase step {jump:.3g} rad >= pi/4 on axis {axis}; reduce dt"
            )


def _su2(bx, bz, coupling, duration, hbar):
    """Entries of ``exp(-i coupling*duration/hbar * (bx sx + bz sz))``.

    Returns ``(d_up, d_dn, off)`` so that
    ``up' = d_up*up + off*dn`` and ``dn' = off*up + d_dn*dn``.
    """
    bmag = np.hypot(bx, bz)
    beta = coupling * duration / hbar * bmag
    c = np.cos(beta)
    s = np.sin(beta)
    with np.errstate(invalid="ignore", divide="ignore"):
        nz = np.where(bmag > 0, bz / bmag, 1.0)
        nx = np.where(bmag > 0, bx / bmag, 0.0)
    return c - 1j * s * nz, c + 1j * s * nz, -1j * s * nx


def _spin_pairs(ncomp: int, particle: int):
    if ncomp == 2:
        if particle != 0:
            raise ValueError("two-component spinor has a single particle")
        return [(0, 1)]
    if particle == 0:
        return [(0, 2), (1, 3)]
    return [(0, 1), (2, 3)]


class SplitStepper:
    """Precomputed Strang stepper for a fixed grid and environment.

    Works for scalar fields and for 2- or 4-component spinors.  Calling the
    stepper advances one ``dt``.
    """

    def __init__(self, grid: Grid, env: Environment, check=True):
        self.grid = grid
        self.env = env
        p = env.params
        dt = env.cfg.dt
        pot = env.potential.sample(grid, p)
        if check:
            _check_phase_wrap(pot, dt, p.hbar, "potential")
        self._pot_half = None if env.potential.kind == "none" else np.exp(-0.5j * dt / p.hbar * pot)
        self._kin = np.exp(-1j * dt * _kinetic_exponent(grid, p))
        self._mask = env.cfg.mask(grid)
        self._axes = tuple(range(-grid.dims, 0))
        self._b = []
        for b in env.bfields:
            bx, bz = b.components(grid)
            if check:
                _check_phase_wrap(np.hypot(bx, bz) * p.mu_b, dt, p.hbar, "magnetic term")
            full_half = _su2(bx, bz, p.mu_b, 0.5 * dt, p.hbar)
            self._b.append((b, bx, bz, full_half))

    def _magnetic(self, vals: np.ndarray, t0: float, t1: float) -> np.ndarray:
        half = 0.5 * self.env.cfg.dt
        for b, bx, bz, full_half in self._b:
            dur = b.overlap(t0, t1)
            if dur <= 0:
                continue
            if abs(dur - half) <= 1e-12 * half:
                d_up, d_dn, off = full_half
            else:
                d_up, d_dn, off = _su2(bx, bz, self.env.params.mu_b, dur, self.env.params.hbar)
            if vals.ndim == self.grid.dims:
                raise ValueError("magnetic field needs a spinor state")
            out = vals.copy()
            for iu, idn in _spin_pairs(vals.shape[0], b.particle):
                up, dn = vals[iu], vals[idn]
                out[iu] = d_up * up + off * dn
                out[idn] = off * up + d_dn * dn
            vals = out
        return vals

    def _kinetic(self, vals: np.ndarray) -> np.ndarray:
        return sfft.ifftn(self._kin * sfft.fftn(vals, axes=self._axes), axes=self._axes)

    def step_values(self, vals: np.ndarray, t: float) -> np.ndarray:
        dt = self.env.cfg.dt
        if self._pot_half is not None:
            vals = self._pot_half * vals
        if self._b:
            vals = self._magnetic(vals, t, t + 0.5 * dt)
        vals = self._kinetic(vals)
        if self._b:
            vals = self._magnetic(vals, t + 0.5 * dt, t + dt)
        if self._pot_half is not None:
            vals = self._pot_half * vals
        if self._mask is not None:
            vals = self._mask * vals
        return vals

    def __call__(self, state, t_next=None):
        vals = self.step_values(state.values, state.time)
        if not np.all(np.isfinite(vals)):
            raise NumericalBlowupError(f"non-finite amplitude after step at t={state.time:g}")
        t = state.time + self.env.cfg.dt if t_next is None else t_next
        return state.with_values(vals, t)


def schrodinger_step(field: ComplexField, potential: Potential, params: PhysicalParams, cfg: StepConfig) -> ComplexField:
    """Advance a scalar field by one Strang step."""
    if not isinstance(field, ComplexField):
        raise TypeError("schrodinger_step expects a ComplexField")
    env = Environment(params, cfg, potential)
    return SplitStepper(field.grid, env)(field)


def pauli_step(spinor: SpinorField, bfield, potential: Potential, params: PhysicalParams, cfg: StepConfig) -> SpinorField:
    """Advance a spinor by one Strang step of the Pauli equation.

    ``bfield`` may be a single :class:`MagneticField`, a sequence of them
    (one per particle on a 4-component spinor) or ``None``.
    """
    if not isinstance(spinor, SpinorField):
        raise TypeError("pauli_step expects a SpinorField")
    if bfield is None:
        bfield = ()
    env = Environment(params, cfg, potential, bfield)
    return SplitStepper(spinor.grid, env)(spinor)


def evolve(state, env: Environment, duration: float, snapshot_every: int | None = None,
           observer: Callable | None = None, keep_snapshots=True):
    """Step ``state`` forward by ``duration``.

    Parameters
    ----------
    state : ComplexField or SpinorField
    env : Environment
    duration : float
        Must be a multiple of ``env.cfg.dt`` to one part in 1e6.
    snapshot_every : int, optional
        Emit a snapshot every this many steps (the initial and final states
        are always emitted when snapshots are requested).
    observer : callable, optional
        Called with every emitted snapshot.

    Returns
    -------
    final, snapshots
    """
    if duration < 0:
        raise ValueError("duration must be non-negative")
    dt = env.cfg.dt
    nsteps = int(round(duration / dt))
    if abs(nsteps * dt - duration) > 1e-6 * max(dt, duration):
        raise StepSizeError(f"duration {duration:g} is not a multiple of dt={dt:g}")
    snaps = []

    def emit(s):
        if observer is not None:
            observer(s)
        if keep_snapshots:
            snaps.append(s)

    want = snapshot_every is not None or observer is not None
    every = snapshot_every or nsteps or 1
    if want:
        emit(state)
    if nsteps == 0:
        return state, snaps
    stepper = SplitStepper(state.grid, env)
    t0 = state.time
    for k in range(1, nsteps + 1):
        state = stepper(state, t0 + k * dt)
        if want and (k % every == 0 or k == nsteps):
            emit(state)
    return state, snaps


def rotate_spin_basis(spinor: SpinorField, angle: float, particle: int = 0) -> SpinorField:
    """Re-express one particle's spin in the basis quantized along
    ``(sin a, 0, cos a)``.

    After the rotation component "up" holds the amplitude for spin +1/2
    along the analyzer direction, so a standard z-gradient field sorts the
    particle along that direction.
    """
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    vals = spinor.values.copy()
    for iu, idn in _spin_pairs(spinor.ncomp, particle):
        up, dn = spinor.values[iu], spinor.values[idn]
        vals[iu] = c * up + s * dn
        vals[idn] = -s * up + c * dn
    return spinor.with_values(vals)


# --- narrowband free flight -------------------------------------------------


@dataclass(frozen=True)
class EnvelopeField:
    """``psi(x) = exp(i (k_c x + phase)) a(x)`` with a slowly varying ``a``.

    Used for free flight of fields whose spectrum is a narrow line far from
    zero: the envelope lives on a grid much coarser than the carrier
    wavelength and the free propagator acts on it exactly in Fourier space.
    """

    grid: Grid
    carrier: float
    phase: float
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.shape:
            raise ValueError("envelope shape does not match grid")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def carrier_phase(self, x) -> np.ndarray:
        return self.carrier * np.asarray(x) + self.phase

    def sample(self) -> np.ndarray:
        """Full amplitude on the envelope grid points."""
        return np.exp(1j * self.carrier_phase(self.grid.axis(0))) * self.values


def demodulate(field: ComplexField, stride: int, tol=1e-13) -> EnvelopeField:
    """Strip the dominant carrier of a 1D field and subsample the envelope.

    Subsampling is exact when the envelope spectrum fits inside the coarse
    Nyquist band; the discarded fraction of spectral weight must be below
    ``tol``.
    """
    grid = field.grid
    if grid.dims != 1:
        raise ValueError("demodulate handles 1D fields")
    n = grid.n[0]
    if n % stride:
        raise ValueError("stride must divide the number of points")
    coarse = Grid(n // stride, grid.spacing[0] * stride, grid.origin[0])
    spec = sfft.fft(field.values)
    power = np.abs(spec) ** 2
    if not power.any():
        return EnvelopeField(coarse, 0.0, 0.0, np.zeros(coarse.shape), field.time)
    k = grid.wavenumbers(0)
    kc = float(k[int(np.argmax(power))])
    x = grid.axis(0)
    env = field.values * np.exp(-1j * kc * x)
    espec = np.abs(sfft.fft(env)) ** 2
    q = grid.wavenumbers(0)
    outside = espec[np.abs(q) >= np.pi / (grid.spacing[0] * stride)].sum() / espec.sum()
    if outside > tol:
        raise ResolutionError(f"envelope not band-limited at stride {stride}: {outside:.2e} of weight outside")
    return EnvelopeField(coarse, kc, 0.0, env[::stride].copy(), field.time)


def embed_envelope(env: EnvelopeField, grid: Grid) -> EnvelopeField:
    """Place the envelope on a larger grid of identical spacing (zero fill)."""
    h = env.grid.spacing[0]
    if not math.isclose(grid.spacing[0], h, rel_tol=1e-12):
        raise ValueError("embedding grid must share the spacing")
    offset = (env.grid.origin[0] - grid.origin[0]) / h
    i0 = int(round(offset))
    if abs(offset - i0) > 1e-6:
        raise ValueError("embedding grid is not aligned with the envelope grid")
    if i0 < 0 or i0 + env.grid.n[0] > grid.n[0]:
        raise DomainError("envelope does not fit in the embedding grid")
    vals = np.zeros(grid.shape, dtype=np.complex128)
    vals[i0:i0 + env.grid.n[0]] = env.values
    return EnvelopeField(grid, env.carrier, env.phase, vals, env.time)


def free_flight(env: EnvelopeField, duration: float, mass: float, hbar: float) -> EnvelopeField:
    """Exact free evolution of an envelope field.

    With ``k = k_c + q`` the kinetic phase ``hbar k^2 t / 2m`` splits into a
    global part (absorbed in ``phase``) and ``hbar (2 k_c q + q^2) t / 2m``
    acting on the envelope spectrum.
    """
    q = env.grid.wavenumbers(0)
    a = env.values
    f = hbar * duration / (2.0 * mass)
    spec = sfft.fft(a) * np.exp(-1j * f * (2.0 * env.carrier * q + q * q))
    vals = sfft.ifft(spec)
    phase = env.phase - f * env.carrier**2
    return EnvelopeField(env.grid, env.carrier, phase, vals, env.time + duration)
