"""Closed-form reference solutions.

Nothing here touches the propagators; these functions are the yardstick the
numerical evolution is measured against.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResolutionError
from .fields import CODATA_HBAR, CODATA_MU_B, ComplexField, Grid, SpinorField

__all__ = [
    "RegimeWarning",
    "sigma_hbar",
    "GaussianGravityPacket",
    "gravity_packet_trajectory",
    "gravity_packet_velocity",
    "gravity_packet_density",
    "CoherentState",
    "coherent_state_field",
    "SGParams",
    "sg_offsets",
    "postmagnet_spinor",
    "fringe_spacing",
    "de_broglie_wavelength",
    "singlet_correlation",
    "chsh",
]

PLANCK_H = 2 * math.pi * CODATA_HBAR


class RegimeWarning(UserWarning):
    """Oracle used outside the regime where its approximation holds."""


def sigma_hbar(sigma0, t, mass, hbar):
    """Width of a free Gaussian, ``sigma0 sqrt(1 + (hbar t / 2 m sigma0^2)^2)``."""
    sigma0 = np.asarray(sigma0, dtype=float)
    return sigma0 * np.sqrt(1.0 + (hbar * np.asarray(t, dtype=float) / (2.0 * mass * sigma0**2)) ** 2)


@dataclass(frozen=True)
class GaussianGravityPacket:
    """Free-falling Gaussian packet and one Bohmian start inside it.

    Per-axis tuples; gravity acts along ``-g`` on axis ``gravity_axis``
    (the last axis by default).
    """

    sigma0: tuple
    center: tuple
    start: tuple
    v0: tuple
    g: float
    mass: float
    hbar: float = CODATA_HBAR
    gravity_axis: int = -1

    def __post_init__(self):
        n = len(self.sigma0)
        for name in ("center", "start", "v0"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} must have one entry per axis")
        if any(s <= 0 for s in self.sigma0):
            raise ValueError("sigma0 must be positive")

    @property
    def dims(self):
        return len(self.sigma0)


def _fall(p: GaussianGravityPacket, t):
    out = np.zeros((p.dims,) + np.shape(t))
    out[p.gravity_axis] = -0.5 * p.g * np.asarray(t, dtype=float) ** 2
    return out


def gravity_packet_trajectory(p: GaussianGravityPacket, t):
    """Bohmian position at time(s) ``t``; shape ``(dims,) + shape(t)``.

    ``X(t) = x_G(0) + v0 t - g t^2/2 + (x0 - x_G(0)) (1 - sigma_h(t)/sigma0)``
    with the fall term on the gravity axis only.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    out = _fall(p, t)
    for i in range(p.dims):
        s = sigma_hbar(p.sigma0[i], t, p.mass, p.hbar)
        out[i] += p.start[i] + p.v0[i] * t + (p.center[i] - p.start[i]) * (1.0 - s / p.sigma0[i])
    return out


def gravity_packet_velocity(p: GaussianGravityPacket, x, t):
    """Bohmian velocity field of the falling packet at position ``x``."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for i in range(p.dims):
        s0 = p.sigma0[i]
        tau = p.hbar * t / (2 * p.mass * s0**2)
        rate = tau * tau / (t * (1 + tau * tau)) if t > 0 else 0.0
        c = p.center[i] + p.v0[i] * t
        vi = p.v0[i]
        if i == p.gravity_axis % p.dims:
            c -= 0.5 * p.g * t * t
            vi -= p.g * t
        out[i] = vi + (x[i] - c) * rate
    return out


def gravity_packet_density(p: GaussianGravityPacket, t, grid: Grid):
    """``|psi(x, t)|^2`` of the falling packet sampled on ``grid``."""
    if grid.dims != p.dims:
        raise ValueError("grid dimension mismatch")
    centre = np.asarray(p.center, float) + np.asarray(p.v0, float) * t + _fall(p, t)
    rho = np.ones(grid.shape)
    for i, x in enumerate(grid.mesh()):
        s = float(sigma_hbar(p.sigma0[i], t, p.mass, p.hbar))
        rho = rho * np.exp(-((x - centre[i]) ** 2) / (2 * s * s)) / math.sqrt(2 * math.pi * s * s)
    return rho


@dataclass(frozen=True)
class CoherentState:
    omega: float
    mass: float
    x0: float
    hbar: float = CODATA_HBAR

    def __post_init__(self):
        if self.omega <= 0 or self.mass <= 0 or self.hbar <= 0:
            raise ValueError("omega, mass and hbar must be positive")
        if abs(self.x0) < 3 * self.sigma_h:
            warnings.warn("x0 is not large compared with sigma_h", RegimeWarning, stacklevel=2)

    @property
    def sigma_h(self):
        return math.sqrt(self.hbar / (2 * self.mass * self.omega))

    def position(self, t):
        return self.x0 * np.cos(self.omega * np.asarray(t, dtype=float))

    def velocity(self, t):
        return -self.x0 * self.omega * np.sin(self.omega * np.asarray(t, dtype=float))

    @property
    def period(self):
        return 2 * math.pi / self.omega


def coherent_state_field(c: CoherentState, t: float, grid: Grid, with_time_phase=True) -> ComplexField:
    """Sample the coherent state on a 1D grid.

    ``psi = (2 pi sigma_h^2)^(-1/4) exp(-(x - x(t))^2 / 4 sigma_h^2 + i m v(t) x / hbar)``
    times, when ``with_time_phase`` is set, the global factor
    ``exp(-i omega t / 2 - i m v(t) x(t) / 2 hbar)`` that makes the sample an
    exact solution of the oscillator equation (the modulus does not depend
    on this choice).
    """
    if grid.dims != 1:
        raise ValueError("coherent state is sampled on a 1D grid")
    sh = c.sigma_h
    if grid.spacing[0] > sh / 4:
        raise ResolutionError(f"spacing {grid.spacing[0]:g} exceeds sigma_h/4 = {sh / 4:g}")
    xt, vt = float(c.position(t)), float(c.velocity(t))
    if not grid.contains((xt,), margin=4 * sh):
        raise DomainError("coherent state not contained in the grid")
    x = grid.axis(0)
    psi = (2 * math.pi * sh * sh) ** -0.25 * np.exp(-((x - xt) ** 2) / (4 * sh * sh) + 1j * c.mass * vt * x / c.hbar)
    if with_time_phase:
        psi = psi * np.exp(-0.5j * c.omega * t - 0.5j * c.mass * vt * xt / c.hbar)
    return ComplexField(grid, psi, t)


@dataclass(frozen=True)
class SGParams:
    """Stern-Gerlach magnet and atom parameters (SI by default)."""

    mass: float = 1.8e-25
    sigma0: float = 1e-4
    gradient: float = 1e3
    window: float = 2e-5
    mu_b: float = CODATA_MU_B
    hbar: float = CODATA_HBAR


def sg_offsets(p: SGParams):
    """Return ``(z_delta, u)``: post-magnet displacement and transverse speed."""
    u = p.mu_b * p.gradient * p.window / p.mass
    return 0.5 * u * p.window, u


def postmagnet_spinor(theta0: float, phi0: float, t: float, grid: Grid, p: SGParams = SGParams()) -> SpinorField:
    """Two-packet spinor a time ``t`` after leaving the magnet.

    Up component at ``+(z_delta + u t)`` with amplitude ``cos(theta0/2)``,
    down component at ``-(z_delta + u t)`` with ``i sin(theta0/2)``, phases
    ``+-m u z / hbar``; the undetermined constant phases are set to zero and
    ``phi0`` enters only through them, so it is accepted for symmetry with
    the initial spinor and otherwise unused.  The width stays ``sigma0``
    (spreading is neglected as in the textbook form).  On a 2D grid axis 0
    is ``x`` and axis 1 is ``z``.
    """
    del phi0
    if t < 0:
        raise ValueError("t must be non-negative")
    zd, u = sg_offsets(p)
    off = zd + u * t
    s0 = p.sigma0
    z = grid.mesh()[-1]
    zlo, zhi = grid.lower[-1], grid.upper[-1]
    if off + 4 * s0 > zhi or -off - 4 * s0 < zlo:
        raise DomainError("post-magnet packets clipped by the grid")
    norm = (2 * math.pi * s0 * s0) ** (-0.25 * grid.dims)
    env = np.ones(grid.shape)
    if grid.dims == 2:
        x = grid.mesh()[0]
        env = np.exp(-(x**2) / (4 * s0 * s0))
    k = p.mass * u / p.hbar
    up = math.cos(theta0 / 2) * norm * env * np.exp(-((z - off) ** 2) / (4 * s0 * s0) + 1j * k * z)
    dn = 1j * math.sin(theta0 / 2) * norm * env * np.exp(-((z + off) ** 2) / (4 * s0 * s0) - 1j * k * z)
    return SpinorField(grid, np.stack([up, dn]), t)


def de_broglie_wavelength(mass, velocity, hbar=CODATA_HBAR):
    return 2 * math.pi * hbar / (mass * velocity)


def fringe_spacing(wavelength, separation, distance):
    """Far-field two-slit fringe period ``lambda L / d``.

    Emits :class:`RegimeWarning` unless ``L >> d >> lambda`` (a factor 10
    on each side).
    """
    if min(wavelength, separation, distance) <= 0:
        raise ValueError("all lengths must be positive")
    if not (distance >= 10 * separation and separation >= 10 * wavelength):
        warnings.warn("far-field two-slit regime not satisfied", RegimeWarning, stacklevel=2)
    return wavelength * distance / separation


_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def singlet_correlation(a: float, b: float) -> float:
    """Born-rule ``<sigma_a x sigma_b>`` on the singlet, analyzers in the x-z plane."""
    psi = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)  # (++, +-, -+, --)
    sa = math.sin(a) * _SX + math.cos(a) * _SZ
    sb = math.sin(b) * _SX + math.cos(b) * _SZ
    return float(np.real(psi.conj() @ np.kron(sa, sb) @ psi))


def chsh(e_ab, e_abp, e_apb, e_apbp):
    """``S = E(a,b) - E(a,b') + E(a',b) + E(a',b')``."""
    return e_ab - e_abp + e_apb + e_apbp
