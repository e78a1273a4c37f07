"""The classical side of the semiclassical limit.

Action of the classical flow through the (min, +) superposition
``S(x, t) = min_x0 [S0(x0) + S_cl(x, t; x0)]``, density transported along
the characteristics, and a comparator that sweeps hbar downwards and measures
how the Madelung fields approach the classical ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .errors import CausticError, CoverageError, ResolutionError
from .fields import ComplexField, Grid, PhysicalParams
from .madelung import madelung_decompose
from .propagators import Environment, Potential, StepConfig, evolve

__all__ = [
    "ClassicalAction",
    "InitialData",
    "minplus_transform",
    "minplus_action",
    "characteristics",
    "hj_velocity_and_density",
    "SweepReport",
    "hbar_sweep_compare",
]


@dataclass(frozen=True)
class ClassicalAction:
    """Closed-form two-point action for a 1D free, uniform-force or harmonic motion.

    ``linear_gravity`` means the potential ``m g x`` (force ``-m g``).
    """

    kind: str
    mass: float
    g: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        if self.kind not in ("free", "linear_gravity", "harmonic"):
            raise ValueError(f"unknown action kind {self.kind!r}")
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.kind == "harmonic" and self.omega <= 0:
            raise ValueError("harmonic action needs omega > 0")

    def __call__(self, x, t, x0):
        """``S_cl(x, t; x0)`` (broadcasting)."""
        if t <= 0:
            raise ValueError("t must be positive")
        m = self.mass
        x = np.asarray(x, dtype=float)
        x0 = np.asarray(x0, dtype=float)
        if self.kind == "free":
            return m * (x - x0) ** 2 / (2 * t)
        if self.kind == "linear_gravity":
            g = self.g
            return m * (x - x0) ** 2 / (2 * t) - 0.5 * m * g * t * (x + x0) - m * g * g * t**3 / 24
        w = self.omega
        s = math.sin(w * t)
        if abs(s) < 1e-12:
            raise CausticError("harmonic action is singular at multiples of half a period")
        return m * w / (2 * s) * ((x * x + x0 * x0) * math.cos(w * t) - 2 * x * x0)

    def potential(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "free":
            return np.zeros_like(x)
        if self.kind == "linear_gravity":
            return self.mass * self.g * x
        return 0.5 * self.mass * self.omega**2 * x * x

    def flow(self, x0, v0, t):
        """Position at ``t`` of the characteristic through ``(x0, v0)``."""
        x0 = np.asarray(x0, dtype=float)
        v0 = np.asarray(v0, dtype=float)
        if self.kind == "free":
            return x0 + v0 * t
        if self.kind == "linear_gravity":
            return x0 + v0 * t - 0.5 * self.g * t * t
        w = self.omega
        return x0 * np.cos(w * t) + v0 / w * np.sin(w * t)

    def flow_velocity(self, x0, v0, t):
        x0 = np.asarray(x0, dtype=float)
        v0 = np.asarray(v0, dtype=float)
        if self.kind == "free":
            return v0 + 0 * x0
        if self.kind == "linear_gravity":
            return v0 - self.g * t + 0 * x0
        w = self.omega
        return -x0 * w * np.sin(w * t) + v0 * np.cos(w * t)

    def to_potential(self) -> Potential:
        if self.kind == "free":
            return Potential.none()
        if self.kind == "linear_gravity":
            return Potential.linear_gravity()
        return Potential.harmonic(self.omega)

    def params(self, hbar: float) -> PhysicalParams:
        g = (self.g,) if self.kind == "linear_gravity" else (0.0,)
        return PhysicalParams(mass=self.mass, hbar=hbar, g=g)


@dataclass(frozen=True, eq=False)
class InitialData:
    """hbar-independent initial density and action sampled on a uniform 1D grid."""

    x: np.ndarray
    rho0: np.ndarray
    S0: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        r = np.asarray(self.rho0, dtype=float)
        s = np.asarray(self.S0, dtype=float)
        if not (x.shape == r.shape == s.shape) or x.ndim != 1 or x.size < 3:
            raise ValueError("x, rho0 and S0 must be 1D arrays of equal length >= 3")
        if np.any(np.diff(x) <= 0):
            raise ValueError("x must increase")
        if np.any(r < 0):
            raise ValueError("rho0 must be non-negative")
        mass = trapezoid(r, x)
        if abs(mass - 1.0) > 1e-6:
            raise ValueError(f"rho0 integrates to {mass:.8g}, not 1")
        if not np.all(np.isfinite(s[r > 0])):
            raise ValueError("S0 must be finite on the support of rho0")
        for name, v in (("x", x), ("rho0", r), ("S0", s)):
            v.flags.writeable = False
            object.__setattr__(self, name, v)

    @classmethod
    def from_functions(cls, x, rho0, S0):
        x = np.asarray(x, dtype=float)
        return cls(x, rho0(x), S0(x))

    @classmethod
    def gaussian(cls, x, center, sigma0, mass, velocity=0.0, curvature=0.0):
        """Gaussian density with ``S0 = m v x + curvature (x - c)^2 / 2``."""
        x = np.asarray(x, dtype=float)
        rho = np.exp(-((x - center) ** 2) / (2 * sigma0**2)) / math.sqrt(2 * math.pi * sigma0**2)
        s0 = mass * velocity * x + 0.5 * curvature * (x - center) ** 2
        return cls(x, rho, s0)

    def velocity0(self, mass):
        return np.gradient(self.S0, self.x, edge_order=2) / mass


def minplus_transform(nodes, values, act: ClassicalAction, x, t, chunk=2048):
    """``min_y [values(y) + S_cl(x, t; y)]`` over the node set, refined.

    The discrete minimizer is polished with a three-point parabola, which is
    exact whenever the objective is quadratic in ``y`` on a uniform grid.

    Raises
    ------
    CoverageError
        if the discrete minimizer is an end node.
    """
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.shape)
    arg = np.empty(xs.shape)
    h = nodes[1] - nodes[0]
    for lo in range(0, xs.size, chunk):
        xc = xs[lo:lo + chunk]
        total = values[None, :] + act(xc[:, None], t, nodes[None, :])
        j = np.argmin(total, axis=1)
        if np.any(j == 0) or np.any(j == nodes.size - 1):
            bad = xc[(j == 0) | (j == nodes.size - 1)]
            raise CoverageError(f"minimizer on the boundary of the x0 grid for x in [{bad.min():g}, {bad.max():g}]")
        rows = np.arange(xc.size)
        fm, f0, fp = total[rows, j - 1], total[rows, j], total[rows, j + 1]
        curv = fm - 2 * f0 + fp
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.where(curv > 0, 0.5 * (fm - fp) / curv, 0.0)
        out[lo:lo + chunk] = f0 - 0.25 * (fm - fp) * d
        arg[lo:lo + chunk] = nodes[j] + d * h
    if np.ndim(x) == 0:
        return float(out[0]), float(arg[0])
    return out, arg


def minplus_action(data: InitialData, act: ClassicalAction, x, t):
    """Classical action ``S(x, t)`` from the initial data; see :func:`minplus_transform`."""
    return minplus_transform(data.x, data.S0, act, x, t)[0]


def characteristics(data: InitialData, act: ClassicalAction, t):
    """Return ``(x(t; x0), dx/dx0)`` on the initial nodes.

    Raises :class:`CausticError` when the map is not strictly increasing.
    """
    v0 = data.velocity0(act.mass)
    xt = act.flow(data.x, v0, t)
    jac = np.gradient(xt, data.x, edge_order=2)
    support = data.rho0 > 1e-14 * data.rho0.max()
    if np.any(jac[support] <= 0) or np.any(np.diff(xt[support]) <= 0):
        raise CausticError(f"characteristics cross before t={t:g}")
    return xt, jac


def hj_velocity_and_density(data: InitialData, act: ClassicalAction, t, x=None, rho_floor=1e-10):
    """Classical velocity and density at time ``t``.

    Density is pushed forward along the characteristics with the Jacobian
    weight; the velocity is the finite-difference gradient of the Minplus
    action divided by the mass.  Both are returned on ``x`` (the pushed
    initial nodes when omitted); the velocity is NaN where the classical
    density is below ``rho_floor * max``.

    Returns
    -------
    x, v, rho
    """
    if t <= 0:
        raise ValueError("t must be positive")
    xt, jac = characteristics(data, act, t)
    support = data.rho0 > 1e-14 * data.rho0.max()
    xs, rs = xt[support], (data.rho0 / jac)[support]
    if x is None:
        x = xs
    x = np.asarray(x, dtype=float)
    rho = np.interp(x, xs, rs, left=0.0, right=0.0)
    v = np.full(x.shape, np.nan)
    live = rho >= rho_floor * rho.max()
    if np.any(live):
        h = np.min(np.diff(data.x))
        xl = x[live]
        sp = minplus_action(data, act, xl + h, t)
        sm = minplus_action(data, act, xl - h, t)
        v[live] = (sp - sm) / (2 * h * act.mass)
    return x, v, rho


@dataclass
class SweepReport:
    hbars: list
    rho_l1: list
    v_inf: list
    t: float
    notes: dict = field(default_factory=dict)

    @property
    def rho_monotone(self):
        return all(b < a for a, b in zip(self.rho_l1, self.rho_l1[1:]))

    @property
    def v_monotone(self):
        return all(b < a for a, b in zip(self.v_inf, self.v_inf[1:]))

    @property
    def converges(self):
        return self.rho_monotone and self.v_monotone


def hbar_sweep_compare(data: InitialData, act: ClassicalAction, hbars, t, grid: Grid,
                       steps=200, mask_fraction=1e-3) -> SweepReport:
    """Quantum-versus-classical error norms along a list of hbar values.

    For each hbar the field ``sqrt(rho0) exp(i S0 / hbar)`` is sampled on
    ``grid`` (``rho0``/``S0`` interpolated from ``data``), propagated to
    ``t`` in ``steps`` split steps and decomposed.  Reported per hbar:
    ``||rho_h - rho||_1`` and the max velocity error over the region where
    the classical density exceeds ``mask_fraction`` of its peak.
    """
    if grid.dims != 1:
        raise ValueError("hbar sweep runs on a 1D grid")
    x = grid.axis(0)
    _, v_cl, rho_cl = hj_velocity_and_density(data, act, t, x)
    region = rho_cl >= mask_fraction * rho_cl.max()
    rho0 = np.interp(x, data.x, data.rho0, left=0.0, right=0.0)
    s0 = np.interp(x, data.x, data.S0)
    grad = np.max(np.abs(np.gradient(s0, x)[rho0 > 1e-14 * rho0.max()]))
    pot = act.to_potential()
    rho_err, v_err = [], []
    for hb in hbars:
        if grad * grid.spacing[0] / hb > math.pi / 2:
            raise ResolutionError(f"grid does not resolve the phase S0/hbar at hbar={hb:g}")
        psi = np.sqrt(rho0) * np.exp(1j * s0 / hb)
        psi = psi / math.sqrt(np.sum(np.abs(psi) ** 2) * grid.spacing[0])
        env = Environment(act.params(hb), StepConfig(t / steps), pot)
        final, _ = evolve(ComplexField(grid, psi), env, t)
        view = madelung_decompose(final, env.params)
        rho_err.append(float(np.sum(np.abs(view.density - rho_cl)) * grid.spacing[0]))
        ok = region & view.valid
        v_err.append(float(np.max(np.abs(view.velocity[0][ok] - v_cl[ok]))))
    return SweepReport(list(hbars), rho_err, v_err, t)
