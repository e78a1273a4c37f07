"""Two particles on a line: full configuration-space evolution against the
product of a centre-of-mass wave and a relative-coordinate wave.

Both particles feel uniform gravity ``m_i g x_i`` and a harmonic bond
``k (x1 - x2)^2 / 2``.  The 2D field on the ``(x1, x2)`` grid is propagated
directly; in parallel a 1D external field in ``X = (m1 x1 + m2 x2)/M``
(mass ``M``, potential ``M g X``) and a 1D internal field in ``r = x1 - x2``
(reduced mass, bond potential) are propagated and their product is
compared with the 2D field at every grid point.
"""

from __future__ import annotations

import math

import numpy as np

from ..fields import ComplexField, Grid, PhysicalParams, fourier_interpolate
from ..propagators import Environment, Potential, SplitStepper, StepConfig
from .base import DensityFrame, Param, RunRecord, ScenarioSpec, count, positive, register

PARAMS = (
    positive("m1", 1.0, "mass of particle 1 (scaled)"),
    positive("m2", 2.0, "mass of particle 2 (scaled)"),
    Param("g", 0.5, "uniform gravity (scaled)"),
    Param("stiffness", 1.0, "harmonic bond constant k", lo=0.0),
    positive("hbar", 1.0, "reduced Planck constant (scaled)"),
    Param("ext_center", 0.0, "initial centre of mass"),
    positive("ext_sigma", 1.0, "initial centre-of-mass width"),
    Param("ext_velocity", 0.5, "initial centre-of-mass velocity"),
    Param("int_center", 0.5, "initial mean separation"),
    positive("int_sigma", 0.5, "initial separation width"),
    positive("control_sigma1", 1.0, "width of particle 1 in the non-factorized control"),
    positive("control_sigma2", 1.0, "width of particle 2 in the non-factorized control"),
    Param("run_control", True, "also run the non-factorized control"),
    count("n_points", 256, "grid points per axis", lo=16),
    positive("spacing", 0.1, "grid spacing (scaled)"),
    positive("t_final", 3.0, "evolution time (scaled)"),
    positive("dt", 0.005, "time step (scaled)"),
    count("compare_every", 30, "steps between comparisons"),
)


def _coordinates(m1, m2):
    M = m1 + m2
    return M, m1 * m2 / M


def _factor_grids(grid2: Grid):
    # 1D grids wide enough that every X and r reached from the 2D grid lies
    # inside them, so periodic images never overlap the support
    n = grid2.n[0]
    h = grid2.spacing[0]
    ext = Grid.centered(2 * n, h)
    internal = Grid.centered(2 * n, h)
    return ext, internal


def _product(ext: ComplexField, internal: ComplexField, X, r):
    """Evaluate ``ext(X) * internal(r)`` on the 2D grid via distinct values."""
    xu, xi = np.unique(np.round(X, 12), return_inverse=True)
    ru, ri = np.unique(np.round(r, 12), return_inverse=True)
    fe = fourier_interpolate(ext, xu)
    fi = fourier_interpolate(internal, ru)
    return fe[xi].reshape(X.shape) * fi[ri].reshape(r.shape)


def _initial(kind, c, X, r, x1, x2):
    hb = c["hbar"]
    M, _ = _coordinates(c["m1"], c["m2"])
    if kind == "factorized":
        return np.exp(
            -((X - c["ext_center"]) ** 2) / (4 * c["ext_sigma"] ** 2)
            + 1j * M * c["ext_velocity"] * X / hb
            - ((r - c["int_center"]) ** 2) / (4 * c["int_sigma"] ** 2)
        )
    x1c = c["ext_center"] + c["m2"] / M * c["int_center"]
    x2c = c["ext_center"] - c["m1"] / M * c["int_center"]
    return np.exp(
        -((x1 - x1c) ** 2) / (4 * c["control_sigma1"] ** 2)
        - ((x2 - x2c) ** 2) / (4 * c["control_sigma2"] ** 2)
        + 1j * M * c["ext_velocity"] * X / hb
    )


def _simulate(kind, c, rec: RunRecord):
    m1, m2, g, k, hb = c["m1"], c["m2"], c["g"], c["stiffness"], c["hbar"]
    M, mu = _coordinates(m1, m2)
    grid2 = Grid.centered((c["n_points"],) * 2, c["spacing"])
    x1, x2 = grid2.mesh()
    X = (m1 * x1 + m2 * x2) / M
    r = x1 - x2
    psi0 = _initial(kind, c, X, r, x1, x2)
    psi0 = psi0 / math.sqrt(np.sum(np.abs(psi0) ** 2) * grid2.cell_volume)

    # conditional factors through a reference point; their product equals the
    # initial field exactly when it factorizes
    Xs, rs = c["ext_center"], c["int_center"]

    def psi_at(Xv, rv):
        Xv, rv = np.asarray(Xv, float), np.asarray(rv, float)
        return _initial(kind, c, Xv, rv, Xv + m2 / M * rv, Xv - m1 / M * rv)

    gext, gint = _factor_grids(grid2)
    ref = psi_at(Xs, rs)
    ext0 = psi_at(gext.axis(0), rs)
    int0 = psi_at(Xs, gint.axis(0)) / ref
    norm = 1.0 / math.sqrt(np.sum(np.abs(_initial(kind, c, X, r, x1, x2)) ** 2) * grid2.cell_volume)
    ext = ComplexField(gext, ext0 * norm)
    internal = ComplexField(gint, int0)

    cfg = StepConfig(c["dt"])
    p2 = PhysicalParams(mass=m1, hbar=hb, g=(g, g), axis_masses=(m1, m2))
    env2 = Environment(p2, cfg, Potential.linear_gravity() + Potential.pairwise(stiffness=k))
    envx = Environment(PhysicalParams(mass=M, hbar=hb, g=(g,)), cfg, Potential.linear_gravity())
    envr = Environment(PhysicalParams(mass=mu, hbar=hb), cfg, Potential.harmonic(math.sqrt(k / mu)) if k > 0 else Potential.none())
    s2, sx, sr = SplitStepper(grid2, env2), SplitStepper(gext, envx), SplitStepper(gint, envr)

    full = ComplexField(grid2, psi0)
    nsteps = int(round(c["t_final"] / c["dt"]))
    times, devs = [], []

    def compare(step):
        prod = _product(ext, internal, X, r)
        dev = np.max(np.abs(full.values - prod)) / np.max(np.abs(full.values))
        times.append(step * c["dt"])
        devs.append(float(dev))

    compare(0)
    for step in range(1, nsteps + 1):
        t = step * c["dt"]
        full, ext, internal = s2(full, t), sx(ext, t), sr(internal, t)
        if step % c["compare_every"] == 0 or step == nsteps:
            compare(step)
    rec.series[f"{kind}_deviation"] = (np.array(times), np.array(devs))
    rec.stat(f"{kind}_max_deviation", max(devs))
    rec.stat(f"{kind}_final_norm2", float(np.sum(np.abs(full.values) ** 2) * grid2.cell_volume))
    if kind == "factorized":
        ax = [grid2.axis(0), grid2.axis(1)]
        rec.frames.append(DensityFrame("initial", 0.0, ax, np.abs(psi0) ** 2))
        rec.frames.append(DensityFrame("final", nsteps * c["dt"], ax, full.density()))
        rho = full.density()
        dv = grid2.cell_volume
        rec.stat("final_com", float(np.sum(X * rho) * dv))
        rec.stat("final_separation", float(np.sum(r * rho) * dv))


def run_two_body(cfg) -> RunRecord:
    rec = RunRecord(cfg)
    _simulate("factorized", cfg, rec)
    if cfg["run_control"]:
        _simulate("control", cfg, rec)
    return rec


SPEC = register(ScenarioSpec("two_body", "two-body external/internal factorization", PARAMS, run_two_body))
