"""Double slit with C60 molecules, transverse coordinate only.

The longitudinal coordinate is classical (``y = v t``) so transverse time
stands in for distance from the slits.  A broad Gaussian beam arrives from
``pre_distance`` before the slits; at the slit plane it is multiplied by two
erf-smoothed apertures and renormalized; the two-slit wave then evolves
freely to the screen.  Free evolution is spectral and exact, so the step
only fixes the cadence of velocity snapshots for the trajectories.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import find_peaks
from scipy.special import erf
from scipy.stats import chi2

from ..errors import ResolutionError
from ..fields import CODATA_HBAR, ComplexField, Grid, PhysicalParams, Scaling, gaussian_packet
from ..madelung import EnsembleIntegrator, sample_initial_positions, velocity_snapshot
from ..oracles import de_broglie_wavelength, fringe_spacing
from ..propagators import Environment, SplitStepper, StepConfig
from ..rng import stream
from .base import DensityFrame, Param, RunRecord, ScenarioSpec, count, positive, register

PARAMS = (
    positive("mass", 1.197e-24, "molecule mass", "kg"),
    positive("velocity", 200.0, "beam velocity", "m/s"),
    positive("slit_width", 55e-9, "width of each slit", "m"),
    positive("slit_separation", 100e-9, "centre-to-centre slit distance", "m"),
    Param("smoothing", 0.1, "edge smoothing as a fraction of slit width", lo=0.0, hi=0.5),
    positive("beam_sigma", 0.5e-6, "transverse width of the incident beam", "m"),
    Param("pre_distance", 2e-3, "distance before the slits shown in frames", lo=0.0, unit="m"),
    positive("screen_distance", 5e-3, "slit-to-screen distance", "m"),
    positive("frame_interval", 2.5e-6, "time between density frames", "s"),
    positive("snapshot_interval", 5e-8, "velocity-snapshot cadence", "s"),
    count("n_points", 8192, "transverse grid points", lo=64),
    positive("domain_width", 10e-6, "transverse domain width", "m"),
    count("n_trajectories", 24, "trajectories kept for plotting", lo=0),
    count("n_ensemble", 10000, "trajectories for the equivariance test", lo=0),
    count("chi2_bins", 50, "equal-probability bins of the equivariance test", lo=2),
    positive("spacetime_crop", 1.5e-6, "half-height of the space-time image", "m"),
)


def aperture(z, center, width, smooth):
    """Erf-smoothed top hat (1 inside, 0 outside, edge width ``smooth``)."""
    if smooth == 0:
        return ((z >= center - width / 2) & (z <= center + width / 2)).astype(float)
    s = math.sqrt(2) * smooth
    return 0.5 * (erf((z - center + width / 2) / s) - erf((z - center - width / 2) / s))


def _equal_probability_chi2(samples, grid: Grid, rho, bins):
    """Pearson chi-square of samples against a cell-wise constant density."""
    h = grid.spacing[0]
    edges_cells = grid.axis(0) - 0.5 * h
    cdf = np.concatenate([[0.0], np.cumsum(rho)])
    cdf /= cdf[-1]
    targets = np.linspace(0, 1, bins + 1)[1:-1]
    # invert the piecewise-linear CDF at the quantiles
    cell_edges = np.concatenate([edges_cells, [edges_cells[-1] + h]])
    cuts = np.interp(targets, cdf, cell_edges)
    counts = np.bincount(np.searchsorted(cuts, samples), minlength=bins)
    expected = len(samples) / bins
    stat = float(np.sum((counts - expected) ** 2) / expected)
    return stat, float(chi2.sf(stat, bins - 1)), counts


def run_c60(cfg) -> RunRecord:
    rec = RunRecord(cfg)
    m, v = cfg["mass"], cfg["velocity"]
    sc = Scaling(length=1e-7, time=1e-6, mass=m)
    params = sc.params(PhysicalParams(mass=m))
    n = cfg["n_points"]
    grid = Grid.centered(n, sc.to_length(cfg["domain_width"]) / n)
    h_si = sc.from_length(grid.spacing[0])
    width, sep = cfg["slit_width"], cfg["slit_separation"]
    smooth = cfg["smoothing"] * width
    if width < 4 * h_si or (0 < smooth < h_si):
        raise ResolutionError(f"slit of {width:g} m (edge {smooth:g} m) not resolved by spacing {h_si:g} m")
    z = grid.axis(0)

    t_pre = cfg["pre_distance"] / v
    t_screen = cfg["screen_distance"] / v
    dt = sc.to_time(cfg["snapshot_interval"])
    step = StepConfig(dt)
    stepper = SplitStepper(grid, Environment(params, step))
    frame_every = int(round(cfg["frame_interval"] / cfg["snapshot_interval"]))
    if abs(frame_every * cfg["snapshot_interval"] - cfg["frame_interval"]) > 1e-6 * cfg["frame_interval"]:
        raise ValueError("frame_interval must be a multiple of snapshot_interval")
    n_pre = int(round(t_pre / cfg["snapshot_interval"]))
    n_post = int(round(t_screen / cfg["snapshot_interval"]))

    crop = np.abs(sc.from_length(z)) <= cfg["spacetime_crop"]
    st_rows, st_times = [], []
    st_every = max(1, frame_every // 10)

    def frame(state, label):
        t_si = sc.from_time(state.time)
        rho = state.density() / sc.length
        rec.frames.append(DensityFrame(label, float(t_si), [sc.from_length(z)], rho))

    def row(state):
        st_rows.append(state.density()[crop] / sc.length)
        st_times.append(float(sc.from_time(state.time)))

    # incident beam
    t0 = -sc.to_time(t_pre)
    beam = gaussian_packet(grid, 0.0, sc.to_length(cfg["beam_sigma"]), 0.0, params, time=t0)
    state = beam
    for k in range(n_pre + 1):
        if k > 0:
            state = stepper(state, t0 + k * dt)
        if k == n_pre:
            break
        if k % frame_every == 0:
            frame(state, f"frame_{len(rec.frames):02d}")
        if k % st_every == 0:
            row(state)
    state = ComplexField(grid, state.values, 0.0)

    # slit plane
    zs = sc.to_length
    mask_a = aperture(z, zs(sep / 2), zs(width), zs(smooth))
    mask_b = aperture(z, zs(-sep / 2), zs(width), zs(smooth))
    psi_a = state.values * mask_a
    psi_b = state.values * mask_b
    norm = math.sqrt(np.sum(np.abs(psi_a + psi_b) ** 2) * grid.spacing[0])
    transmitted = norm**2
    psi_a, psi_b = psi_a / norm, psi_b / norm
    state = ComplexField(grid, psi_a + psi_b, 0.0)
    rec.stat("slit_transmission", float(transmitted))

    gen_fig = stream(cfg.seed, "c60/figure_trajectories")
    gen_ens = stream(cfg.seed, "c60/ensemble")
    x_fig = sample_initial_positions(state, max(cfg["n_trajectories"], 1), gen_fig)[: cfg["n_trajectories"]]
    x_ens = sample_initial_positions(state, max(cfg["n_ensemble"], 1), gen_ens)[: cfg["n_ensemble"]]
    fig = EnsembleIntegrator(x_fig, dt) if len(x_fig) else None
    ens = EnsembleIntegrator(x_ens, dt, record_positions=False) if len(x_ens) else None

    def feed(s):
        snap = velocity_snapshot(s, params)
        for integ in (fig, ens):
            if integ is not None:
                integ.feed(snap)

    feed(state)
    for k in range(n_post + 1):
        if k > 0:
            state = stepper(state, k * dt)
            feed(state)
        if (k + n_pre) % frame_every == 0:
            frame(state, f"frame_{len(rec.frames):02d}")
        if (k + n_pre) % st_every == 0:
            row(state)
    screen = state
    t_end = n_post * dt

    rec.spacetime = DensityFrame("spacetime", 0.0, [np.array(st_times), sc.from_length(z[crop])], np.array(st_rows))

    # fringe spacing from the relative phase of the two slit waves
    env_exact = Environment(params, StepConfig(t_end))
    exact = SplitStepper(grid, env_exact, check=False)
    wa = exact(ComplexField(grid, psi_a)).values
    wb = exact(ComplexField(grid, psi_b)).values
    q = wa * np.conj(wb)
    i0 = n // 2
    dphi = np.imag(np.conj(q[i0]) * (q[i0 + 1] - q[i0 - 1])) / (2 * grid.spacing[0] * abs(q[i0]) ** 2)
    spacing_phase = sc.from_length(2 * math.pi / abs(dphi))
    lam = de_broglie_wavelength(m, v, CODATA_HBAR)
    oracle = fringe_spacing(lam, sep, cfg["screen_distance"])
    rec.stat("wavelength", float(lam))
    rec.stat("fringe_spacing_oracle", float(oracle))
    rec.stat("fringe_spacing", float(spacing_phase))
    rec.stat("fringe_spacing_rel_error", float(abs(spacing_phase - oracle) / oracle))

    rho = screen.density()
    peaks, _ = find_peaks(rho)
    top = np.sort(peaks[np.argsort(np.abs(z[peaks]))[:5]])
    if top.size >= 2:
        rec.stat("fringe_spacing_peaks", float(sc.from_length(np.mean(np.diff(z[top])))))
    rec.stat("central_maximum", bool(rho[i0] >= rho[i0 - 1] and rho[i0] >= rho[i0 + 1]))

    if fig is not None:
        res = fig.result()
        zpos = res.positions[:, :, 0]
        crossed = np.any(np.sign(zpos) != np.sign(zpos[0])[None, :], axis=0)
        rec.stat("figure_axis_crossings", int(np.count_nonzero(crossed)))
        rec.stat("figure_aborted", int(np.count_nonzero(res.aborted)))
        for i in range(res.size):
            tr = res.trajectory(i)
            tr.times = sc.from_time(tr.times)
            tr.positions = sc.from_length(tr.positions)
            rec.trajectories.append(tr)
    if ens is not None:
        res = ens.result()
        live = ~res.aborted
        final = res.final[:, 0]
        rec.stat("ensemble_size", int(res.size))
        rec.stat("ensemble_aborted", int(np.count_nonzero(res.aborted)))
        flips = np.count_nonzero(np.sign(final[live]) != np.sign(x_ens[live]))
        rec.stat("ensemble_side_changes", int(flips))
        stat, p, _ = _equal_probability_chi2(final[live], grid, rho, cfg["chi2_bins"])
        rec.stat("equivariance_chi2", stat)
        rec.stat("equivariance_p_value", p)
        up = np.mean(x_ens > 0)
        rec.stat("upper_slit_fraction", float(up), math.sqrt(up * (1 - up) / len(x_ens)))
    rec.stat("screen_norm2", float(np.sum(rho) * grid.spacing[0]))
    return rec


SPEC = register(ScenarioSpec("c60_double_slit", "C60 double slit: frames, trajectories, fringe spacing", PARAMS, run_c60))
