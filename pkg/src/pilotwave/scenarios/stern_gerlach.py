"""Stern-Gerlach deflection of silver atoms, vertical coordinate only.

The atom crosses the magnet (field ``Bz = B0 - B'0 z`` on the beam axis) for
``magnet_length / velocity`` seconds; the Pauli equation is stepped on a
fine grid that resolves the transverse momentum the field imparts.  After
the magnet each spin component is a narrow spectral line, so it is stored
as a carrier times a slowly varying envelope and flown to the plate exactly
on a coarse grid.  Bohmian trajectories with their spin angles are
integrated through both stages.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.fft as sfft

from ..errors import ResolutionError
from ..fields import CODATA_HBAR, CODATA_MU_B, Grid, PhysicalParams, Scaling, gaussian_packet, polarized_spinor
from ..madelung import EnsembleIntegrator, envelope_snapshot, sample_initial_positions, velocity_snapshot
from ..oracles import SGParams, postmagnet_spinor, sg_offsets
from ..propagators import (
    Environment,
    MagneticField,
    SplitStepper,
    StepConfig,
    demodulate,
    embed_envelope,
    free_flight,
)
from ..rng import stream
from .base import DensityFrame, Param, RunRecord, ScenarioSpec, count, positive, register

PARAMS = (
    positive("mass", 1.8e-25, "atom mass", "kg"),
    positive("velocity", 500.0, "beam velocity", "m/s"),
    positive("sigma0", 1e-4, "initial packet width", "m"),
    Param("theta0", math.pi / 3, "initial polar angle of the spin", lo=0.0, hi=math.pi),
    Param("phi0", 0.0, "initial azimuth of the spin", lo=-math.pi, hi=math.pi),
    Param("b0", 5.0, "field on the axis", unit="T"),
    Param("gradient", 1e3, "field gradient", unit="T/m"),
    positive("magnet_length", 1e-2, "length of the magnet", "m"),
    positive("free_distance", 0.2, "magnet-to-plate distance", "m"),
    positive("mu_b", CODATA_MU_B, "Bohr magneton", "J/T"),
    count("n_fine", 2**20, "grid points while in the magnet", lo=1024),
    positive("fine_half_width", 8e-4, "half width of the magnet-stage grid", "m"),
    count("window_steps", 10, "split steps inside the magnet"),
    count("envelope_stride", 512, "decimation from the fine grid to the envelope grid"),
    positive("flight_half_width", 1.6e-3, "half width of the flight grid", "m"),
    count("flight_snapshots", 400, "velocity snapshots during the flight"),
    count("n_trajectories", 24, "trajectories kept for plotting", lo=0),
    count("n_ensemble", 10000, "trajectories for the statistics", lo=0),
    Param("straight_threshold", 0.999, "|cos theta| counted as straightened", lo=0.0, hi=1.0),
)


def _component_moments(grid: Grid, comp, hbar, mass):
    w = np.abs(comp) ** 2
    tot = w.sum()
    if tot == 0:
        return 0.0, 0.0, 0.0
    z = grid.axis(0)
    k = grid.wavenumbers(0)
    d = sfft.ifft(1j * k * sfft.fft(comp))
    mom = np.sum(np.imag(np.conj(comp) * d)) / tot
    return float(tot * grid.spacing[0]), float(np.sum(z * w) / tot), float(hbar / mass * mom)


def run_stern_gerlach(cfg) -> RunRecord:
    rec = RunRecord(cfg)
    m, v = cfg["mass"], cfg["velocity"]
    sc = Scaling(length=1e-4, time=1e-4, mass=m)
    params = sc.params(PhysicalParams(mass=m, mu_b=cfg["mu_b"]))
    hb, ms = params.hbar, params.mass

    window = cfg["magnet_length"] / v
    t_plate = cfg["free_distance"] / v
    tw = sc.to_time(window)
    nf = cfg["n_fine"]
    fine = Grid.centered(nf, 2 * sc.to_length(cfg["fine_half_width"]) / nf)
    psi0 = gaussian_packet(fine, 0.0, sc.to_length(cfg["sigma0"]), 0.0, params)
    state = polarized_spinor(psi0, cfg["theta0"], cfg["phi0"])

    field = MagneticField(cfg["b0"], cfg["gradient"] * sc.length, t_on=0.0, t_off=tw)
    # each spin component leaves with momentum +-kick; it must stay below Nyquist
    kick = params.mu_b * field.gradient * tw / hb
    kmax = kick + 3 / sc.to_length(cfg["sigma0"])
    if kmax >= math.pi / fine.spacing[0]:
        raise ResolutionError(f"magnet kick {kmax:g} not resolved by spacing {fine.spacing[0]:g}; raise n_fine")
    dt = tw / cfg["window_steps"]
    stepper = SplitStepper(fine, Environment(params, StepConfig(dt), bfields=(field,)))

    gen_fig = stream(cfg.seed, "stern_gerlach/figure_trajectories")
    gen_ens = stream(cfg.seed, "stern_gerlach/ensemble")
    x_fig = sample_initial_positions(state, max(cfg["n_trajectories"], 1), gen_fig)[: cfg["n_trajectories"]]
    x_ens = sample_initial_positions(state, max(cfg["n_ensemble"], 1), gen_ens)[: cfg["n_ensemble"]]
    integ = [EnsembleIntegrator(x, dt) for x in (x_fig, x_ens) if len(x)]
    has_fig = len(x_fig) > 0

    def feed(snap):
        for it in integ:
            it.feed(snap)

    feed(velocity_snapshot(state, params, spin=True))
    crop = np.abs(fine.axis(0)) <= sc.to_length(cfg["fine_half_width"])
    rec.frames.append(DensityFrame("entrance", 0.0, [sc.from_length(fine.axis(0)[crop])],
                                   state.density()[crop] / sc.length))
    for k in range(1, cfg["window_steps"] + 1):
        state = stepper(state, k * dt)
        feed(velocity_snapshot(state, params, spin=True))

    # moments right after the magnet
    w_up, z_up, u_up = _component_moments(fine, state.values[0], hb, ms)
    w_dn, z_dn, u_dn = _component_moments(fine, state.values[1], hb, ms)
    oracle = SGParams(mass=m, sigma0=cfg["sigma0"], gradient=cfg["gradient"], window=window,
                      mu_b=cfg["mu_b"], hbar=CODATA_HBAR)
    zd_o, u_o = sg_offsets(oracle)
    if w_up > 0 and w_dn > 0:
        zd = 0.5 * (z_up - z_dn)
        uu = 0.5 * (u_up - u_dn)
    elif w_up > 0:
        zd, uu = z_up, u_up
    else:
        zd, uu = -z_dn, -u_dn
    zd_si, u_si = float(sc.from_length(zd)), float(sc.from_velocity(uu))
    rec.stat("z_delta", zd_si)
    rec.stat("u", u_si)
    rec.stat("z_delta_oracle", zd_o)
    rec.stat("u_oracle", u_o)
    rec.stat("z_delta_rel_error", abs(zd_si - zd_o) / zd_o)
    rec.stat("u_rel_error", abs(u_si - u_o) / u_o)
    rec.stat("up_weight_exit", w_up)
    rec.stat("exit_norm2", w_up + w_dn)
    rec.frames.append(DensityFrame("exit", window, [sc.from_length(fine.axis(0)[crop])],
                                   state.density()[crop] / sc.length))

    # carrier-envelope flight
    stride = cfg["envelope_stride"]
    envs = [demodulate(c, stride) for c in state.components]
    h = envs[0].grid.spacing[0]
    nflight = int(round(2 * sc.to_length(cfg["flight_half_width"]) / h))
    nflight += nflight % 2
    pad = (nflight - envs[0].grid.n[0]) // 2
    if pad < 0:
        raise ValueError("flight grid must be wider than the magnet-stage grid")
    flight = Grid(nflight, h, envs[0].grid.origin[0] - pad * h)
    envs = [embed_envelope(e, flight) for e in envs]
    del state

    tp = sc.to_time(t_plate)
    nsnap = cfg["flight_snapshots"]
    rows, row_t = [], []
    plate = envs
    for j in range(1, nsnap + 1):
        tau = tp * j / nsnap
        cur = [free_flight(e, tau, ms, hb) for e in envs]
        feed(envelope_snapshot(cur, ms, hb, spin=True))
        if j % 4 == 0 or j == nsnap:
            rows.append(sum(np.abs(c.values) ** 2 for c in cur) / sc.length)
            row_t.append(float(sc.from_time(cur[0].time)))
        plate = cur
    zf = flight.axis(0)
    rec.spacetime = DensityFrame("spacetime", 0.0, [np.array(row_t), sc.from_length(zf)], np.array(rows))
    rho_plate = sum(np.abs(c.values) ** 2 for c in plate)
    rec.frames.append(DensityFrame("plate", window + t_plate, [sc.from_length(zf)], rho_plate / sc.length))

    # plate statistics against the two-packet closed form
    mom = [_component_moments(flight, c.values, hb, ms) for c in plate]
    if mom[0][0] > 0 and mom[1][0] > 0:
        sep = sc.from_length(mom[0][1] - mom[1][1])
        sep_o = 2 * (zd_o + u_o * t_plate)
        rec.stat("plate_separation", float(sep))
        rec.stat("plate_separation_oracle", float(sep_o))
        rec.stat("plate_separation_rel_error", float(abs(sep - sep_o) / sep_o))
    ref_p = SGParams(mass=ms, sigma0=sc.to_length(cfg["sigma0"]), gradient=field.gradient, window=tw,
                     mu_b=params.mu_b, hbar=hb)
    ref = postmagnet_spinor(cfg["theta0"], cfg["phi0"], tp, flight, ref_p)
    rec.stat("closed_form_l1_deviation", float(np.sum(np.abs(rho_plate - ref.density())) * h))
    rec.stat("up_weight_plate", mom[0][0])

    results = [it.result() for it in integ]
    if has_fig:
        res = results.pop(0)
        for i in range(res.size):
            tr = res.trajectory(i)
            tr.times = sc.from_time(tr.times)
            tr.positions = sc.from_length(tr.positions)
            rec.trajectories.append(tr)
    if results:
        res = results[0]
        live = ~res.aborted
        n = int(np.count_nonzero(live))
        zfin = res.final[live, 0]
        up = float(np.mean(zfin > 0)) if n else float("nan")
        rec.stat("ensemble_size", int(res.size))
        rec.stat("ensemble_aborted", int(res.size - n))
        rec.stat("up_fraction", up, math.sqrt(up * (1 - up) / n) if n else None)
        rec.stat("up_fraction_oracle", math.cos(cfg["theta0"] / 2) ** 2)
        cz = np.cos(res.theta[-1, live])
        thr = cfg["straight_threshold"]
        rec.stat("min_abs_cos_theta", float(np.min(np.abs(cz))) if n else float("nan"))
        rec.stat("not_straightened", int(np.count_nonzero(np.abs(cz) <= thr)))
        # Born weight of the plate region where the local spin is not yet straightened
        pu, pd = (np.abs(c.values) ** 2 for c in plate)
        tot = pu + pd
        cz_field = np.divide(pu - pd, tot, out=np.ones_like(tot), where=tot > 0)
        p_bent = float(np.sum(tot[np.abs(cz_field) <= thr]) * h)
        rec.stat("not_straightened_expected", p_bent * n)
        rec.stat("spin_position_mismatch", int(np.count_nonzero(np.sign(cz) != np.sign(zfin))))
    return rec


SPEC = register(ScenarioSpec("stern_gerlach", "Stern-Gerlach spin sorting with Bohmian trajectories", PARAMS, run_stern_gerlach))
