"""Sequential spin measurements on a spatially extended singlet pair.

Configuration space is the plane ``(z_A, z_B)`` and the state is a
4-component spinor ordered ``(++, +-, -+, --)``.  Particle A crosses its
magnet first (analyzer angle ``a`` realized as a rotation of A's spin basis
followed by the standard z-gradient field), flies freely, then B crosses
its magnet (angle ``b``).  Each sampled configuration is carried along by
the Bohmian velocity field; the outcome of each particle is the sign of its
final coordinate.  Runs in scaled units with ``hbar = m = mu_B = 1``.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ResolutionError
from ..fields import Grid, PhysicalParams, SpinorField
from ..madelung import EnsembleIntegrator, sample_initial_positions, velocity_snapshot
from ..oracles import chsh, sigma_hbar, singlet_correlation
from ..propagators import Environment, MagneticField, SplitStepper, StepConfig, rotate_spin_basis
from ..rng import stream
from .base import DensityFrame, Param, RunRecord, ScenarioSpec, count, positive, register

PARAMS = (
    positive("hbar", 1.0, "reduced Planck constant (scaled)"),
    positive("mass", 1.0, "mass of each particle (scaled)"),
    positive("mu_b", 1.0, "magnetic moment (scaled)"),
    positive("sigma0", 2.0, "width of the spatial profile f"),
    Param("b0", 5.0, "field on the axis (scaled)"),
    positive("gradient", 12.0, "field gradient (scaled)"),
    positive("window", 0.5, "time spent inside each magnet"),
    positive("t_b", 2.5, "time at which B enters its magnet"),
    positive("t_final", 6.0, "time at which both outcomes are read"),
    count("n_points", 384, "grid points per axis", lo=32),
    positive("half_width", 48.0, "half width of the grid"),
    positive("dt_field", 0.01, "time step inside a magnet"),
    positive("dt_free", 0.05, "time step in free flight"),
    Param("sweep_b", [0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4], "B angles swept against a = 0"),
    Param("chsh_angles", [0.0, math.pi / 2, math.pi / 4, 3 * math.pi / 4], "a, a', b, b' for CHSH"),
    count("n_ensemble", 10000, "sampled configurations per angle pair"),
    count("n_trajectories", 8, "trajectories kept for plotting", lo=0),
)


def _deg(x):
    return f"{math.degrees(x):g}"


def _singlet(grid: Grid, sigma0):
    za, zb = grid.mesh()
    f = lambda z: (2 * math.pi * sigma0**2) ** -0.25 * np.exp(-(z**2) / (4 * sigma0**2))  # noqa: E731
    prof = f(za) * f(zb) / math.sqrt(2)
    zero = np.zeros_like(prof)
    return SpinorField(grid, np.stack([zero, prof, -prof, zero]))


def _phase(state, stepper, t_end, dt, feed):
    n = int(round((t_end - state.time) / dt))
    t0 = state.time
    for k in range(1, n + 1):
        state = stepper(state, t0 + k * dt)
        feed(state)
    return state


def _run_pair(cfg, a, b, record_extra=False):
    n = cfg["n_points"]
    grid = Grid.centered((n, n), 2 * cfg["half_width"] / n)
    params = PhysicalParams(mass=cfg["mass"], hbar=cfg["hbar"], mu_b=cfg["mu_b"])
    tw, tb, tf = cfg["window"], cfg["t_b"], cfg["t_final"]
    if not (tw <= tb and tb + tw <= tf):
        raise ValueError("need window <= t_b and t_b + window <= t_final")
    # the magnet kick plus the packet's momentum spread must stay below Nyquist
    kick = params.mu_b * cfg["gradient"] * tw / params.hbar
    kmax = kick + 6 / (2 * cfg["sigma0"])
    if kmax >= math.pi / grid.spacing[0]:
        raise ResolutionError(f"momentum {kmax:g} not resolved by spacing {grid.spacing[0]:g}")
    state = _singlet(grid, cfg["sigma0"])
    label = f"epr_b/ensemble/{a:.12g}/{b:.12g}"
    x0 = sample_initial_positions(state, cfg["n_ensemble"], stream(cfg.seed, label))
    integ = EnsembleIntegrator(x0, cfg["dt_field"], record_positions=record_extra)

    dz = grid.spacing[1]
    zb = grid.axis(1)
    marg_dev = [0.0]

    def feed(s):
        integ.feed(velocity_snapshot(s, params))
        if record_extra and s.time <= tb + 1e-12:
            # B's marginal while A is measured versus an unentangled free packet
            rho_b = s.density().sum(axis=0) * grid.spacing[0]
            sg = float(sigma_hbar(cfg["sigma0"], s.time, params.mass, params.hbar))
            free = np.exp(-(zb**2) / (2 * sg * sg)) / math.sqrt(2 * math.pi * sg * sg)
            marg_dev[0] = max(marg_dev[0], float(np.sum(np.abs(rho_b - free)) * dz))

    fa = MagneticField(cfg["b0"], cfg["gradient"], 0.0, tw, z_axis=0, particle=0)
    fb = MagneticField(cfg["b0"], cfg["gradient"], tb, tb + tw, z_axis=1, particle=1)
    free = StepConfig(cfg["dt_free"])
    inside = StepConfig(cfg["dt_field"])
    step_a = SplitStepper(grid, Environment(params, inside, bfields=(fa,)))
    step_b = SplitStepper(grid, Environment(params, inside, bfields=(fb,)))
    step_free = SplitStepper(grid, Environment(params, free))

    state = rotate_spin_basis(state, a, particle=0)
    feed(state)
    state = _phase(state, step_a, tw, cfg["dt_field"], feed)
    state = _phase(state, step_free, tb, cfg["dt_free"], feed)
    mid = state
    state = rotate_spin_basis(state, b, particle=1)
    state = _phase(state, step_b, tb + tw, cfg["dt_field"], feed)
    state = _phase(state, step_free, tf, cfg["dt_free"], feed)

    res = integ.result()
    live = ~res.aborted
    fin = res.final[live]
    sa, sb = np.sign(fin[:, 0]), np.sign(fin[:, 1])
    out = {
        "E": float(np.mean(sa * sb)),
        "n": int(live.sum()),
        "aborted": int(res.size - live.sum()),
        "a_up": float(np.mean(sa > 0)),
        "all_opposite": bool(np.all(sa == -sb)),
        "norm2": float(np.sum(state.density()) * grid.cell_volume),
    }
    if record_extra:
        out["b_marginal_l1"] = marg_dev[0]
        out["frames"] = [
            DensityFrame("after_a", mid.time, grid.axes, mid.density()),
            DensityFrame("final", state.time, grid.axes, state.density()),
        ]
        k = min(cfg["n_trajectories"], res.size)
        out["trajectories"] = [res.trajectory(i) for i in range(k)]
    return out


def run_epr_b(cfg) -> RunRecord:
    rec = RunRecord(cfg)
    a0, a1, b0, b1 = cfg["chsh_angles"]
    pairs = [(0.0, b) for b in cfg["sweep_b"]] + [(a0, b0), (a0, b1), (a1, b0), (a1, b1)]
    done = {}
    first = True
    for a, b in pairs:
        if (a, b) in done:
            continue
        r = _run_pair(cfg, a, b, record_extra=first)
        if first:
            rec.frames.extend(r.pop("frames"))
            rec.trajectories.extend(r.pop("trajectories"))
            rec.stat("b_marginal_l1_during_a", r.pop("b_marginal_l1"))
            first = False
        done[(a, b)] = r
        key = f"a{_deg(a)}_b{_deg(b)}"
        sig = math.sqrt(max(1 - r["E"] ** 2, 0.0) / r["n"])
        rec.stat(f"E_{key}", r["E"], sig)
        rec.stat(f"E_oracle_{key}", singlet_correlation(a, b))
        pa = r["a_up"]
        rec.stat(f"a_up_fraction_{key}", pa, math.sqrt(pa * (1 - pa) / r["n"]))
        rec.stat(f"aborted_{key}", r["aborted"])
        rec.stat(f"norm2_{key}", r["norm2"])
        if math.isclose(a, b, abs_tol=1e-12):
            rec.stat(f"all_opposite_{key}", r["all_opposite"])
    es = [done[p]["E"] for p in ((a0, b0), (a0, b1), (a1, b0), (a1, b1))]
    ns = [done[p]["n"] for p in ((a0, b0), (a0, b1), (a1, b0), (a1, b1))]
    s = chsh(*es)
    sig = math.sqrt(sum((1 - e * e) / n for e, n in zip(es, ns)))
    rec.stat("chsh_S", s, sig)
    rec.stat("chsh_abs_S", abs(s), sig)
    rec.stat("chsh_oracle", abs(chsh(*(singlet_correlation(*p) for p in ((a0, b0), (a0, b1), (a1, b0), (a1, b1))))))
    return rec


SPEC = register(ScenarioSpec("epr_b", "EPR-B pair: sequential measurements, correlations, CHSH", PARAMS, run_epr_b))
