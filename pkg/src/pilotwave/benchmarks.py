"""Reference computations with known answers.

Each function runs one self-contained numerical check against a closed form
and returns a small record of the measured errors, so that tests, demos and
users can all call the same code.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .fields import Grid, PhysicalParams, Scaling, gaussian_packet, norm2
from .madelung import EnsembleIntegrator, sample_initial_positions, velocity_snapshot
from .minplus import ClassicalAction, InitialData, SweepReport, hbar_sweep_compare
from .oracles import CoherentState, GaussianGravityPacket, coherent_state_field, gravity_packet_trajectory
from .propagators import Environment, Potential, SplitStepper, StepConfig, evolve

SILVER_MASS = 1.8e-25


@dataclass
class UnitarityResult:
    norm_drift: float
    seconds: float
    steps: int
    n_points: int


def unitarity(n_points=4096, steps=10_000, dt_si=1e-6, sigma0_si=1e-4, g_si=9.81):
    """Norm drift of a falling silver-atom Gaussian after ``steps`` split steps.

    Scaled units: lengths in 1e-4 m, times in 1e-4 s, masses in the atom mass.
    """
    sc = Scaling(length=1e-4, time=1e-4, mass=SILVER_MASS)
    params = sc.params(PhysicalParams(mass=SILVER_MASS, g=(g_si,)))
    sigma = sc.to_length(sigma0_si)
    grid = Grid.centered(n_points, 32 * sigma / n_points)
    psi = gaussian_packet(grid, 0.0, sigma, 0.0, params)
    env = Environment(params, StepConfig(sc.to_time(dt_si)), Potential.linear_gravity())
    stepper = SplitStepper(grid, env)
    n0 = norm2(psi)
    vals = psi.values
    t0 = time.perf_counter()
    for k in range(steps):
        vals = stepper.step_values(vals, k * env.cfg.dt)
    secs = time.perf_counter() - t0
    drift = abs(norm2(psi.with_values(vals)) - n0)
    return UnitarityResult(float(drift), secs, steps, n_points)


@dataclass
class TrajectoryOracleResult:
    max_rel_error: float
    n_starts: int
    aborted: int
    times: np.ndarray
    numeric: np.ndarray
    closed_form: np.ndarray


def gravity_trajectories(n_starts=100, n_points=256, spacing=0.1, t_final=2.0, dt=0.005,
                         sigma0=(1.0, 1.0), v0=(0.5, 1.0), g=1.0, seed=0):
    """Bohmian trajectories of a falling 2D Gaussian against the closed form.

    Dimensionless (``hbar = m = 1``); gravity acts along axis 1.  The error
    of each position is measured relative to ``max(|X_closed|, sigma0)`` on
    the same axis, so starts near the origin are not divided by zero.
    """
    params = PhysicalParams(mass=1.0, hbar=1.0, g=(0.0, g))
    grid = Grid.centered((n_points, n_points), spacing)
    psi = gaussian_packet(grid, (0.0, 0.0), sigma0, v0, params)
    env = Environment(params, StepConfig(dt), Potential.linear_gravity())
    x0 = sample_initial_positions(psi, n_starts, seed, label="gravity_trajectories")
    integ = EnsembleIntegrator(x0, dt)
    evolve(psi, env, t_final, snapshot_every=1, keep_snapshots=False,
           observer=lambda s: integ.feed(velocity_snapshot(s, params)))
    res = integ.result()
    cf = np.empty_like(res.positions)
    for i in range(n_starts):
        p = GaussianGravityPacket(sigma0, (0.0, 0.0), tuple(x0[i]), v0, g, 1.0, 1.0, gravity_axis=1)
        cf[:, i, :] = gravity_packet_trajectory(p, res.times).T
    scale = np.maximum(np.abs(cf), np.asarray(sigma0)[None, None, :])
    err = np.abs(res.positions - cf) / scale
    live = ~res.aborted
    return TrajectoryOracleResult(float(np.max(err[:, live])), n_starts, int(np.count_nonzero(res.aborted)),
                                  res.times, res.positions, cf)


@dataclass
class CoherentResult:
    modulus_error: float
    center_rel_error: float
    steps: int


def coherent_period(n_points=256, spacing=0.1, x0=4.0, steps=10_000, check_every=100):
    """Evolve a coherent state for one period in the harmonic well.

    Returns the max modulus difference after the full period and the max
    relative deviation of ``<x>`` from ``x0 cos(omega t)`` at the checkpoints.
    """
    c = CoherentState(omega=1.0, mass=1.0, x0=x0, hbar=1.0)
    grid = Grid.centered(n_points, spacing)
    psi0 = coherent_state_field(c, 0.0, grid)
    params = PhysicalParams(mass=1.0, hbar=1.0)
    env = Environment(params, StepConfig(c.period / steps), Potential.harmonic(c.omega))
    x = grid.axis(0)
    worst = [0.0]

    def check(s):
        rho = s.density()
        mean = np.sum(x * rho) / np.sum(rho)
        worst[0] = max(worst[0], float(abs(mean - c.position(s.time)) / abs(x0)))

    final, _ = evolve(psi0, env, c.period, snapshot_every=check_every, observer=check, keep_snapshots=False)
    mod = float(np.max(np.abs(np.abs(final.values) - np.abs(psi0.values))))
    return CoherentResult(mod, worst[0], steps)


def strang_order(dts=(0.04, 0.02, 0.01), t_final=1.0, n_points=256, spacing=0.1, x0=3.0):
    """Observed convergence order of the split step on the coherent state.

    Returns ``(errors, orders)``; the error is the max modulus difference at
    ``t_final`` against the exact coherent state.
    """
    c = CoherentState(omega=1.0, mass=1.0, x0=x0, hbar=1.0)
    grid = Grid.centered(n_points, spacing)
    psi0 = coherent_state_field(c, 0.0, grid)
    exact = np.abs(coherent_state_field(c, t_final, grid).values)
    params = PhysicalParams(mass=1.0, hbar=1.0)
    errs = []
    for dt in dts:
        env = Environment(params, StepConfig(dt), Potential.harmonic(c.omega))
        final, _ = evolve(psi0, env, t_final)
        errs.append(float(np.max(np.abs(np.abs(final.values) - exact))))
    orders = [math.log(a / b) / math.log(d1 / d2) for a, b, d1, d2 in zip(errs, errs[1:], dts, dts[1:])]
    return errs, orders


def semiclassical_sweep(kind="free", hbar0=1.0, levels=5, t=1.0, n_points=4096, spacing=0.01,
                        steps=200, mask_fraction=1e-3) -> SweepReport:
    """Quantum-classical distance along ``hbar0 / 2^k`` for a fixed initial state.

    The initial density is a unit Gaussian with a diverging action
    ``S0 = x + x^2 / 4`` (so the classical flow never focuses).
    """
    act = ClassicalAction(kind, 1.0, g=1.0 if kind == "linear_gravity" else 0.0)
    xs = np.linspace(-12, 12, 4801)
    data = InitialData.gaussian(xs, 0.0, 1.0, 1.0, velocity=1.0, curvature=0.5)
    grid = Grid.centered(n_points, spacing)
    hbars = [hbar0 / 2**k for k in range(levels)]
    return hbar_sweep_compare(data, act, hbars, t, grid, steps=steps, mask_fraction=mask_fraction)


__all__ = [
    "UnitarityResult",
    "unitarity",
    "TrajectoryOracleResult",
    "gravity_trajectories",
    "CoherentResult",
    "coherent_period",
    "strang_order",
    "semiclassical_sweep",
]
