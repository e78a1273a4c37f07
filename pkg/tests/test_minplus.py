import math

import numpy as np
import pytest

from pilotwave import CausticError, CoverageError
from pilotwave.minplus import (
    ClassicalAction,
    InitialData,
    characteristics,
    hj_velocity_and_density,
    minplus_action,
    minplus_transform,
)


def hopf_lax_quadratic(a, b, act: ClassicalAction, x, t):
    """Exact ``min_y [a y^2/2 + b y + S_cl(x, t; y)]`` for the free and gravity actions."""
    m = act.mass
    # S_cl is m (x-y)^2 / 2t plus, for gravity, a term linear in y
    lin = -0.5 * m * act.g * t if act.kind == "linear_gravity" else 0.0
    y = (m * x / t - b - lin) / (a + m / t)
    return a * y * y / 2 + b * y + act(x, t, y), y


@pytest.mark.parametrize("kind", ["free", "linear_gravity"])
def test_minplus_matches_hopf_lax_for_quadratic_data(kind):
    act = ClassicalAction(kind, mass=1.5, g=0.8)
    y = np.linspace(-30, 30, 6001)
    a, b = 0.4, -0.3
    x = np.linspace(-5, 5, 101)
    s, arg = minplus_transform(y, a * y * y / 2 + b * y, act, x, 1.3)
    want, ywant = hopf_lax_quadratic(a, b, act, x, 1.3)
    assert np.max(np.abs(s - want)) < 1e-10
    assert np.max(np.abs(arg - ywant)) < 1e-9


def test_harmonic_action_matches_flow():
    act = ClassicalAction("harmonic", mass=1.0, omega=1.0)
    # the minimizer of S0 + S_cl is the start of the classical path reaching x
    y = np.linspace(-20, 20, 8001)
    data_v = 0.5
    s0 = data_v * y
    x = np.array([0.3, 1.0])
    _, arg = minplus_transform(y, s0, act, x, 0.7)
    assert np.allclose(act.flow(arg, data_v, 0.7), x, atol=1e-9)
    with pytest.raises(CausticError):
        act(0.0, math.pi, 0.0)


def test_dynamic_programming_composition():
    act = ClassicalAction("linear_gravity", mass=1.0, g=1.0)
    y = np.linspace(-25, 25, 20001)
    s0 = np.sqrt(1 + y * y)
    x = np.linspace(-3, 3, 31)
    direct = minplus_transform(y, s0, act, x, 1.0)[0]
    z = np.linspace(-20, 20, 16001)
    mid = minplus_transform(y, s0, act, z, 0.4)[0]
    composed = minplus_transform(z, mid, act, x, 0.6)[0]
    assert np.max(np.abs(direct - composed)) < 1e-6


def test_hamilton_jacobi_residual_is_second_order():
    act = ClassicalAction("linear_gravity", mass=1.0, g=1.0)
    y = np.linspace(-25, 25, 50001)
    s0 = np.sqrt(1 + y * y)
    x = np.linspace(-1, 1, 9)
    t = 0.8

    def residual(d):
        st = (minplus_transform(y, s0, act, x, t + d)[0] - minplus_transform(y, s0, act, x, t - d)[0]) / (2 * d)
        sx = (minplus_transform(y, s0, act, x + d, t)[0] - minplus_transform(y, s0, act, x - d, t)[0]) / (2 * d)
        return np.max(np.abs(st + sx * sx / 2 + act.potential(x)))

    r1, r2 = residual(0.04), residual(0.02)
    assert r2 < r1
    assert r1 / r2 > 3.0


def test_boundary_minimizer_raises_coverage_error():
    act = ClassicalAction("free", mass=1.0)
    y = np.linspace(-1, 1, 201)
    with pytest.raises(CoverageError):
        minplus_transform(y, 5 * y, act, 0.0, 1.0)


def test_initial_data_validation():
    x = np.linspace(-10, 10, 2001)
    with pytest.raises(ValueError):
        InitialData(x, 2 * np.exp(-x * x / 2) / math.sqrt(2 * math.pi), 0 * x)
    d = InitialData.gaussian(x, 0.0, 1.0, 2.0, velocity=0.5)
    assert np.allclose(d.velocity0(2.0), 0.5)


def test_transport_and_velocity_free_translation():
    act = ClassicalAction("free", mass=1.0)
    x = np.linspace(-12, 12, 4801)
    d = InitialData.gaussian(x, 0.0, 1.0, 1.0, velocity=1.0)
    xt, jac = characteristics(d, act, 2.0)
    assert np.allclose(xt, x + 2.0) and np.allclose(jac, 1.0)
    xs = np.linspace(-2, 6, 81)
    _, v, rho = hj_velocity_and_density(d, act, 2.0, xs)
    assert np.allclose(v[~np.isnan(v)], 1.0, atol=1e-8)
    assert rho[np.argmax(rho)] == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-4)
    # S = m v x - m v^2 t / 2
    assert minplus_action(d, act, 2.0, 2.0) == pytest.approx(2.0 - 1.0, abs=1e-8)


def test_focusing_data_raises_caustic_error():
    act = ClassicalAction("free", mass=1.0)
    x = np.linspace(-10, 10, 2001)
    d = InitialData.gaussian(x, 0.0, 1.0, 1.0, curvature=-1.0)  # focuses at t = 1
    characteristics(d, act, 0.5)
    with pytest.raises(CausticError):
        characteristics(d, act, 1.5)
