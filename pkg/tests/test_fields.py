import math

import numpy as np
import pytest

from pilotwave import (
    ComplexField,
    DomainError,
    Grid,
    NormalizationError,
    PhysicalParams,
    ResolutionError,
    Scaling,
    SpinorField,
    expectation_position,
    gaussian_packet,
    norm2,
)
from pilotwave.fields import fourier_interpolate, polarized_spinor
from pilotwave.rng import RunRNG, stream


def test_centered_grid_puts_center_on_a_point():
    g = Grid.centered(64, 0.5, center=3.0)
    assert g.axis(0)[32] == pytest.approx(3.0)
    assert g.lower[0] == pytest.approx(3.0 - 16.0)
    assert g.cell_volume == 0.5


def test_2d_grid_shapes():
    g = Grid.centered((16, 32), (0.1, 0.2))
    x, z = g.mesh()
    assert g.shape == (16, 32) and x.shape == (16, 32)
    assert np.all(np.diff(z[0]) > 0)
    assert g.cell_volume == pytest.approx(0.02)


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        Grid.centered(4, 0.1)
    with pytest.raises(ValueError):
        Grid.centered(16, -1.0)
    with pytest.raises(ValueError):
        Grid((8, 8, 8), 1.0, 0.0)


def test_gaussian_packet_is_normalized_with_expected_peak():
    g = Grid.centered(1024, 0.05)
    p = PhysicalParams(mass=1.0, hbar=1.0)
    psi = gaussian_packet(g, 1.0, 2.0, 0.3, p)
    assert norm2(psi) == pytest.approx(1.0, abs=1e-12)
    assert psi.density().max() == pytest.approx(1 / math.sqrt(2 * math.pi * 4.0), rel=1e-3)
    assert expectation_position(psi) == pytest.approx(1.0, abs=1e-10)


def test_gaussian_packet_resolution_and_domain_errors():
    p = PhysicalParams(mass=1.0, hbar=1.0)
    with pytest.raises(ResolutionError):
        gaussian_packet(Grid.centered(64, 1.0), 0.0, 1.0, 0.0, p)
    with pytest.raises(ResolutionError):
        gaussian_packet(Grid.centered(1024, 0.1), 0.0, 2.0, 20.0, p)
    with pytest.raises(DomainError):
        gaussian_packet(Grid.centered(64, 0.1), 2.5, 1.0, 0.0, p)


def test_expectation_requires_normalization():
    g = Grid.centered(256, 0.1)
    psi = gaussian_packet(g, 0.0, 1.0, 0.0, PhysicalParams(mass=1.0, hbar=1.0)) * 2.0
    with pytest.raises(NormalizationError):
        expectation_position(psi)


def test_spinor_density_and_polarization():
    g = Grid.centered(256, 0.1)
    f = gaussian_packet(g, 0.0, 1.0, 0.0, PhysicalParams(mass=1.0, hbar=1.0))
    s = polarized_spinor(f, math.pi / 3, 0.4)
    up = norm2(ComplexField(g, s.values[0]))
    assert up == pytest.approx(math.cos(math.pi / 6) ** 2, rel=1e-12)
    assert norm2(s) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        SpinorField(g, np.zeros((3, 256)))


def test_physical_params_axis_masses_and_gravity():
    p = PhysicalParams(mass=1.0, g=(0.5, 0.5), axis_masses=(1.0, 2.0))
    assert p.mass_along(1) == 2.0
    assert p.g_along(0) == 0.5
    q = PhysicalParams(mass=3.0, g=(9.8,))
    assert q.g_along(0) == 9.8 and q.g_along(1) == 0.0


def test_scaling_round_trip():
    sc = Scaling(length=1e-4, time=1e-4, mass=1.8e-25)
    assert sc.from_length(sc.to_length(3.3e-5)) == pytest.approx(3.3e-5)
    assert sc.from_velocity(sc.to_velocity(1.2)) == pytest.approx(1.2)
    p = sc.params(PhysicalParams(mass=1.8e-25))
    assert p.mass == pytest.approx(1.0)
    assert p.hbar == pytest.approx(1.054571817e-34 * 1e-4 / (1.8e-25 * 1e-8))


def test_fourier_interpolate_reproduces_band_limited_signal():
    g = Grid.centered(64, 0.25)
    x = g.axis(0)
    L = 64 * 0.25
    f = ComplexField(g, np.exp(2j * math.pi * 3 * x / L) + np.cos(2 * math.pi * 5 * x / L))
    pts = np.array([0.013, -3.77, 5.5])
    want = np.exp(2j * math.pi * 3 * pts / L) + np.cos(2 * math.pi * 5 * pts / L)
    assert np.allclose(fourier_interpolate(f, pts), want, atol=1e-12)
    assert np.allclose(fourier_interpolate(f, x), f.values, atol=1e-12)


def test_rng_streams_are_label_keyed_and_reproducible():
    a = stream(7, "c60/ensemble").random(5)
    b = stream(7, "c60/ensemble").random(5)
    c = stream(7, "c60/figure_trajectories").random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.array_equal(RunRNG(7).fork("c60/ensemble").random(5), a)
