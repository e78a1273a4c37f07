"""Invariants checked over generated inputs."""

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from pilotwave import Grid, PhysicalParams, SpinorField, gaussian_packet, norm2
from pilotwave.errors import ValidationError
from pilotwave.fields import polarized_spinor
from pilotwave.files import read_density_csv, read_pgm, write_density_csv, write_pgm
from pilotwave.madelung import spin_vector_field
from pilotwave.oracles import chsh, singlet_correlation
from pilotwave.propagators import Environment, Potential, StepConfig, evolve, rotate_spin_basis
from pilotwave.rng import stream
from pilotwave.scenarios import resolve

UNIT = PhysicalParams(mass=1.0, hbar=1.0)
FAST = settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)


@FAST
@given(
    center=st.floats(-2, 2),
    sigma=st.floats(0.6, 2.0),
    velocity=st.floats(-3, 3),
    omega=st.floats(0.0, 1.5),
)
def test_split_step_conserves_norm(center, sigma, velocity, omega):
    psi = gaussian_packet(Grid.centered(256, 0.1), center, sigma, velocity, UNIT)
    env = Environment(UNIT, StepConfig(0.01), Potential.harmonic(omega))
    final, _ = evolve(psi, env, 0.5)
    assert abs(norm2(final) - norm2(psi)) < 1e-12


@FAST
@given(theta=st.floats(0, math.pi), phi=angles)
def test_spin_vector_is_unit_length(theta, phi):
    g = Grid.centered(64, 0.2)
    s = polarized_spinor(gaussian_packet(g, 0.0, 1.0, 0.0, UNIT), theta, phi)
    v = spin_vector_field(s)[:, 32]
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
    assert v[2] == pytest.approx(math.cos(theta), abs=1e-12)


@FAST
@given(angle=angles, particle=st.sampled_from([0, 1]), seed=st.integers(0, 2**16))
def test_spin_rotation_is_unitary(angle, particle, seed):
    g = Grid.centered((8, 8), 1.0)
    rng = np.random.default_rng(seed)
    s = SpinorField(g, rng.normal(size=(4, 8, 8)) + 1j * rng.normal(size=(4, 8, 8)))
    r = rotate_spin_basis(s, angle, particle=particle)
    assert norm2(r) == pytest.approx(norm2(s), rel=1e-12)
    assert np.allclose(rotate_spin_basis(r, -angle, particle=particle).values, s.values, atol=1e-12)


@FAST
@given(a=angles, b=angles)
def test_singlet_correlation_symmetric_and_bounded(a, b):
    e = singlet_correlation(a, b)
    assert -1.0 <= e <= 1.0
    assert e == pytest.approx(singlet_correlation(b, a), abs=1e-14)
    assert e == pytest.approx(singlet_correlation(a + 0.3, b + 0.3), abs=1e-12)


@FAST
@given(st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_chsh_never_exceeds_four(es):
    assert abs(chsh(*es)) <= 4.0


@FAST
@given(a=angles, ap=angles, b=angles, bp=angles)
def test_singlet_chsh_respects_tsirelson(a, ap, b, bp):
    e = singlet_correlation
    assert abs(chsh(e(a, b), e(a, bp), e(ap, b), e(ap, bp))) <= 2 * math.sqrt(2) + 1e-12


@FAST
@given(seed=st.integers(0, 2**32 - 1), label=st.text(min_size=1, max_size=20))
def test_rng_stream_is_a_function_of_seed_and_label(seed, label):
    assert np.array_equal(stream(seed, label).random(4), stream(seed, label).random(4))
    assert not np.array_equal(stream(seed, label).random(4), stream(seed, label + "/x").random(4))


@FAST
@given(value=st.floats(allow_nan=False, allow_infinity=False).filter(lambda v: v <= 0))
def test_positive_parameters_name_their_bound(value):
    with pytest.raises(ValidationError, match=r"sigma0 .*lower bound sigma0 > 0"):
        resolve("epr_b", {"sigma0": value})


@FAST
@given(value=st.integers(-(2**20), 0))
def test_count_parameters_name_their_bound(value):
    with pytest.raises(ValidationError, match=r"n_ensemble .*lower bound n_ensemble >= 1"):
        resolve("epr_b", {"n_ensemble": value})


@FAST
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=2, max_size=12))
def test_density_csv_round_trips_bit_exactly(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("csv") / "d.csv"
    x = np.arange(len(values), dtype=float) * 0.1 - 0.3
    rho = np.array(values)
    write_density_csv(path, [x], rho, ["x"])
    axes, back, names = read_density_csv(path)
    assert names == ["x"]
    assert np.array_equal(axes[0], x)
    assert np.array_equal(back, rho)


@FAST
@given(level=st.floats(1e-300, 1e300), shape=st.sampled_from([(7,), (3, 5)]))
def test_pgm_constant_density_is_white(tmp_path_factory, level, shape):
    path = tmp_path_factory.mktemp("pgm") / "c.pgm"
    write_pgm(path, np.full(shape, level))
    img = read_pgm(path)
    assert img.shape == ((1, 7) if shape == (7,) else (3, 5))
    assert np.all(img == 255)


@FAST
@given(sigma=st.floats(0.5, 3.0), scale=st.floats(1e-20, 1e20))
def test_pgm_of_gaussian_is_monotone_away_from_peak(tmp_path_factory, sigma, scale):
    path = tmp_path_factory.mktemp("pgm") / "g.pgm"
    x = np.linspace(-6, 6, 121)
    write_pgm(path, scale * np.exp(-x * x / (2 * sigma * sigma)))
    img = read_pgm(path)[0].astype(int)
    assert img[60] == 255
    assert np.all(np.diff(img[60:]) <= 0) and np.all(np.diff(img[:61]) >= 0)
