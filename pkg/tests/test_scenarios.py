import math

import numpy as np
import pytest

from conftest import SMALL
from pilotwave import DomainError, ResolutionError
from pilotwave.errors import SchemaError, ValidationError
from pilotwave.scenarios import REGISTRY, SCENARIO_IDS, resolve, run
from pilotwave.scenarios.asym import quantile_restrict, visibility


def small(name, **extra):
    return resolve(name, {**SMALL[name], **extra})


def test_every_scenario_is_registered():
    assert set(SCENARIO_IDS) == set(REGISTRY)


def test_resolve_rejects_unknown_names_and_keys():
    with pytest.raises(SchemaError, match="unknown scenario"):
        resolve("no_such_thing")
    with pytest.raises(SchemaError, match="bogus"):
        resolve("two_body", {"bogus": 1})
    with pytest.raises(ValidationError, match="integer"):
        resolve("two_body", {"n_points": 64.5})
    with pytest.raises(ValidationError, match="true/false"):
        resolve("two_body", {"run_control": 1})
    with pytest.raises(ValidationError, match="theta0"):
        resolve("stern_gerlach", {"theta0": 4.0})


def test_config_replace_revalidates():
    cfg = resolve("two_body")
    assert cfg.replace(seed=5).seed == 5
    with pytest.raises(ValidationError):
        cfg.replace(seed=-1)


def test_two_body_small():
    rec = run(small("two_body"))
    assert rec.stats["factorized_max_deviation"] < 1e-4
    assert rec.stats["control_max_deviation"] > 1e-3
    assert rec.stats["factorized_final_norm2"] == pytest.approx(1.0, abs=1e-10)
    assert [f.label for f in rec.frames] == ["initial", "final"]


def test_c60_small():
    rec = run(small("c60_double_slit"))
    s = rec.stats
    assert s["fringe_spacing_rel_error"] < 0.05
    assert s["figure_axis_crossings"] == 0 and s["ensemble_side_changes"] == 0
    assert s["central_maximum"] is True
    assert len(rec.trajectories) == 4
    assert rec.spacetime is not None


def test_stern_gerlach_small_matches_oracle():
    rec = run(small("stern_gerlach"))
    s = rec.stats
    assert s["z_delta_rel_error"] < 1e-8 and s["u_rel_error"] < 1e-8
    assert s["up_weight_exit"] == pytest.approx(0.75, abs=1e-10)
    assert abs(s["up_fraction"] - 0.75) < 4 * rec.uncertainty["up_fraction"]
    assert s["ensemble_aborted"] == 0


def test_stern_gerlach_refuses_unresolved_kick():
    with pytest.raises(ResolutionError, match="n_fine"):
        run(resolve("stern_gerlach", {"n_fine": 2**17, "n_ensemble": 10, "n_trajectories": 0}))


@pytest.mark.slow
def test_epr_b_small():
    rec = run(small("epr_b"))
    s = rec.stats
    assert s["E_a0_b0"] == -1.0 and s["all_opposite_a0_b0"] is True
    for key in ("E_a0_b45", "E_a90_b45", "E_a90_b135", "E_a0_b135"):
        oracle = s[key.replace("E_", "E_oracle_")]
        assert abs(s[key] - oracle) < 0.02 + 3 * rec.uncertainty[key]
    assert s["chsh_abs_S"] > 2.0
    assert s["b_marginal_l1_during_a"] < 1e-10


def test_epr_b_refuses_aliased_grid():
    with pytest.raises(ResolutionError):
        run(small("epr_b", n_points=64))


def test_asym_small_patterns_differ():
    rec = run(small("asym_interference"))
    s = rec.stats
    assert s["pattern_l1"] > 0.1
    assert s["blocked_apertures"] == 50
    assert s["visibility_standard"] < 1e-6 < s["visibility_alternative"]
    assert abs(s["survivor_fraction"] - s["passing_weight"]) < 4 * rec.uncertainty["survivor_fraction"]


def test_asym_without_grid_b_is_a_single_slit():
    s = run(small("asym_interference", grid_b_count=0)).stats
    assert s["pattern_l1"] < 1e-12
    assert s["passing_weight"] == 1.0


def test_asym_large_grid_slits_transmit_both_ways():
    s = run(small("asym_interference", s_int=1e-8)).stats
    assert s["pattern_l1"] < 1e-12
    assert s["visibility_standard"] == pytest.approx(s["visibility_full"])


def test_asym_errors():
    with pytest.raises(DomainError, match="nothing transmits"):
        run(small("asym_interference", s_int=1e-3))
    with pytest.raises(DomainError, match="overlap"):
        run(small("asym_interference", grid_b_pitch=0.05e-6))
    with pytest.raises(ResolutionError):
        run(small("asym_interference", grid_b_width=2e-8))
    with pytest.raises(DomainError, match="reach"):
        run(small("asym_interference", slit_a_center=-80e-6))


def test_quantile_restrict_identity_and_support():
    rng = np.random.default_rng(0)
    rho = rng.random(50)
    p = rng.random(80)
    p /= p.sum()
    assert np.allclose(quantile_restrict(rho, np.ones(50), p), p)
    # keeping the first half of the mass keeps the lower half of the momenta
    rho = np.ones(10)
    keep = np.r_[np.ones(5), np.zeros(5)]
    out = quantile_restrict(rho, keep, np.full(10, 0.1))
    assert np.allclose(out, np.r_[np.full(5, 0.2), np.zeros(5)])


def test_visibility_of_two_point_sources():
    d = 2.0
    # whole number of fringe periods
    k = np.linspace(-16 * math.pi, 16 * math.pi, 32001)[:-1]
    assert visibility(1 + np.cos(k * d), k, d) == pytest.approx(1.0, abs=1e-12)
    assert visibility(np.ones_like(k), k, d) < 1e-12


@pytest.mark.parametrize("name", ["two_body", "c60_double_slit", "stern_gerlach", "asym_interference"])
def test_same_seed_same_statistics(name):
    a, b = run(small(name)), run(small(name))
    assert a.stats == b.stats and a.uncertainty == b.uncertainty
    for fa, fb in zip(a.frames, b.frames):
        assert np.array_equal(fa.density, fb.density)


def test_seed_changes_sampled_statistics():
    a = run(small("c60_double_slit", seed=1)).stats
    b = run(small("c60_double_slit", seed=2)).stats
    assert a["upper_slit_fraction"] != b["upper_slit_fraction"]
    assert a["fringe_spacing"] == b["fringe_spacing"]
