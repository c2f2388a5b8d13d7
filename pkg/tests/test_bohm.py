import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from carpetlab.bohm import (
    DegenerateDensityError,
    Ensemble,
    EnsembleFailure,
    evolve_ensemble,
    integrate_trajectory,
    ks_distance,
    no_crossing,
    sample_from_density,
    sample_initial_positions,
    velocity,
    velocity_convergence_probe,
)
from carpetlab.rk import COMPLETED, NODE_APPROACH
from carpetlab.spectral import BasisSpec, CoefficientLaw, StateError, build_state


def ground_cdf(x):
    """CDF of 2 sin^2(pi x) on [0, 1]."""
    return x - np.sin(2 * math.pi * x) / (2 * math.pi)


# -- sampling -----------------------------------------------------------------------


def test_sampler_matches_ground_state_cdf(box):
    s = build_state(box, CoefficientLaw.explicit([1.0]))
    x = sample_initial_positions(s, 100_000, seed=7)
    assert stats.kstest(x, ground_cdf).statistic < 0.005


def test_sampler_uniform_density():
    x = np.linspace(0.0, 2.0, 1001)
    draws = sample_from_density(x, np.ones_like(x), 50_000, seed=1)
    assert stats.kstest(draws, stats.uniform(0, 2).cdf).statistic < 0.01


def test_sampler_single_member_and_determinism(box):
    s = build_state(box, CoefficientLaw.power_law(3.0, 16))
    one = sample_initial_positions(s, 1, seed=3)
    assert one.shape == (1,) and 0 < one[0] < 1
    np.testing.assert_array_equal(sample_initial_positions(s, 100, 3), sample_initial_positions(s, 100, 3))
    assert not np.array_equal(sample_initial_positions(s, 100, 3), sample_initial_positions(s, 100, 4))


def test_sampler_input_checks():
    x = np.linspace(0, 1, 11)
    with pytest.raises(DegenerateDensityError):
        sample_from_density(x, np.zeros_like(x), 10, 0)
    with pytest.raises(ValueError):
        sample_from_density(x, -np.ones_like(x), 10, 0)
    with pytest.raises(ValueError):
        sample_from_density(x, np.ones_like(x), 0, 0)


def test_sampler_skips_empty_regions():
    x = np.linspace(0, 1, 101)
    rho = np.where(x > 0.5, 1.0, 0.0)
    draws = sample_from_density(x, rho, 10_000, 0)
    assert draws.min() >= 0.5
    rho = np.where(x < 0.5, 1.0, 0.0)
    assert sample_from_density(x, rho, 10_000, 0).max() <= 0.5


# -- single trajectories --------------------------------------------------------------


def test_eigenstate_is_static(box):
    s = build_state(box, CoefficientLaw.explicit([0.0, 0.0, 1.0]))
    np.testing.assert_allclose(velocity(s, [0.1, 0.2, 0.5], [0.3, 0.3, 0.3]), 0.0, atol=1e-12)
    tr = integrate_trajectory(s, 0.2, [0.0, 1.0, 2.0])
    assert tr.status == COMPLETED
    np.testing.assert_allclose(tr.positions, 0.2, atol=1e-14)


def test_two_mode_revival(two_mode):
    T = two_mode.basis.revival_time
    tr = integrate_trajectory(two_mode, 0.3, [0.0, T / 3, T], rtol=1e-10)
    assert tr.status == COMPLETED
    assert tr.final == pytest.approx(0.3, abs=1e-7)


def test_mirror_symmetry(box):
    # odd harmonics only: |psi| is symmetric about L/2 and v is antisymmetric
    s = build_state(box, CoefficientLaw.explicit([1.0, 0.0, 0.6j, 0.0, -0.3]))
    times = np.linspace(0.0, 0.2 * box.revival_time, 5)
    a = integrate_trajectory(s, 0.31, times, rtol=1e-11)
    b = integrate_trajectory(s, 1.0 - 0.31, times, rtol=1e-11)
    np.testing.assert_allclose(a.positions + b.positions, 1.0, atol=1e-8)


def test_tolerance_refinement(smooth):
    times = [0.0, smooth.basis.revival_time / 8]
    coarse = integrate_trajectory(smooth, 0.4, times, rtol=1e-6)
    fine = integrate_trajectory(smooth, 0.4, times, rtol=1e-10)
    assert abs(coarse.final - fine.final) < max(100 * coarse.error_estimate, 1e-6)


def test_start_on_wall_is_node_approach(smooth):
    tr = integrate_trajectory(smooth, 0.0, [0.0, 0.1])
    assert tr.status == NODE_APPROACH


def test_trajectory_needs_box():
    kerr = build_state(BasisSpec.kerr(), CoefficientLaw.kerr_zeta(8))
    with pytest.raises(StateError):
        integrate_trajectory(kerr, 0.1, [0.0, 1.0])


# -- ensembles ------------------------------------------------------------------------


def test_small_ensemble(smooth, tmp_path):
    ens = Ensemble.sample(smooth, 500, seed=11)
    T = smooth.basis.revival_time
    rep = evolve_ensemble(smooth, ens, [T / 16, T / 8])
    assert rep.times[0] == 0.0 and rep.positions.shape == (500, 3)
    assert rep.ordered
    assert rep.census[COMPLETED] == 500
    # 500 draws: KS of order 1/sqrt(500)
    assert np.all(rep.ks < 0.07)
    d = json.loads(rep.to_json())
    assert set(d) == {"seed", "count", "ks_by_t", "failure_census", "no_crossing"}
    rep.dump_csv(tmp_path / "traj.csv")
    rows = list(csv.reader(open(tmp_path / "traj.csv")))
    assert rows[0] == ["member", "t", "x", "status"] and len(rows) == 1 + 1500


def test_ensemble_is_deterministic(smooth):
    T = smooth.basis.revival_time
    a = evolve_ensemble(smooth, Ensemble.sample(smooth, 50, 2), [T / 8])
    b = evolve_ensemble(smooth, Ensemble.sample(smooth, 50, 2), [T / 8])
    np.testing.assert_array_equal(a.positions, b.positions)


def test_ensemble_failure_census(smooth):
    ens = Ensemble(np.array([0.0, 0.3, 0.6]), seed=0)
    with pytest.raises(EnsembleFailure) as info:
        evolve_ensemble(smooth, ens, [0.1])
    assert info.value.census[NODE_APPROACH] == 1


def test_no_crossing_detects_swaps():
    x0 = np.array([0.1, 0.2, 0.3])
    assert no_crossing(x0, np.array([[0.1, 0.15], [0.2, 0.25], [0.3, 0.35]]))
    assert not no_crossing(x0, np.array([[0.1, 0.26], [0.2, 0.25], [0.3, 0.35]]))
    # terminated members are ignored
    assert no_crossing(x0, np.array([[0.1, np.nan], [0.2, 0.25], [0.3, 0.35]]))


@given(st.integers(0, 2**31 - 1))
def test_ks_of_initial_sample_is_small(seed):
    s = build_state(BasisSpec.box(), CoefficientLaw.power_law(3.0, 8))
    x = sample_initial_positions(s, 2000, seed)
    assert ks_distance(s, x, 0.0) < 0.05


# -- velocity probe -------------------------------------------------------------------


def test_probe_verdicts():
    assert velocity_convergence_probe(1.0).verdict == "nonconverged"
    smooth = velocity_convergence_probe(3.0)
    assert smooth.verdict == "converged"
    assert smooth.decay.exponent < -1


def test_probe_matches_direct_evaluation():
    p = velocity_convergence_probe(2.5, schedule=[16, 64])
    s = build_state(BasisSpec.box(), CoefficientLaw.power_law(2.5, 64))
    # renormalisation does not change v
    assert p.values[-1] == pytest.approx(velocity(s, [p.x], [p.t])[0], rel=1e-10)


def test_probe_schedule_checks():
    with pytest.raises(ValueError):
        velocity_convergence_probe(2.0, schedule=[16])
    with pytest.raises(ValueError):
        velocity_convergence_probe(2.0, schedule=[16, 8])
