import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from carpetlab.madelung import (
    EmptyDecompositionError,
    continuity_residual,
    coupled_sweep,
    hamilton_jacobi_residual,
    node_mask,
    polar_decompose,
    refinement_table,
    stationarity_gap,
    velocity_field,
)
from carpetlab.spectral import (
    GOLDEN,
    BasisSpec,
    CoefficientLaw,
    ComplexField,
    SpaceTimeGrid,
    StateError,
    build_state,
    evaluate_spatial_derivative,
    evaluate_wavefunction,
)


def eigenstate(n, basis=None):
    basis = basis or BasisSpec.box()
    return build_state(basis, CoefficientLaw.explicit([0.0] * (n - 1) + [1.0]))


def two_mode_closed_form(x, t):
    """P and the current (hbar = m = L = 1) of (psi_1 + psi_2)/sqrt 2."""
    k1, k2 = math.pi, 2 * math.pi
    w1, w2 = k1**2 / 2, k2**2 / 2
    p1, p2 = math.sqrt(2) * np.sin(k1 * x), math.sqrt(2) * np.sin(k2 * x)
    d1, d2 = math.sqrt(2) * k1 * np.cos(k1 * x), math.sqrt(2) * k2 * np.cos(k2 * x)
    P = 0.5 * (p1**2 + p2**2 + 2 * p1 * p2 * np.cos((w2 - w1) * t))
    current = 0.5 * (p2 * d1 - p1 * d2) * np.sin((w2 - w1) * t)
    return P, current


# -- polar variables ----------------------------------------------------------------


def test_polar_of_plane_wave():
    b = BasisSpec.box()
    grid = SpaceTimeGrid.box(b, 101, [0.0])
    x = grid.x
    psi = ComplexField(np.exp(1j * 3.0 * x)[:, None] / 1.0, grid, b)
    m = polar_decompose(psi)
    np.testing.assert_allclose(m.P, 1.0)
    # the unwrapped phase is continuous and linear
    np.testing.assert_allclose(m.S[:, 0] - m.S[0, 0], 3.0 * x, atol=1e-12)


def test_velocity_of_plane_wave():
    b = BasisSpec.box(mass=2.0, hbar=0.5)
    grid = SpaceTimeGrid.box(b, 11, [0.0])
    x = grid.x[:, None]
    psi = ComplexField(np.exp(1j * 4.0 * x), grid, b)
    dpsi = ComplexField(4.0j * np.exp(1j * 4.0 * x), grid, b)
    np.testing.assert_allclose(velocity_field(psi, dpsi), 0.5 * 4.0 / 2.0)


def test_two_mode_oracle(two_mode):
    b = two_mode.basis
    t = [0.0, 0.17, 0.5]
    grid = SpaceTimeGrid.box(b, 257, t)
    psi = evaluate_wavefunction(two_mode, grid)
    dpsi = evaluate_spatial_derivative(two_mode, grid)
    m = polar_decompose(psi, derivative=dpsi)
    xx, tt = np.meshgrid(grid.x, t, indexing="ij")
    P, current = two_mode_closed_form(xx, tt)
    np.testing.assert_allclose(m.P, P, atol=1e-13)
    ok = ~m.node_mask
    np.testing.assert_allclose(m.v[ok] * m.P[ok], current[ok], atol=1e-12)
    np.testing.assert_allclose(m.total_probability(), 1.0, atol=1e-4)


def test_nodes_are_masked(box):
    s = eigenstate(2)
    grid = SpaceTimeGrid.box(box, 9, [0.0])  # includes x = 0, 1/2, 1
    m = polar_decompose(evaluate_wavefunction(s, grid))
    assert m.node_mask[[0, 4, 8], 0].all()
    assert np.isnan(m.S[[0, 4, 8], 0]).all()
    assert np.isfinite(m.S[~m.node_mask]).all()


def test_node_mask_is_relative():
    P = np.array([[1e-13], [1.0], [0.5]])
    assert node_mask(P).tolist() == [[True], [False], [False]]
    assert node_mask(P * 1e-20).tolist() == [[True], [False], [False]]


def test_empty_slice_rejected(box):
    grid = SpaceTimeGrid.box(box, 5, [0.0])
    with pytest.raises(EmptyDecompositionError):
        polar_decompose(ComplexField(np.zeros((5, 1), complex), grid, box))
    with pytest.raises(ValueError):
        polar_decompose(ComplexField(np.full((5, 1), np.nan + 0j), grid, box))


@given(st.floats(0.0, 2 * math.pi))
def test_global_phase_invariance_of_velocity(theta):
    s = build_state(BasisSpec.box(), CoefficientLaw.power_law(1.75, 64, phases="random", seed=1))
    grid = SpaceTimeGrid.box(s.basis, 65, [0.0, 0.123])
    psi = evaluate_wavefunction(s, grid)
    dpsi = evaluate_spatial_derivative(s, grid)
    g = np.exp(1j * theta)
    v0 = velocity_field(psi, dpsi)
    v1 = velocity_field(ComplexField(psi.values * g, grid, s.basis), ComplexField(dpsi.values * g, grid, s.basis))
    ok = np.isfinite(v0)
    assert np.max(np.abs(v1[ok] - v0[ok])) < 1e-12 * max(1.0, np.max(np.abs(v0[ok])))


# -- residuals ----------------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3])
def test_eigenstate_continuity_vanishes(n):
    s = eigenstate(n)
    # node positions j/n are lattice points
    grid = SpaceTimeGrid.box(s.basis, 128 * n - 1, [0.0, 0.3], endpoints=False)
    assert continuity_residual(s, grid, 2).sup < 1e-11


def test_eigenstate_hamilton_jacobi_sixth_order():
    s = eigenstate(1)
    grid = SpaceTimeGrid.box(s.basis, 127, [0.0, 0.3], endpoints=False)
    assert hamilton_jacobi_residual(s, grid, 6).sup < 1e-10


def test_second_order_convergence(smooth):
    rows = refinement_table(smooth, [256, 512, 1024], [0.1 * smooth.basis.revival_time])
    for a, b in zip(rows, rows[1:]):
        assert a["continuity_sup"] / b["continuity_sup"] > 3.5
        assert a["hj_sup"] / b["hj_sup"] > 3.5


def test_higher_order_stencils_are_more_accurate(smooth):
    t = [0.1 * smooth.basis.revival_time]
    r2 = refinement_table(smooth, [512], t, 2)[0]
    r4 = refinement_table(smooth, [512], t, 4)[0]
    assert r4["hj_sup"] < r2["hj_sup"] / 10


def test_uniform_residuals_do_not_decrease(box):
    rows = coupled_sweep(
        lambda n: build_state(box, CoefficientLaw.uniform(n)), [63, 127, 255], [GOLDEN * box.revival_time]
    )
    for a, b in zip(rows, rows[1:]):
        assert b["continuity_sup"] >= a["continuity_sup"]
        assert b["hj_sup"] >= a["hj_sup"]


def test_residual_input_checks(smooth):
    grid = SpaceTimeGrid.box(smooth.basis, 63, [0.0], endpoints=False)
    with pytest.raises(ValueError):
        continuity_residual(smooth, grid, 3)
    kerr = build_state(BasisSpec.kerr(), CoefficientLaw.kerr_zeta(8))
    with pytest.raises(StateError):
        hamilton_jacobi_residual(kerr, grid)


# -- stationarity -------------------------------------------------------------------


def test_stationarity_gap(box):
    s = build_state(box, CoefficientLaw.uniform(4095))
    gap = stationarity_gap(s, 0.05 * box.revival_time)
    assert gap.initial_grad_P_sup == 0.0 and gap.initial_grad_S_sup == 0.0
    assert gap.deviation_from_uniform > 0.1 / box.length
    back = stationarity_gap(s, box.revival_time)
    assert back.deviation_from_initial < 1e-10


def test_stationarity_needs_uniform_law(smooth):
    with pytest.raises(StateError):
        stationarity_gap(smooth, 0.1)
