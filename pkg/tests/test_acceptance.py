"""Acceptance criteria: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected into the "acceptance criteria" section of the
pytest terminal summary.
"""

import math

import numpy as np
import pytest

from carpetlab.bohm import Ensemble, evolve_ensemble, velocity, velocity_convergence_probe
from carpetlab.energy import classify_scaling, energy_moment_partial_sums, hermite_amplitude_exponent
from carpetlab.fitting import CONVERGENT
from carpetlab.fractal import box_count_dimension, extract_section, synthetic_fourier_series
from carpetlab.madelung import (
    continuity_residual,
    coupled_sweep,
    hamilton_jacobi_residual,
    refinement_table,
    stationarity_gap,
)
from carpetlab.spectral import (
    GOLDEN,
    BasisSpec,
    CoefficientLaw,
    ScalingTriple,
    SpaceTimeGrid,
    build_state,
    evaluate_time_derivative,
    evaluate_wavefunction,
    evaluate_wavefunction_fast,
    hamiltonian_norms,
    hamiltonian_partial_sum,
)

BAND = 0.12


@pytest.fixture(scope="module")
def box():
    return BasisSpec.box()


@pytest.fixture(scope="module")
def uniform_4095(box):
    return build_state(box, CoefficientLaw.uniform(4095))


def test_criterion_01_spatial_carpet_dimension(criterion, box, uniform_4095):
    c = criterion(1, "spatial carpet dimension")
    g = extract_section(uniform_4095, "spatial", fixed=GOLDEN * box.revival_time, resolution=1 << 15)
    est = box_count_dimension(g)
    c.check("D = 1.5 +- 0.12", abs(est.D - 1.5) <= BAND, f"D={est.D:.4f}")
    c.check("R2 > 0.98", est.r2 > 0.98, f"R2={est.r2:.5f}")
    c.finish()


def test_criterion_02_temporal_carpet_dimension(criterion, box, uniform_4095):
    c = criterion(2, "temporal carpet dimension")
    g = extract_section(uniform_4095, "temporal", fixed=0.3827 * box.length, resolution=1 << 15)
    est = box_count_dimension(g)
    c.check("D = 1.75 +- 0.12", abs(est.D - 1.75) <= BAND, f"D={est.D:.4f}, {g.intervals} samples")
    c.finish()


def test_criterion_03_dimension_law(criterion):
    c = criterion(3, "dimension law 5/2 - z")
    for z in (0.75, 1.0, 1.25):
        for seed in (0, 1, 2):
            est = box_count_dimension(synthetic_fourier_series(z, 1 << 14, seed=seed))
            c.check(f"z={z} seed={seed}", abs(est.D - (2.5 - z)) < BAND, f"D={est.D:.3f}")
    c.finish()


def test_criterion_04_derivative_fractal(criterion, box):
    c = criterion(4, "derivative fractal 7/2 - alpha")
    n = 1 << 20
    s = build_state(box, CoefficientLaw.power_law(1.75, n, phases="random", seed=0))
    g = extract_section(s, "spatial", observable="re_dpsi", resolution=n)
    est = box_count_dimension(g)
    c.check("D = 1.75 +- 0.12", abs(est.D - 1.75) <= BAND, f"D={est.D:.4f} (N={n})")
    report = classify_scaling(ScalingTriple(1.75, 2.0, 0.0))
    c.check("classify(1.75, 2, 0) counterexample", report.counterexample is True)
    c.finish()


def test_criterion_05_divergence_exponents(criterion, box):
    c = criterion(5, "divergence exponents")
    uniform = build_state(box, CoefficientLaw.uniform(100_000))
    h = hamiltonian_norms(uniform)
    c.check("||H psi_N|| exponent 1.5 +- 0.05", abs(h.fit.exponent - 1.5) <= 0.05, f"{h.fit.exponent:.4f}")
    m = energy_moment_partial_sums(uniform)
    c.check("<H>_N exponent 1.0 +- 0.02", abs(m.mean_fit.exponent - 1.0) <= 0.02, f"{m.mean_fit.exponent:.4f}")
    smooth = build_state(box, CoefficientLaw.power_law(3.0, 1_000_000))
    hs = hamiltonian_norms(smooth)
    ms = energy_moment_partial_sums(smooth)
    c.check("alpha=3 ||H psi|| convergent", hs.verdict == CONVERGENT, f"{hs.verdict}, increment {hs.increment:.2e}")
    c.check("alpha=3 <H> convergent", ms.mean_verdict == CONVERGENT, f"{ms.mean_verdict}, increment {ms.mean_increment:.2e}")
    c.finish()


def test_criterion_06_kerr_counterexample(criterion):
    c = criterion(6, "Kerr counterexample")
    s = build_state(BasisSpec.kerr(), CoefficientLaw.kerr_zeta(100_000))
    m = energy_moment_partial_sums(s)
    c.check("<H>_N final-decade increments < 1e-8", m.mean_increment < 1e-8, f"max increment {m.mean_increment:.3e}")
    c.check(
        "<H^2>_N exponent 1.75 +- 0.1", abs(m.mean_sq_fit.exponent - 1.75) <= 0.1, f"{m.mean_sq_fit.exponent:.4f}"
    )
    scan = hermite_amplitude_exponent((100, 2000), (-2.0, 2.0))
    c.check("Hermite amplitude exponent -0.25 +- 0.03", abs(scan.exponent + 0.25) <= 0.03, f"{scan.exponent:.4f}")
    c.finish()


def test_criterion_07_madelung_dichotomy(criterion, box):
    c = criterion(7, "Madelung dichotomy")
    smooth = build_state(box, CoefficientLaw.power_law(3.0, 32))
    rows = refinement_table(smooth, [256, 512, 1024, 2048], [0.1 * box.revival_time], stencil_order=2)
    for key in ("continuity_sup", "hj_sup"):
        ratios = [a[key] / b[key] for a, b in zip(rows, rows[1:])]
        c.check(f"alpha=3 {key} shrinks >= 3.5x", min(ratios) >= 3.5, "ratios " + ", ".join(f"{r:.2f}" for r in ratios))
    sweep = coupled_sweep(
        lambda n: build_state(box, CoefficientLaw.uniform(n)), [63, 127, 255, 511], [GOLDEN * box.revival_time]
    )
    for key in ("continuity_sup", "hj_sup"):
        values = [r[key] for r in sweep]
        c.check(
            f"uniform {key} does not decrease",
            all(b >= a for a, b in zip(values, values[1:])),
            ", ".join(f"{v:.3g}" for v in values),
        )
    ground = build_state(box, CoefficientLaw.explicit([1.0]))
    grid = SpaceTimeGrid.box(box, 127, [0.0, 0.3], endpoints=False)
    cont = continuity_residual(ground, grid, 6).sup
    hj = hamilton_jacobi_residual(ground, grid, 6).sup
    c.check("eigenstate residuals < 1e-10", max(cont, hj) < 1e-10, f"continuity {cont:.2e}, HJ {hj:.2e}")
    c.finish()


def test_criterion_08_stationarity_paradox(criterion, box, uniform_4095):
    c = criterion(8, "stationarity paradox")
    gap = stationarity_gap(uniform_4095, 0.05 * box.revival_time)
    c.check(
        "zero interior gradients at t=0",
        gap.initial_grad_P_sup == 0.0 and gap.initial_grad_S_sup == 0.0,
        f"grad P {gap.initial_grad_P_sup}, grad S {gap.initial_grad_S_sup}",
    )
    c.check(
        "sup |P - 1/L| > 0.1/L at 0.05 T_rev",
        gap.deviation_from_uniform > 0.1 / box.length,
        f"{gap.deviation_from_uniform:.4f}",
    )
    back = stationarity_gap(uniform_4095, box.revival_time)
    c.check("P(T_rev) = P(0) within 1e-10", back.deviation_from_initial < 1e-10, f"{back.deviation_from_initial:.2e}")
    c.finish()


def test_criterion_09_equivariance(criterion, box):
    c = criterion(9, "equivariance")
    s = build_state(box, CoefficientLaw.power_law(3.0, 32))
    ens = Ensemble.sample(s, 10_000, seed=20240601)
    rep = evolve_ensemble(s, ens, [box.revival_time / 8])
    c.check("KS at T_rev/8 < 0.02", rep.ks[-1] < 0.02, f"KS={rep.ks[-1]:.5f}, census {rep.census}")
    c.check("no crossing", rep.ordered)
    c.finish()


def test_criterion_10_velocity_probe(criterion):
    c = criterion(10, "velocity breakdown probe")
    for alpha, expected in ((1.0, "nonconverged"), (1.75, "converged"), (3.0, "converged")):
        p = velocity_convergence_probe(alpha)
        c.check(f"alpha={alpha} {expected}", p.verdict == expected, f"last increment {p.last_increment:.2e}")
    c.finish()


def test_criterion_11_exact_identities(criterion, box):
    c = criterion(11, "exact identities")
    T = box.revival_time
    uniform = build_state(box, CoefficientLaw.uniform(1023))

    grid = SpaceTimeGrid.box(box, 1025, [0.123, 0.123 + T])
    psi = evaluate_wavefunction(uniform, grid).values
    err = np.max(np.abs(psi[:, 1] - psi[:, 0]))
    c.check("revival < 1e-10", err < 1e-10, f"{err:.1e}")

    rough = build_state(box, CoefficientLaw.power_law(1.2, 300, "random", 1))
    grid = SpaceTimeGrid.box(box, (1 << 14) + 1, [0.0, 0.3, GOLDEN * T])
    norms = np.sum(np.abs(evaluate_wavefunction(rough, grid).values) ** 2, axis=0) * grid.dx
    err = np.max(np.abs(norms - 1.0))
    c.check("Parseval < 1e-8", err < 1e-8, f"{err:.1e}")

    grid = SpaceTimeGrid.box(box, 4097, [0.1, GOLDEN * T])
    err = np.max(np.abs(evaluate_wavefunction_fast(uniform, grid).values - evaluate_wavefunction(uniform, grid).values))
    c.check("fast vs naive < 1e-10", err < 1e-10, f"{err:.1e}")

    grid = SpaceTimeGrid.box(box, 257, [0.0, 0.17, 0.9])
    worst = 0.0
    for n in (1, 17, 128, uniform.size):
        h, _ = hamiltonian_partial_sum(uniform, grid, n, schedule=[1, 2, 3, 4])
        sub = uniform.truncated(n)
        rhs = 1j * box.hbar * evaluate_time_derivative(sub, grid).values * np.linalg.norm(uniform.coefficients[:n])
        worst = max(worst, np.max(np.abs(h.values - rhs)) / max(1.0, np.max(np.abs(h.values))))
    c.check("term-wise H psi_N = i hbar d/dt psi_N < 1e-12", worst < 1e-12, f"relative {worst:.1e}")

    base = build_state(box, CoefficientLaw.power_law(1.75, 256, "random", 2))
    x = np.linspace(0.01, 0.99, 97)
    t = np.full(x.shape, 0.37)
    v0 = velocity(base, x, t)
    worst = 0.0
    for theta in (0.3, 1.0, math.pi, 5.0):
        turned = build_state(box, CoefficientLaw.explicit(base.coefficients * np.exp(1j * theta)))
        worst = max(worst, np.max(np.abs(velocity(turned, x, t) - v0)) / np.max(np.abs(v0)))
    c.check("global phase invariance of v < 1e-12", worst < 1e-12, f"relative {worst:.1e}")
    c.finish()
