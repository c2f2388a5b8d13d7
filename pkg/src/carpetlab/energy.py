"""Scaling calculus for energy moments and the pointwise existence of H psi.

With |c_n| ~ n^-alpha, E_n ~ n^beta and |psi_n| ~ n^gamma:

    H psi   ~ sum n^(beta - alpha + gamma)   (pointwise)
    <H>     ~ sum n^(beta - 2 alpha)
    <H^2>   ~ sum n^(2 beta - 2 alpha)

A counterexample state has finite <H> but pointwise-divergent H psi, which
forces <H^2> to be infinite.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .fitting import (
    CAUCHY_TOL,
    CONVERGENT,
    DIVERGENT,
    UNDECIDED,
    PowerFit,
    final_decade_increment,
    fit_growth,
    geometric_schedule,
    verdict,
)
from .spectral import (
    BOX,
    GOLDEN,
    KERR,
    ScalingTriple,
    SpectralState,
    StateError,
    hamiltonian_norms,
)
from .special import HermiteRangeError, hermite_rows, quadrature_eigenfunctions

MARGINAL = "marginal"

__all__ = [
    "ScalingTriple",
    "ClassificationReport",
    "classify_scaling",
    "MomentSeries",
    "energy_moment_partial_sums",
    "HermiteScan",
    "hermite_amplitude_exponent",
    "CounterexampleCheck",
    "verify_counterexample",
]


def _strict(lhs: float, rhs: float, tol: float = 1e-12):
    """lhs < rhs as True/False, or None when the two are equal."""
    if abs(lhs - rhs) <= tol * max(1.0, abs(lhs), abs(rhs)):
        return None
    return lhs < rhs


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _witness(text: str, lhs: float, rhs: float, value) -> str:
    shown = MARGINAL if value is None else str(value).lower()
    return f"{text}: {_fmt(lhs)} < {_fmt(rhs)} = {shown}"


def _and(*flags):
    if any(f is False for f in flags):
        return False
    if any(f is None for f in flags):
        return None
    return True


@dataclass(frozen=True)
class ClassificationReport:
    """Flags are True, False or None (marginal: an inequality holds with equality)."""

    triple: ScalingTriple
    normalizable: bool | None
    mean_energy_finite: bool | None
    energy_sq_finite: bool | None
    h_psi_pointwise_divergent: bool | None
    counterexample: bool | None
    gamma_condition: bool | None
    witnesses: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if self.counterexample and self.energy_sq_finite is not False:
            raise AssertionError("a counterexample state cannot have finite <H^2>")

    @property
    def marginal(self) -> tuple[str, ...]:
        names = (
            "normalizable",
            "mean_energy_finite",
            "energy_sq_finite",
            "h_psi_pointwise_divergent",
            "counterexample",
            "gamma_condition",
        )
        return tuple(n for n in names if getattr(self, n) is None)

    def to_dict(self) -> dict:
        def flag(v):
            return MARGINAL if v is None else v

        return {
            "alpha": self.triple.alpha,
            "beta": self.triple.beta,
            "gamma": self.triple.gamma,
            "normalizable": flag(self.normalizable),
            "mean_energy_finite": flag(self.mean_energy_finite),
            "energy_sq_finite": flag(self.energy_sq_finite),
            "h_psi_pointwise_divergent": flag(self.h_psi_pointwise_divergent),
            "counterexample": flag(self.counterexample),
            "gamma_condition": flag(self.gamma_condition),
            "witnesses": list(self.witnesses),
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def classify_scaling(triple: ScalingTriple) -> ClassificationReport:
    a, b, g = triple.alpha, triple.beta, triple.gamma
    normalizable = _strict(0.5, a)
    mean_finite = _strict((1.0 + b) / 2.0, a)
    sq_finite = _strict(b + 0.5, a)
    h_div = _strict(a, b + g)
    gamma_ok = _strict(g, 0.5)
    witnesses = [
        _witness("1/2 < alpha", 0.5, a, normalizable),
        _witness("(1+beta)/2 < alpha", (1.0 + b) / 2.0, a, mean_finite),
        _witness("beta+1/2 < alpha", b + 0.5, a, sq_finite),
        _witness("alpha < beta+gamma", a, b + g, h_div),
        _witness("gamma < 1/2", g, 0.5, gamma_ok),
    ]
    notes = []
    if normalizable is not True:
        notes.append("not normalizable: alpha > 1/2 is required for a square-integrable state")
        return ClassificationReport(
            triple, normalizable, None if mean_finite is None else False, None if sq_finite is None else False,
            h_div, False, gamma_ok, tuple(witnesses), tuple(notes),
        )
    sq_infinite = None if sq_finite is None else (not sq_finite)
    counter = _and(mean_finite, h_div, sq_infinite)
    if h_div and sq_finite:
        notes.append(
            "pointwise divergence predicted with finite <H^2>: the amplitude heuristic is "
            "inconsistent here (gamma >= 1/2), so no counterexample is claimed"
        )
    if counter:
        notes.append(f"counterexample band: {_fmt((1 + b) / 2)} < alpha < {_fmt(b + g)}")
    return ClassificationReport(
        triple, normalizable, mean_finite, sq_finite, h_div, counter, gamma_ok, tuple(witnesses), tuple(notes)
    )


# ---------------------------------------------------------------------------
# numerical moments


@dataclass(frozen=True)
class MomentSeries:
    schedule: np.ndarray
    mean: np.ndarray  # <H>_N
    mean_sq: np.ndarray  # <H^2>_N
    mean_fit: PowerFit | None  # None with fewer than three schedule points
    mean_sq_fit: PowerFit | None
    mean_increment: float
    mean_sq_increment: float
    cauchy_tol: float = CAUCHY_TOL

    @property
    def mean_verdict(self) -> str:
        if self.mean_fit is None:
            return UNDECIDED
        return verdict(self.mean_fit, self.mean_increment, self.cauchy_tol)

    @property
    def mean_sq_verdict(self) -> str:
        if self.mean_sq_fit is None:
            return UNDECIDED
        return verdict(self.mean_sq_fit, self.mean_sq_increment, self.cauchy_tol)

    def to_dict(self) -> dict:
        return {
            "schedule": [int(n) for n in self.schedule],
            "mean": [float(v) for v in self.mean],
            "mean_sq": [float(v) for v in self.mean_sq],
            "mean_fit": None if self.mean_fit is None else self.mean_fit.to_dict(),
            "mean_sq_fit": None if self.mean_sq_fit is None else self.mean_sq_fit.to_dict(),
            "mean_increment": self.mean_increment,
            "mean_sq_increment": self.mean_sq_increment,
            "mean_verdict": self.mean_verdict,
            "mean_sq_verdict": self.mean_sq_verdict,
            "cauchy_tol": self.cauchy_tol,
        }


def energy_moment_partial_sums(state: SpectralState, schedule=None, cauchy_tol: float = CAUCHY_TOL) -> MomentSeries:
    """<H>_N and <H^2>_N for N along ``schedule`` (default: geometric up to all modes)."""
    schedule = geometric_schedule(state.size) if schedule is None else np.asarray(schedule, dtype=np.int64)
    if np.any(np.diff(schedule) <= 0):
        raise ValueError("schedule must be strictly increasing")
    if schedule[-1] > state.size or schedule[0] < 1:
        raise ValueError(f"schedule must lie within 1..{state.size}")
    p = np.abs(state.coefficients) ** 2
    h1 = np.cumsum(p * state.energies)
    h2 = np.cumsum(p * state.energies**2)
    end = int(schedule[-1])
    fits = np.unique(schedule).size >= 3
    return MomentSeries(
        schedule,
        h1[schedule - 1],
        h2[schedule - 1],
        fit_growth(schedule, h1[schedule - 1]) if fits else None,
        fit_growth(schedule, h2[schedule - 1]) if fits else None,
        final_decade_increment(h1, end),
        final_decade_increment(h2, end),
        cauchy_tol,
    )


# ---------------------------------------------------------------------------
# Hermite-Gaussian amplitude scan


@dataclass(frozen=True)
class HermiteScan:
    ns: np.ndarray
    sup: np.ndarray
    fit: PowerFit
    regime_mismatch: bool

    @property
    def exponent(self) -> float:
        return self.fit.exponent

    @property
    def stderr(self) -> float:
        return self.fit.stderr


def hermite_amplitude_exponent(
    n_range: tuple[int, int],
    interval: tuple[float, float] = (-2.0, 2.0),
    samples: int = 8001,
    count: int = 40,
) -> HermiteScan:
    """Fit sup_{x in interval} |psi_n(x)| ~ n^exponent over n in ``n_range``.

    psi_n are the quadrature (X = (a + a^dagger)/2) number-state functions;
    ``count`` values of n are spread geometrically across the range. The
    scan flags a regime mismatch when the whole interval lies beyond the
    classical turning point |x| = sqrt(2n + 1)/2 for every n scanned.
    """
    lo, hi = int(n_range[0]), int(n_range[1])
    if hi <= lo:
        raise ValueError("insufficient points to fit: n-range must contain at least two values")
    ns = np.unique(np.round(np.geomspace(max(lo, 1), hi, count)).astype(np.int64))
    if lo == 0:
        ns = np.unique(np.concatenate([[0], ns]))
    if ns.size < 3:
        raise ValueError("insufficient points to fit: widen the n-range")
    x = np.linspace(interval[0], interval[1], samples)
    try:
        table = quadrature_eigenfunctions(ns, x)
    except HermiteRangeError as exc:
        raise HermiteRangeError(f"Hermite recurrence unstable over n in {n_range}: {exc}") from exc
    sup = np.abs(table).max(axis=1)
    keep = ns > 0
    fit = fit_growth(ns[keep], sup[keep], decades=np.inf)
    turning = np.sqrt(2.0 * ns + 1.0) / 2.0
    near = min(abs(interval[0]), abs(interval[1])) if interval[0] * interval[1] > 0 else 0.0
    mismatch = bool(np.all(near > turning))
    return HermiteScan(ns, sup, fit, mismatch)


# ---------------------------------------------------------------------------
# symbolic vs numerical cross-check


def probe_point(state: SpectralState) -> float:
    """Generic interior point: golden fraction of the box, or of 1 in quadrature units."""
    return GOLDEN * state.basis.length if state.basis.kind == BOX else GOLDEN


def pointwise_h_psi(state: SpectralState, x: float, schedule) -> np.ndarray:
    """|(H psi)_N(x)| at t = 0 along ``schedule``."""
    n_max = int(schedule[-1])
    if state.basis.kind == BOX:
        psi_n = state.basis.eigenfunctions(state.modes[:n_max], [x])[0]
    else:
        psi_n = quadrature_eigenfunctions(state.modes[:n_max], [x])[:, 0]
    partial = np.cumsum(state.coefficients[:n_max] * state.energies[:n_max] * psi_n)
    return np.abs(partial[np.asarray(schedule) - 1])


@dataclass(frozen=True)
class CounterexampleCheck:
    report: ClassificationReport
    moments: MomentSeries
    h_psi_l2_fit: PowerFit
    h_psi_pointwise_fit: PowerFit
    consistent: bool
    inconsistencies: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "classification": self.report.to_dict(),
            "moments": self.moments.to_dict(),
            "h_psi_l2_fit": self.h_psi_l2_fit.to_dict(),
            "h_psi_pointwise_fit": self.h_psi_pointwise_fit.to_dict(),
            "consistent": self.consistent,
            "inconsistencies": list(self.inconsistencies),
        }


def verify_counterexample(state: SpectralState, schedule=None) -> CounterexampleCheck:
    """Compare the symbolic flags of the declared scaling with numerical growth fits."""
    if state.scaling is None:
        raise StateError("state has no declared scaling triple")
    report = classify_scaling(state.scaling)
    schedule = geometric_schedule(state.size) if schedule is None else np.asarray(schedule, dtype=np.int64)
    moments = energy_moment_partial_sums(state, schedule)
    l2 = hamiltonian_norms(state, int(schedule[-1]), schedule)
    # running maximum smooths the oscillation of conditionally summed series
    pointwise = np.maximum.accumulate(pointwise_h_psi(state, probe_point(state), schedule))
    pw_fit = fit_growth(schedule, pointwise)

    problems = []
    numeric_mean_finite = moments.mean_verdict != DIVERGENT
    if report.mean_energy_finite is not None and report.mean_energy_finite != numeric_mean_finite:
        problems.append(
            f"<H>: symbolic finite={report.mean_energy_finite}, numeric verdict={moments.mean_verdict}"
        )
    numeric_sq_finite = moments.mean_sq_verdict != DIVERGENT
    if report.energy_sq_finite is not None and report.energy_sq_finite != numeric_sq_finite:
        problems.append(
            f"<H^2>: symbolic finite={report.energy_sq_finite}, numeric verdict={moments.mean_sq_verdict}"
        )
    if report.energy_sq_finite is not None and report.energy_sq_finite == (l2.verdict == DIVERGENT):
        problems.append(f"||H psi||: symbolic <H^2> finite={report.energy_sq_finite}, numeric verdict={l2.verdict}")
    if report.h_psi_pointwise_divergent and pw_fit.exponent <= 0:
        problems.append(f"pointwise H psi: predicted divergent, fitted exponent {pw_fit.exponent:.3g}")
    return CounterexampleCheck(report, moments, l2.fit, pw_fit, not problems, tuple(problems))
