"""de Broglie-Bohm trajectories for box states.

The drift is v = (hbar/m) Im(psi' / psi), evaluated by summing the modes at
each trajectory point (no interpolation on a grid). Ensembles are drawn from
|psi(., 0)|^2 by inverse-CDF sampling and compared with |psi(., t)|^2 by a
Kolmogorov-Smirnov distance after evolution.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .fitting import PowerFit, fit_growth
from .rk import COMPLETED, NODE_APPROACH, NONCONVERGENT, integrate_batch
from .spectral import (
    BOX,
    GOLDEN,
    BasisSpec,
    CoefficientLaw,
    SpaceTimeGrid,
    SpectralState,
    StateError,
    build_state,
    evaluate_at,
    evaluate_series,
)

__all__ = [
    "COMPLETED",
    "NODE_APPROACH",
    "NONCONVERGENT",
    "Trajectory",
    "Ensemble",
    "EnsembleReport",
    "VelocityProbe",
    "velocity",
    "tabulated_cdf",
    "sample_from_density",
    "sample_initial_positions",
    "integrate_trajectory",
    "evolve_ensemble",
    "no_crossing",
    "velocity_convergence_probe",
]

# P * L below this counts as reaching a node
TRAJECTORY_NODE_THRESHOLD = 1e-12
CDF_POINTS = 1 << 14
ABNORMAL_LIMIT = 0.01
PROBE_THRESHOLD = 1e-6


class DegenerateDensityError(ValueError):
    """The density has (numerically) zero mass."""


class EnsembleFailure(ArithmeticError):
    """Too many members terminated abnormally."""

    def __init__(self, message: str, census: dict):
        super().__init__(f"{message}: {census}")
        self.census = census


def _require_box(state: SpectralState):
    if state.basis.kind != BOX:
        raise StateError("trajectories are implemented for box states")


def velocity(state: SpectralState, x, t) -> np.ndarray:
    """Bohmian drift at paired points; NaN where psi vanishes exactly."""
    psi, dpsi = evaluate_at(state, x, t, derivative=True)
    b = state.basis
    with np.errstate(divide="ignore", invalid="ignore"):
        return (b.hbar / b.mass) * np.imag(np.conj(psi) * dpsi) / np.abs(psi) ** 2


# ---------------------------------------------------------------------------
# sampling


def tabulated_cdf(x: np.ndarray, density: np.ndarray):
    """Piecewise-linear CDF from density samples on an increasing grid."""
    density = np.asarray(density, dtype=float)
    if density.shape != x.shape or np.any(~np.isfinite(density)) or np.any(density < 0):
        raise ValueError("density must be finite, non-negative and match the grid")
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (density[1:] + density[:-1]) * np.diff(x))))
    mass = cum[-1]
    if not mass > 1e-300:
        raise DegenerateDensityError("density has zero mass")
    cum /= mass
    return x, cum


def _density_grid(state: SpectralState, t: float, points: int):
    grid = SpaceTimeGrid.box(state.basis, points + 1, [t], endpoints=True)
    psi = evaluate_series(state, grid)[:, 0]
    return grid.x, np.abs(psi) ** 2


def _cdf_function(x, cum):
    return lambda q: np.interp(q, x, cum)


def sample_from_density(x: np.ndarray, density: np.ndarray, count: int, seed: int) -> np.ndarray:
    """Inverse-CDF draws from a tabulated density; deterministic per seed."""
    if count < 1:
        raise ValueError("count must be at least 1")
    xs, cum = tabulated_cdf(np.asarray(x, dtype=float), density)
    u = np.random.default_rng(seed).uniform(0.0, 1.0, count)
    # keep only the ends of rising segments so flat stretches never attract draws
    rise = np.diff(cum) > 0
    keep = np.concatenate((rise, [False])) | np.concatenate(([False], rise))
    return np.interp(u, cum[keep], xs[keep])


def sample_initial_positions(state: SpectralState, count: int, seed: int, points: int = CDF_POINTS) -> np.ndarray:
    _require_box(state)
    x, P = _density_grid(state, 0.0, points)
    return sample_from_density(x, P, count, seed)


# ---------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True, eq=False)
class Trajectory:
    x0: float
    times: np.ndarray
    positions: np.ndarray  # NaN after early termination
    status: str
    steps: int
    rejected: int
    error_estimate: float
    min_step: float

    @property
    def final(self) -> float:
        return float(self.positions[-1])


def _stop_predicate(state: SpectralState):
    L = state.basis.length

    def stop(t, x):
        outside = (x <= 0.0) | (x >= L) | ~np.isfinite(x)
        inside = ~outside
        hit = outside.copy()
        if np.any(inside):
            psi = evaluate_at(state, x[inside], t[inside])
            hit[inside] = np.abs(psi) ** 2 * L < TRAJECTORY_NODE_THRESHOLD
        return hit

    return stop


def _rhs(state: SpectralState):
    def rhs(t, x):
        v = velocity(state, x, t)
        # a member pushed into a node mid-step gets a non-finite slope; the
        # error control then rejects the step
        return v

    return rhs


def _batch(state, x0, times, rtol, atol, shared=False):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1 or np.any(np.diff(times) < 0):
        raise ValueError("times must be a non-decreasing 1-d sequence")
    return integrate_batch(_rhs(state), x0, times, rtol=rtol, atol=atol, stop=_stop_predicate(state), shared=shared)


def integrate_trajectory(state: SpectralState, x0: float, times, rtol: float = 1e-8, atol: float | None = None) -> Trajectory:
    """One trajectory x' = v(x, t) recorded at ``times`` (times[0] is the start)."""
    _require_box(state)
    atol = 1e-3 * rtol * state.basis.length if atol is None else atol
    r = _batch(state, [x0], times, rtol, atol)
    return Trajectory(
        float(x0),
        r.times,
        r.positions[0],
        str(r.status[0]),
        int(r.steps[0]),
        int(r.rejected[0]),
        float(r.error_estimate[0]),
        float(r.min_step[0]),
    )


@dataclass(frozen=True, eq=False)
class Ensemble:
    positions: np.ndarray
    seed: int
    sampling: str = "inverse-cdf of |psi(x, 0)|^2"

    @property
    def count(self) -> int:
        return int(self.positions.size)

    @classmethod
    def sample(cls, state: SpectralState, count: int, seed: int) -> "Ensemble":
        return cls(sample_initial_positions(state, count, seed), seed)


@dataclass(frozen=True, eq=False)
class EnsembleReport:
    seed: int
    count: int
    times: np.ndarray
    positions: np.ndarray  # (members, times)
    status: np.ndarray
    ks: np.ndarray  # KS distance to |psi(., t)|^2 at each time
    census: dict
    ordered: bool  # no-crossing invariant
    error_estimate: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "count": self.count,
            "ks_by_t": [{"t": float(t), "ks": float(k)} for t, k in zip(self.times, self.ks)],
            "failure_census": self.census,
            "no_crossing": self.ordered,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def dump_csv(self, path) -> None:
        """Rows ``member,t,x,status``; terminated members stop at their last sample."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["member", "t", "x", "status"])
            for i in range(self.positions.shape[0]):
                for t, x in zip(self.times, self.positions[i]):
                    if np.isfinite(x):
                        w.writerow([i, repr(float(t)), repr(float(x)), self.status[i]])


def no_crossing(x0: np.ndarray, positions: np.ndarray) -> bool:
    """Ordering by initial position is preserved at every sample time."""
    order = np.argsort(x0, kind="stable")
    p = positions[order]
    for k in range(p.shape[1]):
        col = p[:, k]
        col = col[np.isfinite(col)]
        if np.any(np.diff(col) < 0):
            return False
    return True


def ks_distance(state: SpectralState, positions: np.ndarray, t: float, points: int = CDF_POINTS) -> float:
    x, P = _density_grid(state, t, points)
    xs, cum = tabulated_cdf(x, P)
    good = positions[np.isfinite(positions)]
    return float(stats.kstest(good, _cdf_function(xs, cum)).statistic)


def evolve_ensemble(
    state: SpectralState,
    ensemble: Ensemble,
    times,
    rtol: float = 1e-8,
    atol: float | None = None,
    max_abnormal: float = ABNORMAL_LIMIT,
) -> EnsembleReport:
    """Carry every member to each of ``times`` (starting at t = 0) and compare with |psi|^2.

    Raises EnsembleFailure if more than ``max_abnormal`` of the members
    end with node-approach or nonconvergent status.
    """
    _require_box(state)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times[0] != 0.0:
        times = np.concatenate(([0.0], times))
    atol = 1e-3 * rtol * state.basis.length if atol is None else atol
    # one shared step sequence keeps the members ordered exactly
    r = _batch(state, ensemble.positions, times, rtol, atol, shared=True)
    census = {s: int(np.sum(r.status == s)) for s in (COMPLETED, NODE_APPROACH, NONCONVERGENT)}
    abnormal = ensemble.count - census[COMPLETED]
    if abnormal > max_abnormal * ensemble.count:
        raise EnsembleFailure("more than 1% of trajectories terminated abnormally", census)
    ks = np.array([ks_distance(state, r.positions[:, k], t) for k, t in enumerate(times)])
    return EnsembleReport(
        ensemble.seed,
        ensemble.count,
        times,
        r.positions,
        r.status,
        ks,
        census,
        no_crossing(ensemble.positions, r.positions),
        r.error_estimate,
    )


# ---------------------------------------------------------------------------
# convergence of the velocity under truncation


@dataclass(frozen=True, eq=False)
class VelocityProbe:
    alpha: float
    x: float
    t: float
    phases: str
    schedule: np.ndarray
    values: np.ndarray  # v_N at each N in the schedule
    increments: np.ndarray  # |v_{2N} - v_N| for consecutive schedule entries
    decay: PowerFit | None
    threshold: float = PROBE_THRESHOLD

    @property
    def last_increment(self) -> float:
        return float(self.increments[-1])

    @property
    def converged(self) -> bool:
        return bool(self.last_increment < self.threshold)

    @property
    def verdict(self) -> str:
        return "converged" if self.converged else "nonconverged"

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "x": self.x,
            "t": self.t,
            "phases": self.phases,
            "schedule": self.schedule.tolist(),
            "values": self.values.tolist(),
            "increments": self.increments.tolist(),
            "increment_decay_exponent": None if self.decay is None else self.decay.exponent,
            "threshold": self.threshold,
            "verdict": self.verdict,
        }


def velocity_convergence_probe(
    alpha: float,
    x: float | None = None,
    t: float | None = None,
    schedule=None,
    phases: str = "unit",
    seed: int = 0,
    basis: BasisSpec | None = None,
    threshold: float = PROBE_THRESHOLD,
) -> VelocityProbe:
    """v_N(x, t) for the power-law state along a doubling schedule of N.

    Defaults: x = golden fraction of L, t = golden fraction of T_rev,
    N = 2^7 .. 2^16. The verdict looks only at the last increment.
    """
    basis = BasisSpec.box() if basis is None else basis
    x = GOLDEN * basis.length if x is None else float(x)
    t = GOLDEN * basis.revival_time if t is None else float(t)
    schedule = 2 ** np.arange(7, 17) if schedule is None else np.asarray(schedule, dtype=np.int64)
    if schedule.size < 2 or np.any(np.diff(schedule) <= 0):
        raise ValueError("schedule must be increasing with at least two entries")
    state = build_state(basis, CoefficientLaw.power_law(alpha, int(schedule[-1]), phases, seed))

    n = state.modes.astype(float)
    k = n * math.pi / basis.length
    ph = np.exp(-2j * math.pi * np.mod(n * n * (t / basis.revival_time), 1.0)) * state.raw_coefficients
    psi = np.cumsum(ph * np.sin(k * x))
    dpsi = np.cumsum(ph * k * np.cos(k * x))
    idx = schedule - 1
    with np.errstate(divide="ignore", invalid="ignore"):
        v = (basis.hbar / basis.mass) * np.imag(np.conj(psi[idx]) * dpsi[idx]) / np.abs(psi[idx]) ** 2
    inc = np.abs(np.diff(v))
    decay = None
    good = inc > 0
    if np.sum(good) >= 3:
        decay = fit_growth(schedule[1:][good], inc[good], decades=math.inf)
    return VelocityProbe(float(alpha), x, t, phases, schedule, v, inc, decay, threshold)
