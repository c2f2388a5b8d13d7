"""Log-log growth fits and convergence verdicts for partial-sum sequences."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

EXPONENT_TOL = 0.05
CAUCHY_TOL = 1e-8

DIVERGENT = "divergent"
CONVERGENT = "convergent"
UNDECIDED = "undecided"


@dataclass(frozen=True)
class PowerFit:
    exponent: float
    stderr: float
    r2: float
    window: tuple[int, int]
    n_points: int

    def to_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "stderr": self.stderr,
            "r2": self.r2,
            "window": list(self.window),
            "n_points": self.n_points,
        }


def geometric_schedule(n_max: int, per_decade: int = 10, start: int = 1) -> np.ndarray:
    """Increasing integer schedule from ``start`` to ``n_max`` (both included)."""
    if n_max < start:
        raise ValueError(f"n_max={n_max} below start={start}")
    decades = np.log10(n_max / start)
    count = max(int(np.ceil(decades * per_decade)) + 1, 2)
    ns = np.unique(np.round(start * np.logspace(0.0, decades, count)).astype(np.int64))
    ns[-1] = n_max
    return np.unique(ns)


def fit_growth(ns, values, decades: float = 2.0) -> PowerFit:
    """OLS fit of log|values| against log ns over the last ``decades`` of ns."""
    ns = np.asarray(ns, dtype=float)
    values = np.abs(np.asarray(values, dtype=float))
    sel = (ns >= ns[-1] / 10.0**decades) & (values > 0)
    if np.count_nonzero(sel) < 3:
        raise ValueError("insufficient points to fit a growth exponent")
    res = stats.linregress(np.log(ns[sel]), np.log(values[sel]))
    return PowerFit(
        exponent=float(res.slope),
        stderr=float(res.stderr),
        r2=float(res.rvalue**2),
        window=(int(ns[sel][0]), int(ns[sel][-1])),
        n_points=int(np.count_nonzero(sel)),
    )


def final_decade_increment(cumulative, n_end: int | None = None) -> float:
    """Largest single-step change of a cumulative sequence over its final decade.

    ``cumulative[k]`` is the partial sum with k+1 terms.
    """
    cumulative = np.asarray(cumulative, dtype=float)
    n_end = cumulative.size if n_end is None else n_end
    lo = max(int(n_end // 10), 1)
    steps = np.abs(np.diff(cumulative[lo - 1 : n_end]))
    return float(steps.max()) if steps.size else 0.0


def verdict(fit: PowerFit, increment: float, cauchy_tol: float = CAUCHY_TOL) -> str:
    """Classify a partial-sum sequence.

    Growth exponent above EXPONENT_TOL is divergent. Otherwise the sequence
    is convergent only if its final-decade increments fall below
    ``cauchy_tol``; a flat but still-moving sequence is undecided.
    """
    if fit.exponent > EXPONENT_TOL:
        return DIVERGENT
    if increment < cauchy_tol:
        return CONVERGENT
    return UNDECIDED
