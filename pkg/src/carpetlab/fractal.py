"""Box-counting and variation dimensions of sampled graphs.

Graphs are normalised to the unit square before counting. The scale window
is tied to the bandwidth of the generating series: a trigonometric sum with
B cycles per period is smooth below its shortest wavelength, so scales finer
than 8/B (or 8 sample spacings) only measure the truncation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .spectral import (
    BOX,
    GOLDEN,
    SpaceTimeGrid,
    SpectralState,
    StateError,
    _fast_spatial,
    _fast_temporal,
    revival_lattice,
)

BOX_COUNTING = "box-counting"
VARIATION = "variation"

SPATIAL = "spatial"
TEMPORAL = "temporal"

OBSERVABLES = ("re_psi", "im_psi", "density", "re_dpsi")

SPACE_FILLING = 1.9


class InsufficientScalesError(ValueError):
    """The scale window holds fewer than the minimum number of dyadic scales."""


@dataclass(frozen=True, eq=False)
class GraphSamples:
    """Ordinates on a uniform abscissa covering one period (both ends included)."""

    x: np.ndarray
    y: np.ndarray
    section: str
    modes: int | None = None
    bandwidth: float | None = None  # cycles per period of the fastest component
    out_of_regime: bool = False

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("abscissa and ordinates must be 1-d of equal length")
        if x.size < 3:
            raise ValueError("need at least three samples")
        if not np.all(np.isfinite(y)):
            raise ValueError("ordinates must be finite")
        dx = np.diff(x)
        if not (np.all(dx > 0) and np.allclose(dx, dx[0], rtol=1e-9, atol=0.0)):
            raise ValueError("abscissa must be uniform and increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def intervals(self) -> int:
        return self.x.size - 1

    def dump_csv(self, path) -> None:
        np.savetxt(path, np.column_stack([self.x, self.y]), delimiter=",", fmt="%.17g", header="x,y", comments="")


@dataclass(frozen=True)
class WindowPolicy:
    """Dyadic scales eps = 2^-k between eps_min and eps_max (unit-square units)."""

    floor_factor: float = 8.0  # eps_min >= floor_factor / bandwidth and floor_factor sample spacings
    ceiling: float = 1.0 / 8.0
    min_scales: int = 4

    def levels(self, samples: GraphSamples) -> np.ndarray:
        eps_min = self.floor_factor / samples.intervals
        if samples.bandwidth:
            eps_min = max(eps_min, self.floor_factor / samples.bandwidth)
        k_lo = int(math.ceil(-math.log2(self.ceiling) - 1e-12))
        k_hi = int(math.floor(-math.log2(eps_min) + 1e-12))
        ks = np.arange(k_lo, k_hi + 1)
        if ks.size < self.min_scales:
            raise InsufficientScalesError(
                f"window [{eps_min:.3g}, {self.ceiling:.3g}] holds {ks.size} dyadic scales, need {self.min_scales}"
            )
        return ks


@dataclass(frozen=True, eq=False)
class FractalEstimate:
    method: str
    D: float
    stderr: float
    r2: float
    window: tuple[float, float]
    eps: np.ndarray
    counts: np.ndarray  # box counts, or the variation sums

    @property
    def space_filling(self) -> bool:
        return self.D > SPACE_FILLING

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "D": self.D,
            "stderr": self.stderr,
            "window": list(self.window),
            "counts": [{"eps": float(e), "count": float(c)} for e, c in zip(self.eps, self.counts)],
            "R2": self.r2,
            "space_filling": self.space_filling,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _normalised(samples: GraphSamples) -> np.ndarray:
    y = samples.y
    span = y.max() - y.min()
    if span == 0:
        return np.zeros_like(y)
    return (y - y.min()) / span


def _column_oscillation(y: np.ndarray, columns: int) -> np.ndarray:
    """max - min of y over each of ``columns`` equal columns; neighbours share the edge sample."""
    n = y.size - 1
    edges = np.round(np.arange(columns + 1) * (n / columns)).astype(np.int64)
    if np.any(np.diff(edges) < 1):
        raise InsufficientScalesError("fewer samples than columns")
    starts = edges[:-1]
    hi = np.maximum(np.maximum.reduceat(y[:-1], starts), y[edges[1:]])
    lo = np.minimum(np.minimum.reduceat(y[:-1], starts), y[edges[1:]])
    return hi - lo


def _fit(ks, values):
    res = stats.linregress(ks * math.log(2.0), np.log(values))
    return float(res.slope), float(res.stderr), float(res.rvalue**2)


def box_count_dimension(samples: GraphSamples, policy: WindowPolicy = WindowPolicy()) -> FractalEstimate:
    """Slope of log N(eps) against log(1/eps) over the window.

    Each column of width eps needs ceil(oscillation / eps) boxes (at least one).
    """
    ks = policy.levels(samples)
    y = _normalised(samples)
    counts = np.empty(ks.size)
    for i, k in enumerate(ks):
        cols = 1 << int(k)
        eps = 1.0 / cols
        osc = _column_oscillation(y, cols)
        counts[i] = np.sum(np.maximum(1.0, np.ceil(osc / eps - 1e-9)))
    slope, err, r2 = _fit(ks, counts)
    eps = 2.0 ** -ks.astype(float)
    return FractalEstimate(BOX_COUNTING, slope, err, r2, (float(eps[-1]), float(eps[0])), eps, counts)


def variation_dimension(samples: GraphSamples, policy: WindowPolicy = WindowPolicy()) -> FractalEstimate:
    """V(eps) = eps * sum of column oscillations scales like eps^(2 - D)."""
    ks = policy.levels(samples)
    y = _normalised(samples)
    sums = np.empty(ks.size)
    for i, k in enumerate(ks):
        cols = 1 << int(k)
        sums[i] = np.sum(_column_oscillation(y, cols)) / cols
    if np.any(sums <= 0):
        # a constant graph has no oscillation at all: dimension one
        eps = 2.0 ** -ks.astype(float)
        return FractalEstimate(VARIATION, 1.0, 0.0, 1.0, (float(eps[-1]), float(eps[0])), eps, sums)
    slope, err, r2 = _fit(ks, sums)
    eps = 2.0 ** -ks.astype(float)
    return FractalEstimate(VARIATION, 2.0 + slope, err, r2, (float(eps[-1]), float(eps[0])), eps, sums)


def synthetic_fourier_series(z: float, modes: int, seed: int = 0, samples: int | None = None) -> GraphSamples:
    """Re sum_{n<=N} n^-z exp(i(n x + phi_n)) on [0, 2 pi], random phases.

    ``samples`` intervals (default 8 N rounded up to a power of two) plus
    the closing endpoint.
    """
    if modes < 1:
        raise ValueError("need at least one mode")
    samples = 1 << int(math.ceil(math.log2(8 * modes))) if samples is None else int(samples)
    if samples <= modes:
        raise ValueError("need more samples than modes")
    rng = np.random.default_rng(seed)
    n = np.arange(1, modes + 1)
    amp = np.zeros(samples, dtype=complex)
    amp[n] = n.astype(float) ** (-z) * np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, modes))
    f = np.real(np.fft.ifft(amp)) * samples
    y = np.append(f, f[0])
    x = 2.0 * math.pi * np.arange(samples + 1) / samples
    return GraphSamples(x, y, "synthetic", modes, float(modes), not (0.5 < z <= 1.5))


def _observable(values: np.ndarray, observable: str) -> np.ndarray:
    if observable in ("re_psi", "re_dpsi"):
        return values.real
    if observable == "im_psi":
        return values.imag
    if observable == "density":
        return np.abs(values) ** 2
    raise ValueError(f"observable must be one of {OBSERVABLES}")


def extract_section(
    state: SpectralState,
    direction: str = SPATIAL,
    fixed: float | None = None,
    observable: str = "density",
    resolution: int = 1 << 15,
) -> GraphSamples:
    """Sample an observable along a spatial (fixed t) or temporal (fixed x) section.

    Spatial sections use the sine/cosine transform on the lattice j L / M
    (M = ``resolution``); temporal sections cover one revival with M times
    and use the frequency-scatter FFT. Defaults put the fixed coordinate at
    the golden fraction of its period.
    """
    if state.basis.kind != BOX:
        raise StateError("sections are implemented for the box")
    if observable not in OBSERVABLES:
        raise ValueError(f"observable must be one of {OBSERVABLES}")
    b = state.basis
    N = int(state.modes.max())
    # cycles per period of the fastest component of each observable
    if direction == SPATIAL:
        t = GOLDEN * b.revival_time if fixed is None else float(fixed)
        grid = SpaceTimeGrid.box(b, resolution + 1, [t], endpoints=True)
        field = _fast_spatial(state, grid, derivative=observable == "re_dpsi")
        y = _observable(field.values[:, 0], observable)
        bandwidth = float(N) if observable == "density" else N / 2.0
        return GraphSamples(grid.x, y, f"spatial t={t!r}", state.size, bandwidth)
    if direction == TEMPORAL:
        if observable == "re_dpsi":
            raise ValueError("temporal sections of the derivative are not provided")
        x = GOLDEN * b.length if fixed is None else float(fixed)
        times = revival_lattice(b, resolution)
        grid = _PointGrid(x, times)
        field = _fast_temporal(state, grid)
        y = _observable(field.values[0], observable)
        y = np.append(y, y[0])
        t = np.append(times, b.revival_time)
        bandwidth = 2.0 * float(N) ** 2 if observable == "density" else float(N) ** 2
        return GraphSamples(t, y, f"temporal x={x!r}", state.size, bandwidth)
    raise ValueError("direction must be 'spatial' or 'temporal'")


class _PointGrid:
    """A single x-sample with a list of times (duck-types SpaceTimeGrid)."""

    def __init__(self, x: float, t: np.ndarray):
        self.x = np.array([x])
        self.t = np.asarray(t, dtype=float)
