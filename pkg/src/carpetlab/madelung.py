"""Polar (Madelung) variables and the residuals of the hydrodynamic equations.

psi = sqrt(P) exp(i S / hbar). If the Schrodinger equation holds pointwise,
P and S obey

    continuity:        dP/dt + d/dx (P v) = 0,          v = (1/m) dS/dx
    Hamilton-Jacobi:   dS/dt + (dS/dx)^2 / 2m + V - hbar^2 (sqrt P)'' / (2m sqrt P) = 0

Here time derivatives come from the truncated spectral sum (always finite)
and x-derivatives from central finite differences, so the residuals measure
whether the pair of equations survives grid refinement.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .spectral import (
    BOX,
    UNIFORM,
    BasisSpec,
    ComplexField,
    SpaceTimeGrid,
    SpectralState,
    StateError,
    evaluate_series,
)

NODE_THRESHOLD = 1e-12

_FIRST = {
    2: np.array([-0.5, 0.0, 0.5]),
    4: np.array([1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12]),
    6: np.array([-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60]),
}
_SECOND = {
    2: np.array([1.0, -2.0, 1.0]),
    4: np.array([-1.0 / 12, 4.0 / 3, -2.5, 4.0 / 3, -1.0 / 12]),
    6: np.array([1.0 / 90, -3.0 / 20, 1.5, -49.0 / 18, 1.5, -3.0 / 20, 1.0 / 90]),
}


class EmptyDecompositionError(ValueError):
    """Every point of a time slice is a node."""


@dataclass(frozen=True, eq=False)
class MadelungField:
    P: np.ndarray
    S: np.ndarray  # NaN on nodes
    node_mask: np.ndarray
    grid: SpaceTimeGrid
    basis: BasisSpec
    v: np.ndarray | None = None  # NaN on nodes

    def total_probability(self) -> np.ndarray:
        """Integral of P over x for each time (trapezoid rule)."""
        return np.trapezoid(self.P, self.grid.x, axis=0)


def node_mask(P: np.ndarray, threshold: float = NODE_THRESHOLD) -> np.ndarray:
    """Points with P below ``threshold`` times the slice maximum."""
    return P < threshold * P.max(axis=0, keepdims=True)


def _unwrap_segments(angle: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Unwrap along x inside each run of off-node points; nodes stay NaN."""
    out = np.full(angle.shape, np.nan)
    for j in range(angle.shape[1]):
        good = ~mask[:, j]
        idx = np.flatnonzero(good)
        if idx.size == 0:
            continue
        breaks = np.flatnonzero(np.diff(idx) > 1) + 1
        for run in np.split(idx, breaks):
            out[run, j] = np.unwrap(angle[run, j])
    return out


def polar_decompose(field: ComplexField, node_threshold: float = NODE_THRESHOLD, derivative: ComplexField | None = None) -> MadelungField:
    """P = |psi|^2 and S = hbar arg psi, unwrapped along x at each time.

    If ``derivative`` (d psi/dx on the same grid) is given, the velocity is
    filled in as well.
    """
    psi = field.values
    if not np.all(np.isfinite(psi)):
        raise ValueError("field contains non-finite values")
    P = np.abs(psi) ** 2
    if np.any(P.max(axis=0) == 0):
        raise EmptyDecompositionError("a time slice vanishes identically")
    mask = node_mask(P, node_threshold)
    S = field.basis.hbar * _unwrap_segments(np.angle(psi), mask)
    v = None
    if derivative is not None:
        v = velocity_field(field, derivative, node_threshold)
    return MadelungField(P, S, mask, field.grid, field.basis, v)


def velocity_field(psi: ComplexField, dpsi: ComplexField, node_threshold: float = NODE_THRESHOLD) -> np.ndarray:
    """v = (hbar/m) Im(conj(psi) psi') / |psi|^2, NaN at nodes."""
    if psi.values.shape != dpsi.values.shape:
        raise ValueError("psi and its derivative must share a grid")
    P = np.abs(psi.values) ** 2
    mask = node_mask(P, node_threshold)
    current = np.imag(np.conj(psi.values) * dpsi.values)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = (psi.basis.hbar / psi.basis.mass) * current / P
    v[mask] = np.nan
    return v


def _stencil(f: np.ndarray, coeffs: np.ndarray, h: float, power: int) -> np.ndarray:
    """Apply a centred stencil along axis 0; edges without a full stencil are NaN."""
    half = coeffs.size // 2
    out = np.full(f.shape, np.nan)
    acc = np.zeros((f.shape[0] - 2 * half,) + f.shape[1:])
    for k, c in enumerate(coeffs):
        if c != 0.0:
            acc = acc + c * f[k : k + acc.shape[0]]
    out[half : f.shape[0] - half] = acc / h**power
    return out


def _stencil_mask(mask: np.ndarray, order: int) -> np.ndarray:
    """True where any point of the centred stencil is a node or off-grid."""
    half = order // 2
    bad = mask.copy()
    for k in range(1, half + 1):
        bad[k:] |= mask[:-k]
        bad[:-k] |= mask[k:]
    bad[:half] = True
    bad[-half:] = True
    return bad


@dataclass(frozen=True, eq=False)
class ResidualField:
    name: str
    values: np.ndarray  # NaN where not evaluated
    dx: float
    stencil_order: int
    node_fraction: float

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.values)

    @property
    def sup(self) -> float:
        return float(np.nanmax(np.abs(self.values)))

    @property
    def l2(self) -> float:
        """Root-mean over times of the spatial L2 norm squared."""
        r = np.where(self.valid, self.values, 0.0)
        return float(np.sqrt(np.mean(np.sum(r * r, axis=0) * self.dx)))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dx": self.dx,
            "stencil_order": self.stencil_order,
            "node_fraction": self.node_fraction,
            "l2": self.l2,
            "sup": self.sup,
        }


def _check(state: SpectralState, order: int):
    if state.basis.kind != BOX:
        raise StateError("residuals are implemented for the box only")
    if order not in _FIRST:
        raise ValueError(f"stencil order must be one of {sorted(_FIRST)}")


def _fields(state: SpectralState, grid: SpaceTimeGrid):
    psi = evaluate_series(state, grid)
    dpsi = evaluate_series(state, grid, derivative=True)
    dpsi_dt = evaluate_series(state, grid, state.coefficients * (-1j * state.energies / state.basis.hbar))
    return psi, dpsi, dpsi_dt


def continuity_residual(state: SpectralState, grid: SpaceTimeGrid, stencil_order: int = 2, node_threshold: float = NODE_THRESHOLD) -> ResidualField:
    """dP/dt (spectral) + d/dx(P v) (finite differences of the current)."""
    _check(state, stencil_order)
    b = state.basis
    psi, dpsi, dpsi_dt = _fields(state, grid)
    P = np.abs(psi) ** 2
    mask = node_mask(P, node_threshold)
    dP_dt = 2.0 * np.real(np.conj(psi) * dpsi_dt)
    current = (b.hbar / b.mass) * np.imag(np.conj(psi) * dpsi)
    r = dP_dt + _stencil(current, _FIRST[stencil_order], grid.dx, 1)
    r[_stencil_mask(mask, stencil_order)] = np.nan
    return ResidualField("continuity", r, grid.dx, stencil_order, float(mask.mean()))


def hamilton_jacobi_residual(state: SpectralState, grid: SpaceTimeGrid, stencil_order: int = 2, node_threshold: float = NODE_THRESHOLD) -> ResidualField:
    """dS/dt (spectral) + (S')^2/2m - hbar^2 (sqrt P)''/(2m sqrt P), V = 0 inside the box.

    S' comes from differencing the unwrapped phase and (sqrt P)'' from
    differencing sqrt P.
    """
    _check(state, stencil_order)
    b = state.basis
    psi, _, dpsi_dt = _fields(state, grid)
    P = np.abs(psi) ** 2
    mask = node_mask(P, node_threshold)
    with np.errstate(divide="ignore", invalid="ignore"):
        dS_dt = b.hbar * np.imag(np.conj(psi) * dpsi_dt) / P
        S = b.hbar * _unwrap_segments(np.angle(psi), mask)
        dS_dx = _stencil(S, _FIRST[stencil_order], grid.dx, 1)
        R = np.sqrt(P)
        quantum = b.hbar**2 * _stencil(R, _SECOND[stencil_order], grid.dx, 2) / (2.0 * b.mass * R)
        r = dS_dt + dS_dx**2 / (2.0 * b.mass) - quantum
    r[_stencil_mask(mask, stencil_order)] = np.nan
    return ResidualField("hamilton_jacobi", r, grid.dx, stencil_order, float(mask.mean()))


def refinement_table(state: SpectralState, divisions, t, stencil_order: int = 2) -> list[dict]:
    """Residual norms for a fixed state on successively finer box lattices."""
    rows = []
    for m in divisions:
        grid = SpaceTimeGrid.box(state.basis, int(m) - 1, t, endpoints=False)
        c = continuity_residual(state, grid, stencil_order)
        hj = hamilton_jacobi_residual(state, grid, stencil_order)
        rows.append({
            "modes": state.size,
            "divisions": int(m),
            "dx": grid.dx,
            "continuity_l2": c.l2,
            "continuity_sup": c.sup,
            "hj_l2": hj.l2,
            "hj_sup": hj.sup,
            "node_fraction": hj.node_fraction,
        })
    return rows


def coupled_sweep(build, mode_counts, t, cells_per_mode: int = 8, stencil_order: int = 2) -> list[dict]:
    """Refine modes and grid together (h proportional to 1/N).

    ``build(N)`` returns the state truncated at N modes.
    """
    rows = []
    for n in mode_counts:
        state = build(int(n))
        rows += refinement_table(state, [cells_per_mode * (int(n) + 1)], t, stencil_order)
    return rows


def residual_report(rows: list[dict], stencil_order: int) -> str:
    return json.dumps({"stencil_order": stencil_order, "refinement_table": rows}, indent=2)


@dataclass(frozen=True)
class StationarityGap:
    initial_grad_P_sup: float
    initial_grad_S_sup: float
    t_probe: float
    deviation_from_uniform: float  # sup |P(x, t) - 1/L| on the central interior
    deviation_from_initial: float  # sup |P(x, t) - P(x, 0)| on the whole grid

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def stationarity_gap(state: SpectralState, t_probe: float, interior_fraction: float = 0.5, x_count: int = 1 << 14) -> StationarityGap:
    """Constant initial data has zero interior gradients, yet P moves.

    (a) gradients of the ideal initial fields P = 1/L, S = 0 over the
    central ``interior_fraction`` of the box; (b) how far the evolved
    density strays from 1/L there; (c) distance of P(., t_probe) from
    P(., 0) for the truncated state (zero at a full revival).
    """
    if state.law.variant != UNIFORM:
        raise StateError("stationarity_gap needs a state built from the uniform law")
    L = state.basis.length
    grid = SpaceTimeGrid.box(state.basis, x_count + 1, [0.0, t_probe], endpoints=True)
    x = grid.x
    central = np.abs(x - L / 2) <= interior_fraction * L / 2
    xc = x[central]
    P_ideal = np.full(xc.shape, 1.0 / L)
    S_ideal = np.zeros(xc.shape)
    grad_P = np.gradient(P_ideal, xc)
    grad_S = np.gradient(S_ideal, xc)

    psi = evaluate_series(state, grid)
    P = np.abs(psi) ** 2
    return StationarityGap(
        float(np.max(np.abs(grad_P))),
        float(np.max(np.abs(grad_S))),
        float(t_probe),
        float(np.max(np.abs(P[central, 1] - 1.0 / L))),
        float(np.max(np.abs(P[:, 1] - P[:, 0]))),
    )
