"""Free evolution of a plane wave cut off by a slit, via momentum quadrature.

psi(x, 0) = L^-1/2 exp(i p0 x / hbar) on (-L/2, L/2). Its momentum
amplitude is a sinc, so

    psi(x, t) = 1/(pi sqrt(L)) * int dq sin(q L / 2 hbar) / q
                 * exp(i (q + p0) x / hbar - i (q + p0)^2 t / (2 m hbar))

with q = p - p0. The integrand decays only like 1/|q|. Inside |q| <= cutoff
the oscillatory integral is done panel by panel with Gauss-Legendre rules;
beyond it the leading integration-by-parts term is added in closed form and
the remainder is bounded, which fixes the cutoff for a requested tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import SLIT, BasisSpec, StateError

_GL_HI = np.polynomial.legendre.leggauss(10)
_GL_LO = np.polynomial.legendre.leggauss(6)

MAX_CUTOFF_WAVENUMBERS = 1e8


class SlitPrecisionError(ArithmeticError):
    """Requested accuracy not reachable inside the momentum cutoff."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error bound {achieved:.3g})")
        self.achieved = achieved


@dataclass(frozen=True)
class SlitEvaluation:
    values: np.ndarray
    error: np.ndarray  # estimated absolute error per point
    cutoff: np.ndarray  # momentum window half-width per point


def _tail(basis: BasisSpec, x: float, t: float, cutoff: float) -> tuple[complex, float]:
    """Leading asymptotic value of the integral beyond +-cutoff, and a bound on the rest.

    sin(a q)/q splits into two exponentials f e^{i Phi} with f = +-1/(2 i q).
    Integrating by parts twice past the stationary points gives
    int_cutoff^inf f e^{iPhi} = i u e^{iPhi} |_cutoff + R with u = f/Phi' and
    |R| <= 2 |u'/Phi'| at the cutoff (mirror image for the lower tail).
    """
    hb, m, p0 = basis.hbar, basis.mass, basis.p0
    a = basis.length / (2.0 * hb)
    curvature = -t / (m * hb)
    value, bound = 0.0j, 0.0
    for q, side in ((cutoff, 1.0), (-cutoff, -1.0)):
        for sign in (1.0, -1.0):
            rate = sign * a + x / hb - (q + p0) * t / (m * hb)
            # past the stationary point the phase rate must grow outward
            if rate == 0.0 or (t > 0 and rate * q > 0):
                return 0.0j, math.inf
            f = sign / (2j * q)
            fp = -sign / (2j * q * q)
            u = f / rate
            w = (fp / rate - f * curvature / rate**2) / rate
            phase = sign * a * q + (q + p0) * x / hb - (q + p0) ** 2 * t / (2.0 * m * hb)
            value += side * 1j * u * np.exp(1j * phase)
            bound += 2.0 * abs(w)
    scale = 1.0 / (math.pi * math.sqrt(basis.length))
    return scale * value, scale * bound


def _choose_cutoff(basis: BasisSpec, x: float, t: float, budget: float) -> tuple[float, complex, float]:
    hb, m, L = basis.hbar, basis.mass, basis.length
    cutoff = 8.0 * math.pi * hb / L
    if t > 0:
        stationary = m * (abs(x) + L / 2.0) / t + abs(basis.p0)
        cutoff = max(cutoff, 2.0 * stationary)
    limit = MAX_CUTOFF_WAVENUMBERS * hb / L
    tail, bound = _tail(basis, x, t, cutoff)
    while bound > budget and cutoff < limit:
        cutoff *= 2.0
        tail, bound = _tail(basis, x, t, cutoff)
    return cutoff, tail, bound


def _panel_quadrature(basis: BasisSpec, x: float, t: float, cutoff: float):
    hb, m, L, p0 = basis.hbar, basis.mass, basis.length, basis.p0
    rate = abs(x) / hb + L / (2.0 * hb) + (cutoff + abs(p0)) * t / (m * hb)
    width = min(math.pi / rate, cutoff)
    panels = int(math.ceil(2.0 * cutoff / width))
    edges = np.linspace(-cutoff, cutoff, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])

    def rule(nodes, weights):
        q = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
        p = q + p0
        f = (L / (2.0 * hb)) * np.sinc(q * L / (2.0 * math.pi * hb))
        f = f * np.exp(1j * (p * x / hb - p * p * t / (2.0 * m * hb)))
        return np.sum(f.reshape(panels, -1) * (half[:, None] * weights[None, :]))

    hi = rule(*_GL_HI)
    lo = rule(*_GL_LO)
    scale = 1.0 / (math.pi * math.sqrt(L))
    return scale * hi, scale * abs(hi - lo)


def evaluate_slit_wavefunction(basis: BasisSpec, x, t: float, tol: float = 1e-6) -> SlitEvaluation:
    """psi(x, t) for the slit state, with an absolute error estimate per point.

    Raises SlitPrecisionError if ``tol`` cannot be met (for instance exactly
    at the slit edges at t = 0, where the integral converges only
    conditionally).
    """
    if basis.kind != SLIT:
        raise StateError("evaluate_slit_wavefunction needs a slit basis")
    if t < 0:
        raise ValueError("t must be non-negative")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    values = np.empty(xs.shape, dtype=complex)
    errors = np.empty(xs.shape)
    cutoffs = np.empty(xs.shape)
    for i, xi in enumerate(xs.flat):
        cutoff, tail, tail_err = _choose_cutoff(basis, xi, t, 0.5 * tol)
        if not tail_err <= 0.5 * tol:
            raise SlitPrecisionError(f"momentum tail too large at x={xi}, t={t}", tail_err)
        val, quad_err = _panel_quadrature(basis, xi, t, cutoff)
        val += tail
        err = tail_err + quad_err
        if err > tol:
            raise SlitPrecisionError(f"quadrature error too large at x={xi}, t={t}", err)
        values.flat[i] = val
        errors.flat[i] = err
        cutoffs.flat[i] = cutoff
    return SlitEvaluation(values, errors, cutoffs)
