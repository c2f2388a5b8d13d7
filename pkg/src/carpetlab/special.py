"""Special functions needed by the spectral bases.

Only two things live here: the Riemann zeta function for real arguments
s > 1 (used to normalise the Kerr number-state expansion) and the
normalised Hermite functions evaluated by a rescaled three-term recurrence.
"""

from __future__ import annotations

import math

import numpy as np

# Bernoulli numbers B_2, B_4, B_6, B_8 for the Euler-Maclaurin tail.
_BERNOULLI = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0)

_RESCALE_AT = 1e150


class HermiteRangeError(ArithmeticError):
    """Raised when the Hermite recurrence produces a non-finite value."""


def zeta(s: float, cutoff: int = 1000) -> float:
    """Riemann zeta for real ``s > 1``.

    Direct summation up to ``cutoff - 1`` followed by the integral tail and
    four Euler-Maclaurin corrections. For the arguments used in this package
    (s >= 2) the result is good to a few ulps.
    """
    if s <= 1.0:
        raise ValueError(f"zeta(s) diverges for s <= 1 (got s={s})")
    m = float(cutoff)
    n = np.arange(cutoff - 1, 0, -1, dtype=float)  # small terms first
    head = math.fsum(n ** (-s))
    tail = m ** (1.0 - s) / (s - 1.0) + 0.5 * m ** (-s)
    rising = s  # s (s+1) ... (s+2k-2)
    for k, b2k in enumerate(_BERNOULLI, start=1):
        tail += b2k / math.factorial(2 * k) * rising * m ** (-s - 2 * k + 1)
        rising *= (s + 2 * k - 1) * (s + 2 * k)
    return head + tail


def _recurrence(n_max: int, q: np.ndarray, keep: np.ndarray | None):
    """Yield (n, h_n(q)) for n = 0..n_max, un-scaling only rows in ``keep``."""
    q = np.asarray(q, dtype=float)
    log_scale = -0.5 * q * q
    prev = np.zeros_like(q)
    cur = np.full_like(q, math.pi ** -0.25)
    for n in range(n_max + 1):
        if keep is None or keep[n]:
            out = cur * np.exp(log_scale)
            if not np.all(np.isfinite(out)):
                raise HermiteRangeError(f"non-finite Hermite value at n={n}")
            yield n, out
        if n == n_max:
            break
        nxt = math.sqrt(2.0 / (n + 1)) * q * cur - math.sqrt(n / (n + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE_AT
        if np.any(big):
            s = np.abs(cur[big])
            cur[big] /= s
            prev[big] /= s
            log_scale[big] += np.log(s)
        if not np.all(np.isfinite(cur)):
            raise HermiteRangeError(f"recurrence overflow at n={n + 1}")


def hermite_functions(n_max: int, q) -> np.ndarray:
    """Table of orthonormal Hermite functions h_0..h_{n_max} at points q.

    Returns an array of shape ``(n_max + 1, len(q))``. Each recurrence step
    carries its own normalisation, and rows are periodically rescaled with
    the scale folded into the Gaussian factor, so large n and large |q| do
    not overflow.
    """
    q = np.atleast_1d(np.asarray(q, dtype=float))
    table = np.empty((n_max + 1, q.size))
    for n, row in _recurrence(n_max, q, None):
        table[n] = row
    return table


def hermite_rows(ns, q) -> np.ndarray:
    """Hermite functions h_n(q) for the (sorted, unique) indices in ``ns`` only."""
    ns = np.asarray(ns, dtype=int)
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if ns.size == 0:
        return np.empty((0, q.size))
    if np.any(ns < 0):
        raise ValueError("Hermite index must be non-negative")
    keep = np.zeros(int(ns.max()) + 1, dtype=bool)
    keep[ns] = True
    rows = {n: row for n, row in _recurrence(int(ns.max()), q, keep)}
    return np.stack([rows[int(n)] for n in ns])


def quadrature_eigenfunctions(ns, x) -> np.ndarray:
    """Number-state wavefunctions in the quadrature X = (a + a^dagger)/2.

    With q = (a + a^dagger)/sqrt(2) the standard oscillator coordinate,
    X = q/sqrt(2), so psi_n(x) = 2**(1/4) h_n(sqrt(2) x), normalised in x.
    """
    x = np.asarray(x, dtype=float)
    return 2.0 ** 0.25 * hermite_rows(ns, math.sqrt(2.0) * x)
