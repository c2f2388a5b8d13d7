"""Dormand-Prince 5(4) for many independent scalar ODEs at once.

Every member keeps its own time, step size and error control; the right-hand
side is evaluated for all active members in one vectorised call. Members
stop at a user predicate (e.g. reaching a node) or when the step size
underflows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

COMPLETED = "completed"
NODE_APPROACH = "node-approach"
NONCONVERGENT = "nonconvergent-velocity"

# Butcher tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass(frozen=True, eq=False)
class BatchResult:
    times: np.ndarray  # (samples,)
    positions: np.ndarray  # (members, samples); NaN after early termination
    status: np.ndarray  # (members,) of str
    steps: np.ndarray
    rejected: np.ndarray
    error_estimate: np.ndarray  # accumulated |local error| per member
    min_step: np.ndarray


def integrate_batch(rhs, x0, times, rtol=1e-8, atol=1e-10, stop=None, max_steps=200_000, step_floor=1e-13, shared=False) -> BatchResult:
    """Integrate dx/dt = rhs(t, x) for every x0 and record x at ``times``.

    ``times`` must be increasing; ``times[0]`` is the start time. ``stop(t, x)``
    returns a boolean mask of members that must terminate with node-approach
    status after an accepted step.

    With ``shared`` all members advance on one step sequence controlled by
    the worst member. The one-step map is then a single increasing function
    of x, so the ordering of members cannot change (1-d flows).
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    times = np.asarray(times, dtype=float)
    m, k = x0.size, times.size
    span = max(times[-1] - times[0], 1e-300)

    out = np.full((m, k), np.nan)
    out[:, 0] = x0
    status = np.array([COMPLETED] * m, dtype=object)
    steps = np.zeros(m, dtype=np.int64)
    rejected = np.zeros(m, dtype=np.int64)
    err_acc = np.zeros(m)
    min_step = np.full(m, np.inf)

    t = np.full(m, times[0])
    x = x0.copy()
    target = np.ones(m, dtype=np.int64)
    active = np.full(m, k > 1)
    h = np.full(m, span / 100.0 if k > 1 else 0.0)
    first = np.zeros(m)
    have_first = np.zeros(m, dtype=bool)

    if stop is not None and k > 1:
        hit = stop(t, x)
        status[hit] = NODE_APPROACH
        active &= ~hit

    while np.any(active):
        idx = np.flatnonzero(active)
        ti, xi = t[idx], x[idx]
        tt = times[target[idx]]
        hi = np.minimum(h[idx], tt - ti)
        kst = np.empty((7, idx.size))
        # first-same-as-last: the last stage of an accepted step is the next first stage
        fresh = ~have_first[idx]
        kst[0] = first[idx]
        if np.any(fresh):
            kst[0, fresh] = rhs(ti[fresh], xi[fresh])
            first[idx[fresh]] = kst[0, fresh]
            have_first[idx[fresh]] = True
        for s in range(1, 7):
            xs = xi + hi * sum(a * kst[j] for j, a in enumerate(_A[s]))
            kst[s] = rhs(ti + _C[s] * hi, xs)
        x5 = xi + hi * (_B5 @ kst)
        local = np.abs(hi * (_E @ kst))
        scale = atol + rtol * np.maximum(np.abs(xi), np.abs(x5))
        err = local / scale
        if shared:
            worst = np.max(np.where(np.isfinite(err), err, np.inf))
            err = np.full(err.shape, worst)
        ok = np.isfinite(err) & (err <= 1.0)

        factor = np.where(err > 0, 0.9 * np.power(np.where(err > 0, err, 1.0), -0.2), 5.0)
        h_new = hi * np.clip(np.nan_to_num(factor, nan=0.2), 0.2, 5.0)
        rejected[idx[~ok]] += 1

        acc = idx[ok]
        reach = hi[ok] >= (tt[ok] - ti[ok])
        t[acc] = np.where(reach, tt[ok], ti[ok] + hi[ok])
        x[acc] = x5[ok]
        first[acc] = kst[6, ok]
        steps[acc] += 1
        err_acc[acc] += local[ok]
        min_step[acc] = np.minimum(min_step[acc], hi[ok])
        # a step shortened to land on a sample time says nothing against the longer one
        clamped = ok & (hi < h[idx])
        h[idx] = np.where(clamped, np.maximum(h[idx], h_new), h_new)

        done = acc[reach]
        out[done, target[done]] = x[done]
        target[done] += 1
        finished = done[target[done] >= k]
        active[finished] = False

        if stop is not None and acc.size:
            live = acc[active[acc]]
            hit = live[stop(t[live], x[live])]
            status[hit] = NODE_APPROACH
            active[hit] = False

        tiny = active & (h < step_floor * span)
        status[tiny] = NONCONVERGENT
        stuck = active & (steps + rejected >= max_steps)
        status[stuck] = NONCONVERGENT
        active &= ~(tiny | stuck)

    return BatchResult(times, out, status, steps, rejected, err_acc, min_step)
