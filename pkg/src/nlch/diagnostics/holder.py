"""Parabolic Hölder exponent and constant from space/time structure functions.

All cell pairs at each dyadic separation are used rather than a random
subsample; grids here are small enough that the exhaustive maximum is cheap
and it makes the estimate deterministic.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..trajectory import Trajectory
from .degiorgi import DiagnosticError

N_FIT_SCALES = 4
# increments below this (relative to the field scale) are treated as roundoff
NOISE_FLOOR = 1e-10


@dataclass
class HolderEstimate:
    alpha: float
    c3: float
    alpha_interior: float
    c3_interior: float
    alpha_space: float | None
    alpha_time: float | None
    degenerate: bool
    n_snapshots: int

    def to_dict(self) -> dict:
        return asdict(self)


def _space_increments(v: np.ndarray, spacing, lo=None, hi=None) -> list[tuple[float, float]]:
    """``(r, max |v(x+r) - v(x)|)`` over dyadic shifts along each axis; axis 0 of ``v`` is time."""
    out = []
    for ax, h in enumerate(spacing, start=1):
        n = v.shape[ax]
        a, b = (0, n) if lo is None else (lo[ax - 1], hi[ax - 1])
        box = [slice(None)] * v.ndim
        for other in range(1, v.ndim):
            if other != ax and lo is not None:
                box[other] = slice(lo[other - 1], hi[other - 1])
        s = 1
        while s < b - a:
            sl0, sl1 = list(box), list(box)
            sl0[ax] = slice(a, b - s)
            sl1[ax] = slice(a + s, b)
            inc = float(np.max(np.abs(v[tuple(sl1)] - v[tuple(sl0)])))
            out.append((s * h, inc))
            s *= 2
    return out


def _time_increments(v: np.ndarray, times: np.ndarray, box=None) -> list[tuple[float, float]]:
    out = []
    w = v if box is None else v[(slice(None),) + box]
    lag = 1
    while lag < len(times):
        inc = float(np.max(np.abs(w[lag:] - w[:-lag])))
        out.append((float(np.mean(times[lag:] - times[:-lag])), inc))
        lag *= 2
    return out


def _slope(points: list[tuple[float, float]], n_fit: int, floor: float) -> float | None:
    """Least-squares log-log slope over the ``n_fit`` finest scales with increments above ``floor``."""
    pts = sorted(points)
    scales = sorted({r for r, m in pts if m > floor})[:n_fit]
    sel = [(r, m) for r, m in pts if r in scales and m > floor]
    if len({r for r, _ in sel}) < 2:
        return None
    lr = np.log([r for r, _ in sel])
    lm = np.log([m for _, m in sel])
    return float(np.polyfit(lr, lm, 1)[0])


def _fit(v, times, spacing, lo=None, hi=None, alpha=None):
    box = None if lo is None else tuple(slice(a, b) for a, b in zip(lo, hi))
    sp = _space_increments(v, spacing, lo, hi)
    tm = _time_increments(v, times, box) if len(times) > 1 else []
    floor = NOISE_FLOOR * max(1.0, float(np.max(np.abs(v))))
    degenerate = all(m <= floor for _, m in sp + tm)
    if degenerate and alpha is None:
        alpha = 1.0
    a_sp = _slope(sp, N_FIT_SCALES, floor)
    a_tm = _slope(tm, N_FIT_SCALES, floor)
    a_tm = None if a_tm is None else 2 * a_tm
    if alpha is None:
        cands = [a for a in (a_sp, a_tm) if a is not None]
        alpha = min(cands) if cands else 1.0
        alpha = float(np.clip(alpha, 0.0, 1.0))
    c3 = 0.0
    for r, m in sp:
        c3 = max(c3, m / r**alpha)
    for s, m in tm:
        c3 = max(c3, m / s ** (alpha / 2))
    return alpha, c3, a_sp, a_tm, degenerate


def holder_estimate(
    traj: Trajectory,
    window: tuple[float, float] | None = None,
    alpha: float | None = None,
    margin_fraction: float = 0.125,
) -> HolderEstimate:
    """Fit ``|phi(x1,t1) - phi(x2,t2)| <= C3 (|x1-x2|^alpha + |t1-t2|^(alpha/2))``.

    Space and time exponents come from the log-log slope of the maximal
    increment against separation over the finest resolved scales; alpha is the
    smaller of the two (time slopes doubled), clipped to [0, 1].  C3 is then
    the smallest constant covering every computed increment.  Pass ``alpha``
    to evaluate C3 at a fixed exponent.
    """
    if window is None:
        idx = np.arange(len(traj))
    else:
        idx = traj.indices_in(window[0] - 1e-12, window[1] + 1e-12)
    if len(idx) < 4:
        raise DiagnosticError(f"holder_estimate needs >= 4 snapshots in the window, got {len(idx)}")
    v = traj.snapshots[idx]
    times = traj.times[idx]
    d = traj.domain
    a, c3, a_sp, a_tm, degenerate = _fit(v, times, d.spacing, alpha=alpha)
    lo = [max(1, int(n * margin_fraction)) for n in d.cells]
    hi = [n - m for n, m in zip(d.cells, lo)]
    ai, ci, *_ = _fit(v, times, d.spacing, lo, hi, alpha=alpha)
    return HolderEstimate(
        alpha=a,
        c3=c3,
        alpha_interior=ai,
        c3_interior=ci,
        alpha_space=a_sp,
        alpha_time=a_tm,
        degenerate=degenerate,
        n_snapshots=len(idx),
    )
