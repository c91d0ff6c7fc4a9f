"""Empirical separation depth, the energy constant, and chemical-potential bounds."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..kernel import Kernel
from ..potential import FloryHuggins, PotentialParams
from ..trajectory import Trajectory
from .degiorgi import DiagnosticError


def _covers(traj: Trajectory, t0: float, what: str) -> None:
    if t0 > traj.t_end * (1 + 1e-12) or t0 < 0:
        raise DiagnosticError(f"{what}={t0} outside trajectory range [{traj.t_start}, {traj.t_end}]")


@dataclass
class SeparationProfile:
    tau: float
    delta_emp: float
    times: np.ndarray = field(repr=False)
    min_gap: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {"tau": self.tau, "delta_emp": self.delta_emp}


def gap_series(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """Per-step ``1 - sup|phi|`` from the series when present, else from snapshots."""
    if traj.series is not None and "min_gap" in traj.series:
        return np.asarray(traj.series["time"]), np.asarray(traj.series["min_gap"])
    flat = np.abs(traj.snapshots.reshape(len(traj), -1))
    return traj.times, 1.0 - flat.max(axis=1)


def separation_profile(traj: Trajectory, tau: float) -> SeparationProfile:
    _covers(traj, tau, "tau")
    t, gap = gap_series(traj)
    sel = t >= tau - 1e-12 * max(1.0, tau)
    return SeparationProfile(tau=tau, delta_emp=float(gap[sel].min()), times=t, min_gap=gap)


def energy_constant_estimate(traj: Trajectory, tau: float, p: PotentialParams, potential=None) -> float:
    """``sup_{t >= tau/2} ||F'(phi(t))||_{L1}`` over snapshots."""
    _covers(traj, tau / 2, "tau/2")
    pot = potential or FloryHuggins(p)
    d = traj.domain
    idx = traj.indices_in(tau / 2 - 1e-12 * max(1.0, tau))
    return max(d.lp_norm(pot.dF(traj.snapshots[i]), 1) for i in idx)


@dataclass
class MuBoundReport:
    c1: float
    delta: float
    delta_emp: float
    sup_mu: list[float] = field(repr=False)
    max_sup_mu: float = 0.0
    holds: bool = True
    c2: float = 0.0
    c2_windows: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def mu_snapshots(traj: Trajectory, k: Kernel, pot) -> np.ndarray:
    return np.stack([pot.dF(s) - k.apply(s) for s in traj.snapshots])


def dtmu_window_norm(times: np.ndarray, mu: np.ndarray, d, tau: float) -> tuple[float, int]:
    """``sup_{t >= tau} ||d_t mu||_{L2(t, t+1; L2)}`` for piecewise-linear ``mu`` in time.

    Windows start at snapshot times and are clipped at the last snapshot.
    """
    dt = np.diff(times)
    # piecewise-constant ||d_t mu||^2 on each segment, and its running integral
    seg = np.array([d.lp_norm(mu[i + 1] - mu[i], 2) ** 2 for i in range(len(dt))]) / dt**2
    cum = np.concatenate(([0.0], np.cumsum(seg * dt)))
    starts = np.nonzero(times >= tau - 1e-12 * max(1.0, tau))[0]
    best, n = 0.0, 0
    for i in starts[:-1] if len(starts) > 1 else starts:
        end = min(times[i] + 1.0, times[-1])
        j = min(np.searchsorted(times, end, side="right") - 1, len(dt) - 1)
        val = cum[j] - cum[i]
        if times[j] < end:
            val += seg[j] * (end - times[j])
        best = max(best, float(np.sqrt(max(val, 0.0))))
        n += 1
    return best, n


def mu_bound_check(
    traj: Trajectory, tau: float, delta: float, k: Kernel, p: PotentialParams, potential=None
) -> MuBoundReport:
    """``C1 = |F'(1 - delta)| + ||J||_{L1(B_M1)}`` against every snapshot with ``t >= tau``."""
    prof = separation_profile(traj, tau)
    if not 0 < delta <= prof.delta_emp:
        raise DiagnosticError(f"delta={delta} must lie in (0, delta_emp={prof.delta_emp}]")
    pot = potential or FloryHuggins(p)
    c1 = abs(float(pot.dF(1 - delta))) + k.l1_J
    idx = traj.indices_in(tau - 1e-12 * max(1.0, tau))
    sub = Trajectory(traj.domain, traj.times[idx], traj.snapshots[idx], traj.steps[idx])
    mu = mu_snapshots(sub, k, pot)
    sup_mu = [float(np.max(np.abs(m))) for m in mu]
    c2, nwin = (0.0, 0)
    if len(idx) >= 2:
        c2, nwin = dtmu_window_norm(sub.times, mu, traj.domain, tau)
    return MuBoundReport(
        c1=c1,
        delta=delta,
        delta_emp=prof.delta_emp,
        sup_mu=sup_mu,
        max_sup_mu=max(sup_mu),
        holds=all(s <= c1 for s in sup_mu),
        c2=c2,
        c2_windows=nwin,
    )
