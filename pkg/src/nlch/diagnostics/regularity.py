"""Power-law fits of post-tau suprema and mixed space-time gradient norms."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from ..kernel import Kernel
from ..trajectory import Trajectory
from .degiorgi import DiagnosticError
from .holder import holder_estimate
from .separation import dtmu_window_norm, mu_snapshots

PQ_PAIRS = ((2, math.inf), (4, 4), (6, 2))
# (4, 4) does not satisfy the relation; the admissible partner of p = 4 is q = 8/3
EXTRA_PAIRS = ((4, 8 / 3),)
P_VALUES = sorted({p for p, _ in PQ_PAIRS + EXTRA_PAIRS})
QUANTITIES = ("dtphi_proxy", "mu_h1", "phi_h1", "dF_h1")


def admissible(p: float, q: float) -> bool:
    """``(3p - 6) / (2p) == 2 / q`` with ``p`` in [2, 6]."""
    return 2 <= p <= 6 and math.isclose((3 * p - 6) / (2 * p), 2 / q, abs_tol=1e-12)


@dataclass
class RegularityReport:
    taus: list[float]
    sups: dict[str, list[float]]
    fits: dict[str, tuple[float, float]]
    c0_fit: float
    beta_fit: float
    c1_mu_inf: float
    c2_dtmu: float
    c3_holder: float
    alpha_holder: float
    lqlp_norms: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _dtphi_proxy(traj: Trajectory, tau: float) -> float:
    """``sup_{t >= tau} ||d_t phi||_{L2(t, t+1; L2)}`` from the per-step series."""
    t = np.asarray(traj.series["time"])
    v = np.asarray(traj.series["l2_dtphi"])
    cum = cumulative_trapezoid(v**2, t, initial=0.0)
    starts = np.nonzero(t >= tau - 1e-12)[0]
    ends = np.minimum(t[starts] + 1.0, t[-1])
    vals = np.interp(ends, t, cum) - cum[starts]
    return float(np.sqrt(np.max(np.maximum(vals, 0.0))))


def _fit_power(taus: np.ndarray, vals: np.ndarray) -> tuple[float, float]:
    """``(C0, beta)`` with ``vals ~ C0 tau^-beta``; all-zero data fits to ``(0, 0)``."""
    pos = vals > 0
    if pos.sum() < 2:
        return float(vals.max(initial=0.0)), 0.0
    slope, icpt = np.polyfit(np.log(taus[pos]), np.log(vals[pos]), 1)
    return float(math.exp(icpt)), float(-slope)


def _lqlp(times: np.ndarray, norms: np.ndarray, tau: float, q: float) -> float:
    """``sup_{t >= tau}`` of the ``L^q(t, t+1)`` norm of a sampled time series."""
    best = 0.0
    starts = np.nonzero(times >= tau - 1e-12)[0]
    for i in starts:
        sel = (times >= times[i]) & (times <= times[i] + 1.0 + 1e-12)
        tt, nn = times[sel], norms[sel]
        if math.isinf(q):
            val = float(nn.max())
        elif len(tt) < 2:
            continue
        else:
            val = float(np.trapezoid(nn**q, tt) ** (1 / q))
        best = max(best, val)
    return best


def regularity_scaling(runs: list[Trajectory], taus, k: Kernel, pot) -> RegularityReport:
    """Suprema over ``t >= tau`` (max over runs) fitted as ``C0 tau^-beta``."""
    taus = np.asarray(sorted(taus), dtype=float)
    if len(taus) < 3:
        raise DiagnosticError("regularity_scaling needs at least 3 tau values")
    if not runs:
        raise DiagnosticError("no runs given")
    for r in runs:
        if r.series is None:
            raise DiagnosticError("regularity_scaling needs the per-step series of each run")
        if taus[-1] > r.t_end:
            raise DiagnosticError(f"tau={taus[-1]} beyond trajectory end {r.t_end}")
    d = runs[0].domain

    per_run = []
    for r in runs:
        mu = mu_snapshots(r, k, pot)
        per_run.append(
            {
                "mu": mu,
                "phi_h1": np.array([d.h1_norm(s) for s in r.snapshots]),
                "dF_h1": np.array([d.h1_norm(pot.dF(s)) for s in r.snapshots]),
                "mu_inf": np.abs(mu.reshape(len(r), -1)).max(axis=1),
                "grad_mu": {p: np.array([d.lp_norm(d.cell_gradient(m), p) for m in mu]) for p in P_VALUES},
                "grad_phi": {p: np.array([d.lp_norm(d.cell_gradient(s), p) for s in r.snapshots]) for p in P_VALUES},
            }
        )

    sups = {q: [] for q in QUANTITIES}
    for tau in taus:
        dtp, muh, phh, dfh = [], [], [], []
        for r, pr in zip(runs, per_run):
            st = np.asarray(r.series["time"]) >= tau - 1e-12
            idx = r.indices_in(tau - 1e-12)
            dtp.append(_dtphi_proxy(r, tau))
            muh.append(float(np.max(np.asarray(r.series["h1_mu"])[st])))
            phh.append(float(pr["phi_h1"][idx].max()))
            dfh.append(float(pr["dF_h1"][idx].max()))
        for name, vals in zip(QUANTITIES, (dtp, muh, phh, dfh)):
            sups[name].append(max(vals))

    fits = {name: _fit_power(taus, np.array(v)) for name, v in sups.items()}
    worst = max(fits, key=lambda n: fits[n][1])

    tau0 = float(taus[0])
    c1 = max(float(pr["mu_inf"][r.indices_in(tau0 - 1e-12)].max()) for r, pr in zip(runs, per_run))
    c2 = 0.0
    alpha, c3 = 1.0, 0.0
    for r, pr in zip(runs, per_run):
        idx = r.indices_in(tau0 - 1e-12)
        if len(idx) >= 2:
            c2 = max(c2, dtmu_window_norm(r.times[idx], pr["mu"][idx], d, tau0)[0])
    hold = [holder_estimate(r, (tau0, tau0 + 1.0)) for r in runs if len(r.indices_in(tau0, tau0 + 1.0)) >= 4]
    if hold:
        alpha = min(h.alpha for h in hold)
        c3 = max(holder_estimate(r, (tau0, tau0 + 1.0), alpha=alpha).c3 for r in runs)

    table = []
    for p, q in PQ_PAIRS + EXTRA_PAIRS:
        for tau in taus:
            gm = max(_lqlp(r.times, pr["grad_mu"][p], tau, q) for r, pr in zip(runs, per_run))
            gp = max(_lqlp(r.times, pr["grad_phi"][p], tau, q) for r, pr in zip(runs, per_run))
            table.append(
                {"p": p, "q": q, "admissible": admissible(p, q), "tau": float(tau), "grad_mu": gm, "grad_phi": gp}
            )
    return RegularityReport(
        taus=[float(t) for t in taus],
        sups=sups,
        fits=fits,
        c0_fit=fits[worst][0],
        beta_fit=fits[worst][1],
        c1_mu_inf=c1,
        c2_dtmu=c2,
        c3_holder=c3,
        alpha_holder=alpha,
        lqlp_norms=table,
    )
