"""De Giorgi level-set sequences on a trajectory window."""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from ..kernel import Kernel
from ..potential import FloryHuggins, PotentialParams
from ..trajectory import Trajectory


class DiagnosticError(ValueError):
    """Precondition of a diagnostic not met (bad parameters, thin data, range)."""


@dataclass(frozen=True)
class DeGiorgiParams:
    T: float
    tau_tilde: float
    delta: float
    n_levels: int = 10
    sign: Literal["plus", "minus"] = "plus"

    def __post_init__(self):
        if not self.tau_tilde > 0:
            raise DiagnosticError("tau_tilde must be > 0")
        if not self.delta > 0:
            raise DiagnosticError("delta must be > 0")
        if self.n_levels < 1:
            raise DiagnosticError("n_levels must be >= 1")
        if self.sign not in ("plus", "minus"):
            raise DiagnosticError("sign must be 'plus' or 'minus'")
        if self.T - 3 * self.tau_tilde < 0:
            raise DiagnosticError("T - 3 tau_tilde must be >= 0")

    def levels(self) -> tuple[np.ndarray, np.ndarray]:
        """``t_{-1..n_levels}`` and ``k_{0..n_levels}``."""
        n = np.arange(self.n_levels + 1)
        t = np.empty(self.n_levels + 2)
        t[0] = self.T - 3 * self.tau_tilde
        t[1:] = t[0] + np.cumsum(self.tau_tilde / 2.0**n)
        k = 1 - self.delta - self.delta / 2.0**n
        return t, k


@dataclass
class DeGiorgiReport:
    t_n: list[float]
    k_n: list[float]
    y_n: list[float]
    x_n: list[float]
    sup_phi_window: float
    decayed: bool
    po_holds: bool
    snapshots_per_level: list[int] = field(repr=False)
    y0_log_threshold: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "t_n", "k_n", "y_n", "x_n"])
            for n, row in enumerate(zip(self.t_n, self.k_n, self.y_n, self.x_n)):
                w.writerow([n, *(repr(float(v)) for v in row)])


def _snap(times: np.ndarray, t: float, rtol: float = 1e-12) -> float:
    """Move ``t`` onto a snapshot time it equals up to roundoff."""
    i = int(np.argmin(np.abs(times - t)))
    return float(times[i]) if abs(times[i] - t) <= rtol * max(1.0, abs(t)) else t


def window_integral(times: np.ndarray, values: np.ndarray, a: float, b: float) -> float:
    """Trapezoid of the piecewise-linear interpolant of ``values`` over ``[a, b]``.

    Segment contributions are summed with ``math.fsum`` so the result does not
    depend on how many zero segments precede the support.
    """
    a, b = _snap(times, a), _snap(times, b)
    inner = times[(times > a) & (times < b)]
    pts = np.concatenate(([a], inner, [b]))
    v = np.interp(pts, times, values)
    return math.fsum(np.diff(pts) * (v[1:] + v[:-1]) / 2)


def degiorgi_sequences(
    traj: Trajectory,
    dp: DeGiorgiParams,
    k: Kernel,
    p: PotentialParams,
    c_omega: float | None = None,
    c_j: float | None = None,
) -> DeGiorgiReport:
    """Level-set masses ``y_n`` and majorants ``X_n`` on ``[T - 3 tau_tilde, T]``.

    If ``c_omega`` is given, the report also carries the log of the smallness
    threshold ``y0`` must meet for the iteration to close.
    """
    if not dp.delta < min(p.eps0 / 2, p.eps1):
        raise DiagnosticError(f"delta={dp.delta} must be < min(eps0/2, eps1)")
    t, kn = dp.levels()
    tol = 1e-12 * max(1.0, abs(dp.T))
    if traj.t_start > t[0] + tol or traj.t_end < dp.T - tol:
        raise DiagnosticError(
            f"trajectory [{traj.t_start}, {traj.t_end}] does not cover window [{t[0]}, {dp.T}]"
        )
    psi = traj.snapshots if dp.sign == "plus" else -traj.snapshots
    times = traj.times
    vol = traj.domain.cell_volume
    flat = psi.reshape(len(times), -1)

    y, counts = [], []
    for n in range(dp.n_levels + 1):
        a = t[n]  # I_n = [t_{n-1}, T]
        inside = (times >= a - tol) & (times <= dp.T + tol)
        counts.append(int(inside.sum()))
        if counts[-1] < 2:
            raise DiagnosticError(
                f"I_{n} = [{a:.6g}, {dp.T:.6g}] contains {counts[-1]} snapshot(s); need >= 2"
            )
        area = np.count_nonzero(flat >= kn[n], axis=1) * vol
        y.append(window_integral(times, area, a, dp.T))

    pot = FloryHuggins(p)
    g2 = k.l1_gradJ**2
    weight = max(g2 / float(pot.ddF(1 - 2 * dp.delta)), 16 * dp.delta**2 / dp.tau_tilde)
    x = [2.0**n * weight * yn for n, yn in enumerate(y)]

    win = (times >= t[0] - tol) & (times <= dp.T + tol)
    sup_window = float(flat[win].max())
    late = (times >= dp.T - 2 * dp.tau_tilde - tol) & (times <= dp.T + tol)
    po = all(float(np.max(np.maximum(flat[late] - kv, 0.0))) <= 2 * dp.delta for kv in kn)

    ln_thr = None
    if c_omega is not None:
        cj = c_j if c_j is not None else max(k.l1_gradJ ** (10 / 3), k.l1_gradJ ** (4 / 3))
        ln_thr = (
            math.log(dp.delta)
            - 77 / 4 * math.log(2)
            - 1.5 * math.log(c_omega)
            - 4 * math.log(p.c_f)
            - 1.5 * math.log(cj)
        )
    return DeGiorgiReport(
        t_n=[float(v) for v in t[1:]],
        k_n=[float(v) for v in kn],
        y_n=y,
        x_n=x,
        sup_phi_window=sup_window,
        decayed=y[0] == 0 or y[-1] <= 1e-12 * y[0],
        po_holds=po,
        snapshots_per_level=counts,
        y0_log_threshold=ln_thr,
    )
