"""Ensemble probe for uniform separation and Hölder bounds at long times."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from ..config import ConfigError, RunConfig, parse_config, validate
from ..dynamics import integrate
from ..trajectory import Trajectory
from .holder import holder_estimate

log = logging.getLogger(__name__)


@dataclass
class MemberResult:
    index: int
    mean: float
    final_min_gap: float | None = None
    window_min_gap: float | None = None
    alpha: float | None = None
    c3: float | None = None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class AttractorReport:
    m: float
    t_long: float
    members: list[MemberResult]
    delta_ens: float | None
    alpha_ens: float | None
    c_ens: float | None
    common_bound_ok: bool
    partial: bool = False
    failures: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        for mem in d["members"]:
            mem["failed"] = mem["error"] is not None
        return d


def _member_config(template: dict, datum: Any, t_long: float, index: int) -> tuple[dict, np.ndarray | None]:
    cfg = dict(template)
    cfg["t_end"] = t_long
    cfg["output_dir"] = None
    arr = None
    if isinstance(datum, np.ndarray):
        arr = datum
        cfg["phi0"] = {"type": "constant", "value": 0.0}  # placeholder; the array is used
    else:
        spec = dict(datum)
        seed = spec.pop("seed", None)
        cfg["phi0"] = spec
        cfg["seed"] = template.get("seed", 0) + index if seed is None else seed
    return cfg, arr


def _run_member(cfg_dict: dict, phi0: np.ndarray, window: float) -> dict:
    cfg = RunConfig.model_validate(cfg_dict)
    d, k, pot, _ = validate(cfg)
    run = integrate(phi0, k, pot, cfg.dt, cfg.n_steps, cfg.snapshot_every, cfg.solver.build())
    traj = Trajectory.from_run(d, run, cfg.dt)
    t1 = traj.t_end
    idx = traj.indices_in(t1 - window - 1e-12, t1)
    sub = Trajectory(d, traj.times[idx], traj.snapshots[idx], traj.steps[idx])
    gaps = 1.0 - np.abs(sub.snapshots.reshape(len(sub), -1)).max(axis=1)
    return {"times": sub.times, "snapshots": sub.snapshots, "steps": sub.steps, "gaps": gaps}


def attractor_probe(
    config_template: RunConfig | dict,
    initial_data: list,
    m: float,
    t_long: float,
    threads: int = 1,
    window: float = 1.0,
) -> AttractorReport:
    """Run every datum to ``t_long`` and look for common (delta, alpha, C) bounds.

    ``initial_data`` items are phi0 spec dicts (optionally with a ``seed`` key)
    or arrays on the template's grid.  Each mean must lie in ``[-1+m, 1-m]``.
    Hölder data come from the snapshots in ``[t_long - window, t_long]``.
    """
    template = config_template.echo() if isinstance(config_template, RunConfig) else dict(config_template)
    if not 0 < m < 1:
        raise ConfigError(f"m: {m} must lie in (0, 1)")

    jobs = []
    members = []
    for i, datum in enumerate(initial_data):
        cfg_dict, arr = _member_config(template, datum, t_long, i)
        cfg = parse_config(cfg_dict)
        d, _, _, phi0 = validate(cfg)
        if arr is not None:
            if arr.shape != d.shape:
                raise ConfigError(f"initial_data[{i}]: shape {arr.shape} != {d.shape}")
            if np.max(np.abs(arr)) > 1:
                raise ConfigError(f"initial_data[{i}]: ||phi0||_inf exceeds 1")
            phi0 = arr
        mean = d.mean(phi0)
        if not -1 + m <= mean <= 1 - m:
            raise ConfigError(f"initial_data[{i}]: mean {mean:.6g} outside [{-1 + m}, {1 - m}]")
        jobs.append((cfg.echo(), phi0))
        members.append(MemberResult(index=i, mean=mean))

    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_run_member, c, p, window) for c, p in jobs]
            outcomes = []
            for f in futures:
                try:
                    outcomes.append(f.result())
                except Exception as exc:  # recorded, not raised: partial report
                    outcomes.append(exc)
    else:
        outcomes = []
        for c, p in jobs:
            try:
                outcomes.append(_run_member(c, p, window))
            except Exception as exc:
                outcomes.append(exc)

    d = parse_config(jobs[0][0]).domain.build() if jobs else None
    trajs = {}
    for mem, out in zip(members, outcomes):
        if isinstance(out, Exception):
            mem.error = f"{type(out).__name__}: {out}"
            log.warning("member %d failed: %s", mem.index, mem.error)
            continue
        mem.final_min_gap = float(out["gaps"][-1])
        mem.window_min_gap = float(out["gaps"].min())
        traj = Trajectory(d, out["times"], out["snapshots"], out["steps"])
        trajs[mem.index] = traj
        try:
            h = holder_estimate(traj)
            mem.alpha, mem.c3 = h.alpha, h.c3
        except ValueError as exc:
            mem.error = f"holder: {exc}"

    ok = [mem for mem in members if not mem.failed]
    failures = [mem.index for mem in members if mem.failed]
    delta_ens = alpha_ens = c_ens = None
    if ok:
        delta_ens = min(mem.window_min_gap for mem in ok)
        alpha_ens = min(mem.alpha for mem in ok)
        c_ens = max(holder_estimate(trajs[mem.index], alpha=alpha_ens).c3 for mem in ok)
    common = (
        bool(ok)
        and not failures
        and delta_ens > 0
        and alpha_ens > 0
        and np.isfinite(c_ens)
    )
    return AttractorReport(
        m=m,
        t_long=t_long,
        members=members,
        delta_ens=delta_ens,
        alpha_ens=alpha_ens,
        c_ens=c_ens,
        common_bound_ok=bool(common),
        partial=bool(failures),
        failures=failures,
    )
