"""Time-indexed snapshot sequences and their directory format.

A trajectory directory holds

* ``phi_NNNNNN.f64``: one flat little-endian float64 array per snapshot
  (C order, ``NNNNNN`` is the step index);
* ``meta.json``: ``{dim, cells, extents, boundary_mode, time, steps, dt}``
  where ``time`` and ``steps`` list the snapshots in order;
* ``series.csv``: one row per time step (see ``SERIES_COLUMNS``);
* ``manifest.json``: config echo plus git-style blob hashes of the outputs.
"""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .dynamics import SERIES_COLUMNS, RunResult
from .grid import Domain


class TrajectoryError(ValueError):
    pass


@dataclass
class Trajectory:
    domain: Domain
    times: np.ndarray
    snapshots: np.ndarray = field(repr=False)
    steps: np.ndarray | None = None
    series: dict[str, np.ndarray] | None = field(default=None, repr=False)
    config: dict[str, Any] | None = field(default=None, repr=False)
    dt: float | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.snapshots = np.asarray(self.snapshots, dtype=float)
        if self.snapshots.shape != (len(self.times),) + self.domain.shape:
            raise TrajectoryError(
                f"snapshots shape {self.snapshots.shape} inconsistent with "
                f"{len(self.times)} times on cells {self.domain.shape}"
            )
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise TrajectoryError("snapshot times must be strictly increasing")
        if self.steps is None:
            self.steps = np.arange(len(self.times))
        self.steps = np.asarray(self.steps, dtype=int)

    @classmethod
    def from_run(cls, domain: Domain, run: RunResult, dt: float, config: dict | None = None) -> "Trajectory":
        rows = np.array([s.row() for s in run.series], dtype=float)
        series = {name: rows[:, i] for i, name in enumerate(SERIES_COLUMNS)}
        return cls(
            domain=domain,
            times=np.array(run.times),
            snapshots=np.stack(run.snapshots),
            steps=np.array(run.steps),
            series=series,
            config=config,
            dt=dt,
        )

    @property
    def t_start(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def __len__(self) -> int:
        return len(self.times)

    def indices_in(self, t0: float, t1: float = np.inf) -> np.ndarray:
        return np.nonzero((self.times >= t0) & (self.times <= t1))[0]

    def subsample(self, every: int) -> "Trajectory":
        """Every ``every``-th snapshot (the series is kept whole)."""
        idx = np.arange(0, len(self.times), every)
        return Trajectory(
            domain=self.domain,
            times=self.times[idx],
            snapshots=self.snapshots[idx],
            steps=self.steps[idx],
            series=self.series,
            config=self.config,
            dt=self.dt,
        )

    # ---- directory format --------------------------------------------------

    def save(self, out_dir: str | Path) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for step, snap in zip(self.steps, self.snapshots):
            p = out / f"phi_{int(step):06d}.f64"
            np.ascontiguousarray(snap, dtype="<f8").tofile(p)
            written.append(p)
        meta = {
            **self.domain.to_dict(),
            "time": [float(t) for t in self.times],
            "steps": [int(s) for s in self.steps],
            "dt": self.dt,
        }
        p = out / "meta.json"
        p.write_text(json.dumps(meta, indent=1))
        written.append(p)
        if self.series is not None:
            p = out / "series.csv"
            write_series(p, self.series)
            written.append(p)
        return written

    @classmethod
    def load(cls, in_dir: str | Path) -> "Trajectory":
        src = Path(in_dir)
        meta_path = src / "meta.json"
        if not meta_path.exists():
            raise TrajectoryError(f"{src} has no meta.json")
        meta = json.loads(meta_path.read_text())
        domain = Domain(tuple(meta["extents"]), tuple(meta["cells"]), meta.get("boundary_mode", "neumann"))
        times = meta["time"]
        if not isinstance(times, list):
            times = [times]
        steps = meta.get("steps") or list(range(len(times)))
        snaps = []
        for s in steps:
            raw = np.fromfile(src / f"phi_{int(s):06d}.f64", dtype="<f8")
            if raw.size != domain.size:
                raise TrajectoryError(f"snapshot {s} has {raw.size} values, expected {domain.size}")
            snaps.append(raw.reshape(domain.shape))
        series = read_series(src / "series.csv") if (src / "series.csv").exists() else None
        config = None
        if (src / "manifest.json").exists():
            config = json.loads((src / "manifest.json").read_text()).get("config")
        return cls(domain, np.array(times), np.stack(snaps), np.array(steps), series, config, meta.get("dt"))


def write_series(path: Path, series: dict[str, np.ndarray]) -> None:
    cols = [c for c in SERIES_COLUMNS if c in series]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in zip(*(series[c] for c in cols)):
            w.writerow([repr(float(v)) for v in row])


def read_series(path: Path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in r] for r in reader if r]
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def git_blob_hash(data: bytes) -> str:
    h = hashlib.sha1()
    h.update(b"blob %d\0" % len(data))
    h.update(data)
    return h.hexdigest()


def write_manifest(out_dir: str | Path, config: dict, files: list[Path]) -> dict:
    out = Path(out_dir)
    blobs = {p.name: git_blob_hash(p.read_bytes()) for p in sorted(files, key=lambda q: q.name)}
    listing = "".join(f"{name} {sha}\n" for name, sha in blobs.items()).encode()
    manifest = {"config": config, "outputs": blobs, "content_hash": git_blob_hash(listing)}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True))
    return manifest
