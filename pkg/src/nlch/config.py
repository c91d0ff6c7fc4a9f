"""Run configuration (JSON) and the ``simulate`` entry point."""
from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field as PField, ValidationError, model_validator

from .dynamics import SolverConfig, clamp_initial, integrate
from .grid import Domain
from .kernel import Kernel, build_kernel
from .potential import FloryHuggins, PotentialParams
from .trajectory import Trajectory

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DomainSpec(_Strict):
    extents: list[Annotated[float, PField(gt=0)]]
    cells: list[Annotated[int, PField(ge=4)]]
    boundary_mode: Literal["neumann", "periodic"] = "neumann"

    @model_validator(mode="after")
    def _dims(self):
        if len(self.extents) != len(self.cells) or len(self.cells) not in (1, 2, 3):
            raise ValueError("extents and cells must have equal length 1, 2 or 3")
        return self

    def build(self) -> Domain:
        return Domain(tuple(self.extents), tuple(self.cells), self.boundary_mode)


class GaussianSpec(_Strict):
    type: Literal["gaussian"]
    sigma: float = PField(gt=0)
    amplitude: float = PField(1.0, gt=0)
    wrap: bool = False


class BumpSpec(_Strict):
    type: Literal["compact_bump"]
    r0: float = PField(gt=0)
    amplitude: float = PField(1.0, gt=0)
    wrap: bool = False


class DeltaSpec(_Strict):
    type: Literal["delta"]
    wrap: bool = False


class TabulatedSpec(_Strict):
    type: Literal["tabulated"]
    path: str
    wrap: bool = False


KernelSpec = Annotated[Union[GaussianSpec, BumpSpec, DeltaSpec, TabulatedSpec], PField(discriminator="type")]


class PotentialSpec(_Strict):
    type: Literal["flory_huggins"] = "flory_huggins"
    theta: float = PField(1.0, gt=0)
    eps0: float = PField(0.5, gt=0, lt=1)
    eps1: float = PField(0.25, gt=0, lt=0.5)
    c_f: float = PField(4.0, ge=1)

    def params(self) -> PotentialParams:
        return PotentialParams(self.theta, self.eps0, self.eps1, self.c_f)

    def build(self) -> FloryHuggins:
        return FloryHuggins(self.params())


class ConstantInit(_Strict):
    type: Literal["constant"]
    value: float


class SineInit(_Strict):
    type: Literal["sine"]
    amplitude: float = 0.5
    mean: float = 0.0
    waves: int = PField(1, ge=1)


class TanhInit(_Strict):
    type: Literal["tanh"]
    amplitude: float = 0.99
    width: float = PField(0.05, gt=0)
    center: Optional[float] = None


class RandomInit(_Strict):
    type: Literal["random"]
    amplitude: float = PField(0.9, ge=0)
    mean: float = 0.0
    block: int = PField(1, ge=1)


class FileInit(_Strict):
    type: Literal["file"]
    path: str


InitSpec = Annotated[
    Union[ConstantInit, SineInit, TanhInit, RandomInit, FileInit], PField(discriminator="type")
]


class SolverSpec(_Strict):
    tol: float = PField(1e-10, gt=0)
    max_iter: int = PField(50, ge=1)
    max_halvings: int = PField(10, ge=0)
    cg_rtol: float = PField(1e-12, gt=0)
    preconditioner: Literal["spectral", "jacobi"] = "spectral"

    def build(self) -> SolverConfig:
        return SolverConfig(
            tol=self.tol,
            max_iter=self.max_iter,
            max_halvings=self.max_halvings,
            cg_rtol=self.cg_rtol,
            preconditioner=self.preconditioner,
        )


class RunConfig(_Strict):
    domain: DomainSpec
    kernel: KernelSpec
    potential: PotentialSpec = PotentialSpec()
    phi0: InitSpec
    dt: float = PField(gt=0)
    t_end: float = PField(ge=0)
    snapshot_every: int = PField(1, ge=1)
    solver: SolverSpec = SolverSpec()
    seed: int = 0
    output_dir: Optional[str] = None

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.t_end / self.dt + 1e-9))

    def echo(self) -> dict:
        return self.model_dump(mode="json")


def _format_validation(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"])
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def parse_config(data: dict | str | Path) -> RunConfig:
    if isinstance(data, (str, Path)):
        try:
            data = json.loads(Path(data).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_validation(exc)) from None
    validate(cfg)
    return cfg


def initial_field(cfg: RunConfig, domain: Domain | None = None) -> np.ndarray:
    d = domain or cfg.domain.build()
    spec = cfg.phi0
    x = d.coordinates()
    if isinstance(spec, ConstantInit):
        return np.full(d.shape, spec.value)
    if isinstance(spec, SineInit):
        prod = np.ones(d.shape)
        for xi, L in zip(x, d.extents):
            prod = prod * np.sin(2 * np.pi * spec.waves * xi / L)
        return spec.mean + spec.amplitude * prod
    if isinstance(spec, TanhInit):
        c = d.extents[0] / 2 if spec.center is None else spec.center
        return spec.amplitude * np.tanh((x[0] - c) / spec.width)
    if isinstance(spec, RandomInit):
        rng = np.random.default_rng(cfg.seed)
        coarse = tuple(-(-n // spec.block) for n in d.cells)
        vals = rng.uniform(-1.0, 1.0, coarse)
        for ax in range(d.dim):
            vals = np.repeat(vals, spec.block, axis=ax)
        vals = vals[tuple(slice(0, n) for n in d.cells)]
        return spec.mean + spec.amplitude * vals
    if isinstance(spec, FileInit):
        raw = np.fromfile(spec.path, dtype="<f8")
        if raw.size != d.size:
            raise ConfigError(f"phi0.path: file has {raw.size} values, domain needs {d.size}")
        return raw.reshape(d.shape)
    raise ConfigError(f"phi0.type: unsupported {spec!r}")


def validate(cfg: RunConfig) -> tuple[Domain, Kernel, FloryHuggins, np.ndarray]:
    """Check every precondition before compute; returns the built objects."""
    try:
        d = cfg.domain.build()
    except ValueError as exc:
        raise ConfigError(f"domain: {exc}") from None
    try:
        k = build_kernel(cfg.kernel.model_dump(), d)
    except (ValueError, OSError) as exc:
        raise ConfigError(f"kernel: {exc}") from None
    pot = cfg.potential.build()
    phi0 = initial_field(cfg, d)
    if not np.all(np.isfinite(phi0)):
        raise ConfigError("phi0: initial field is not finite")
    if np.max(np.abs(phi0)) > 1:
        raise ConfigError(f"phi0: ||phi0||_inf = {float(np.max(np.abs(phi0)))} exceeds 1")
    m = d.mean(phi0)
    if not abs(m) < 1:
        raise ConfigError(f"phi0: mean {m} must satisfy |mean| < 1")
    clamped = clamp_initial(phi0)
    if not abs(d.mean(clamped)) < 1:
        raise ConfigError("phi0: mean reaches +-1 after clamping")
    return d, k, pot, phi0


def simulate(cfg: RunConfig) -> Trajectory:
    d, k, pot, phi0 = validate(cfg)
    n = cfg.n_steps
    log.info("simulating %d steps of dt=%g on %s", n, cfg.dt, d.cells)
    run = integrate(phi0, k, pot, cfg.dt, n, cfg.snapshot_every, cfg.solver.build())
    return Trajectory.from_run(d, run, cfg.dt, cfg.echo())


def build_objects(config: dict) -> tuple[Domain, Kernel, FloryHuggins]:
    """Rebuild domain, kernel and potential from a config echo (e.g. a manifest)."""
    cfg = parse_config(config)
    d, k, pot, _ = validate(cfg)
    return d, k, pot
