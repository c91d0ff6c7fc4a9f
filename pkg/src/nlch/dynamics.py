"""Convex-splitting time integrator for d_t phi = Lap mu, mu = F'(phi) - J * phi.

One step solves

    phi_new - dt Lap F'(phi_new) = phi_old - dt Lap (J * phi_old)

by Newton's method.  With ``D = diag(F''(phi))`` and ``A = -Lap`` the Newton
system ``(I + dt A D) d = -G`` is solved through ``w = D d``, which turns it
into the symmetric positive definite system ``(D^-1 + dt A) w = -G``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .grid import Domain, Field
from .kernel import Kernel

log = logging.getLogger(__name__)

CLAMP_GAP = 1e-12
SERIES_COLUMNS = (
    "time",
    "energy_form1",
    "energy_form2",
    "mass",
    "sup_abs_phi",
    "min_gap",
    "l2_mu",
    "h1_mu",
    "l2_dtphi",
)


class StateError(RuntimeError):
    """A field left the open interval (-1, 1)."""


class StepError(RuntimeError):
    def __init__(self, message: str, residual: float = math.nan, dt: float = math.nan):
        super().__init__(message)
        self.residual = residual
        self.dt = dt


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    max_iter: int = 50
    max_halvings: int = 10
    cg_rtol: float = 1e-12
    cg_maxiter: int = 5000
    preconditioner: str = "spectral"  # or "jacobi"


@dataclass
class SimState:
    phi: Field
    time: float = 0.0
    step_index: int = 0
    mu: Field | None = None
    newton_iterations: int = 0


@dataclass(frozen=True)
class EnergySample:
    time: float
    energy_form1: float
    energy_form2: float
    mass: float
    sup_abs_phi: float
    min_gap: float
    l2_mu: float = math.nan
    h1_mu: float = math.nan
    l2_dtphi: float = math.nan

    def row(self) -> tuple[float, ...]:
        return tuple(getattr(self, c) for c in SERIES_COLUMNS)


def _require_open(values: np.ndarray):
    if not np.all(np.abs(values) < 1):
        raise StateError(f"|phi| reached {float(np.max(np.abs(values)))} >= 1")


def chemical_potential(phi: Field, k: Kernel, pot, conv: np.ndarray | None = None) -> Field:
    """``mu = F'(phi) - J * phi``; ``conv`` may pass a precomputed ``J * phi``."""
    _require_open(phi.values)
    jphi = k.apply(phi.values) if conv is None else conv
    return phi.with_values(pot.dF(phi.values) - jphi)


def energy(phi: Field, k: Kernel, pot, time: float = 0.0, conv: np.ndarray | None = None) -> EnergySample:
    """Both forms of the nonlocal free energy.

    form1 = -1/2 <J*phi, phi> + int F(phi)
    form2 = 1/4 iint J |phi(x) - phi(y)|^2 + int F(phi) - a/2 phi^2,
    with the double integral evaluated as 1/2 <a phi, phi> - 1/2 <J*phi, phi>.
    """
    d = phi.domain
    v = phi.values
    jphi = k.apply(v) if conv is None else conv
    bulk = d.integrate(pot.F(v))
    cross = d.inner(jphi, v)
    a_term = d.inner(k.a * v, v)
    form1 = -0.5 * cross + bulk
    nonlocal_diff = 0.5 * a_term - 0.5 * cross
    form2 = nonlocal_diff + (bulk - 0.5 * a_term)
    sup = float(np.max(np.abs(v)))
    return EnergySample(
        time=time,
        energy_form1=form1,
        energy_form2=form2,
        mass=d.mean(v),
        sup_abs_phi=sup,
        min_gap=1.0 - sup,
    )


def pcg(matvec, rhs: np.ndarray, precond, rtol: float, maxiter: int) -> tuple[np.ndarray, int, float]:
    """Preconditioned conjugate gradients; returns (x, iterations, relres).

    ``precond`` maps a residual to an approximate solution.
    """
    x = np.zeros_like(rhs)
    r = rhs.copy()
    bnorm = math.sqrt(float(rhs @ rhs))
    if bnorm == 0.0:
        return x, 0, 0.0
    target = rtol * bnorm
    z = precond(r)
    p = z.copy()
    rz = float(r @ z)
    for it in range(1, maxiter + 1):
        Ap = matvec(p)
        alpha = rz / float(p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        rnorm = math.sqrt(float(r @ r))
        if rnorm <= target:
            return x, it, rnorm / bnorm
        z = precond(r)
        rz_new = float(r @ z)
        p *= rz_new / rz
        p += z
        rz = rz_new
    return x, maxiter, float(np.linalg.norm(r)) / bnorm


def _neg_laplacian_symbol(domain: Domain) -> np.ndarray:
    """Eigenvalues of ``-Lap`` in the DCT-II (Neumann) or FFT (periodic) basis."""
    per_axis = []
    for n, h in zip(domain.cells, domain.spacing):
        k = np.arange(n)
        arg = np.pi * k / n if domain.boundary_mode == "neumann" else 2 * np.pi * k / n
        per_axis.append((2 - 2 * np.cos(arg)) / (h * h))
    grids = np.meshgrid(*per_axis, indexing="ij")
    return sum(grids)


_SYMBOLS: dict[Domain, np.ndarray] = {}


def _spectral_preconditioner(domain: Domain, dt: float, c: float):
    """Exact inverse of ``c I + dt A``; spectrally equivalent to ``D^-1 + dt A``."""
    sym = _SYMBOLS.get(domain)
    if sym is None:
        sym = _SYMBOLS.setdefault(domain, _neg_laplacian_symbol(domain))
    denom = c + dt * sym
    shape = domain.shape
    if domain.boundary_mode == "neumann":

        def apply(r):
            return sfft.idctn(sfft.dctn(r.reshape(shape), type=2, norm="ortho") / denom, type=2, norm="ortho").ravel()

    else:

        def apply(r):
            return np.real(sfft.ifftn(sfft.fftn(r.reshape(shape)) / denom)).ravel()

    return apply


def newton_solve(
    phi_old: np.ndarray,
    rhs: np.ndarray,
    dt: float,
    domain: Domain,
    pot,
    cfg: SolverConfig,
    guess: np.ndarray | None = None,
) -> tuple[np.ndarray, int]:
    """Solve ``phi - dt Lap F'(phi) = rhs`` starting from ``guess`` (default ``phi_old``).

    Arrays are flat (C order).  Returns the solution and the Newton count.
    """
    L = domain.laplacian_matrix
    diagA = -L.diagonal()
    vol = domain.cell_volume
    if guess is not None and np.all(np.abs(guess) < 1):
        phi = guess + (phi_old.mean() - guess.mean())
        if not np.all(np.abs(phi) < 1):
            phi = phi_old.copy()
    else:
        phi = phi_old.copy()

    def residual(u):
        return u - dt * (L @ pot.dF(u)) - rhs

    G = residual(phi)
    res = math.sqrt(float(G @ G) * vol)
    for it in range(cfg.max_iter + 1):
        if res <= cfg.tol:
            return phi, it
        if it == cfg.max_iter:
            break
        dinv = 1.0 / pot.ddF(phi)
        if cfg.preconditioner == "jacobi":
            jac = dinv + dt * diagA
            precond = lambda r: r / jac  # noqa: E731
        else:
            precond = _spectral_preconditioner(domain, dt, float(np.sqrt(dinv.min() * dinv.max())))
        w, _, relres = pcg(lambda v: dinv * v - dt * (L @ v), -G, precond, cfg.cg_rtol, cfg.cg_maxiter)
        if not relres <= max(cfg.cg_rtol * 1e3, 1e-8):
            log.debug("CG stalled at relres %.3e", relres)
        update = dinv * w
        update -= update.mean()  # the exact Newton update has zero mean
        alpha = 1.0
        trial = phi + update
        while not np.all(np.abs(trial) < 1):
            alpha *= 0.5
            if alpha < 1e-30:
                raise StepError("line search could not keep the iterate inside (-1, 1)", res, dt)
            trial = phi + alpha * update
        phi = trial
        G = residual(phi)
        res = math.sqrt(float(G @ G) * vol)
        if not math.isfinite(res):
            raise StepError("Newton residual is not finite", res, dt)
    raise StepError(f"Newton did not converge in {cfg.max_iter} iterations", res, dt)


def _step_values(values: np.ndarray, conv: np.ndarray, dt: float, k: Kernel, pot, cfg: SolverConfig, guess=None):
    d = k.domain
    flat = values.ravel()
    rhs = flat - dt * (d.laplacian_matrix @ conv.ravel())
    new, its = newton_solve(flat, rhs, dt, d, pot, cfg, None if guess is None else guess.ravel())
    # keep the discrete mass exactly where it was (removes round-off drift)
    new = new + (flat.mean() - new.mean())
    _require_open(new)
    return new.reshape(d.shape), its


def step(state: SimState, dt: float, k: Kernel, pot, solver_cfg: SolverConfig | None = None) -> SimState:
    """One convex-splitting step of size ``dt`` (no dt halving)."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    cfg = solver_cfg or SolverConfig()
    v = state.phi.values
    _require_open(v)
    new, its = _step_values(v, k.apply(v), dt, k, pot, cfg)
    phi = state.phi.with_values(new)
    return SimState(
        phi=phi,
        time=state.time + dt,
        step_index=state.step_index + 1,
        mu=chemical_potential(phi, k, pot),
        newton_iterations=its,
    )


def advance(
    values: np.ndarray,
    dt: float,
    k: Kernel,
    pot,
    cfg: SolverConfig,
    depth: int = 0,
    conv: np.ndarray | None = None,
    guess: np.ndarray | None = None,
) -> np.ndarray:
    """Advance by ``dt``, splitting into halves on Newton failure.

    ``conv`` is ``J * values`` if already known; ``guess`` seeds Newton.
    """
    try:
        if conv is None:
            conv = k.apply(values)
        return _step_values(values, conv, dt, k, pot, cfg, guess)[0]
    except StepError as exc:
        if depth >= cfg.max_halvings:
            raise StepError(f"step failed after {depth} halvings: {exc}", exc.residual, dt) from exc
        log.info("halving dt to %.3e (residual %.3e)", dt / 2, exc.residual)
        mid = advance(values, dt / 2, k, pot, cfg, depth + 1)
        return advance(mid, dt / 2, k, pot, cfg, depth + 1)


def clamp_initial(values: np.ndarray) -> np.ndarray:
    """Pull ``|phi0| = 1`` points to ``sign * (1 - 1e-12)``; rejects ``|phi0| > 1``."""
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("initial field contains NaN or Inf")
    if np.any(np.abs(v) > 1):
        raise ValueError(f"initial field violates ||phi0||_inf <= 1 (max {float(np.max(np.abs(v)))})")
    return np.clip(v, -1 + CLAMP_GAP, 1 - CLAMP_GAP)


def sample(
    values: np.ndarray,
    time: float,
    k: Kernel,
    pot,
    prev: np.ndarray | None,
    dt: float | None,
    conv: np.ndarray | None = None,
) -> EnergySample:
    """Series row for ``values``; d_t phi is ``Lap mu`` at the first sample, a backward difference after."""
    d = k.domain
    if conv is None:
        conv = k.apply(values)
    e = energy(Field(d, values), k, pot, time, conv)
    mu = pot.dF(values) - conv
    dtphi = d.laplacian(mu) if prev is None else (values - prev) / dt
    return EnergySample(
        time=e.time,
        energy_form1=e.energy_form1,
        energy_form2=e.energy_form2,
        mass=e.mass,
        sup_abs_phi=e.sup_abs_phi,
        min_gap=e.min_gap,
        l2_mu=d.lp_norm(mu, 2),
        h1_mu=d.h1_norm(mu),
        l2_dtphi=d.lp_norm(dtphi, 2),
    )


@dataclass
class RunResult:
    steps: list[int] = field(default_factory=list)
    times: list[float] = field(default_factory=list)
    snapshots: list[np.ndarray] = field(default_factory=list)
    series: list[EnergySample] = field(default_factory=list)


def integrate(
    phi0: np.ndarray,
    k: Kernel,
    pot,
    dt: float,
    n_steps: int,
    snapshot_every: int,
    cfg: SolverConfig | None = None,
) -> RunResult:
    """Run ``n_steps`` steps from ``phi0``; a sample every step, snapshots every ``snapshot_every``.

    Step 0 and the final step are always snapshotted.  Times are ``n * dt``.
    """
    cfg = cfg or SolverConfig()
    if snapshot_every < 1:
        raise ValueError("snapshot_every must be >= 1")
    values = clamp_initial(phi0)
    out = RunResult()
    conv = k.apply(values)
    out.series.append(sample(values, 0.0, k, pot, None, None, conv))
    out.steps.append(0)
    out.times.append(0.0)
    out.snapshots.append(values.copy())
    prev = None
    for n in range(1, n_steps + 1):
        guess = None if prev is None else 2 * values - prev
        new = advance(values, dt, k, pot, cfg, conv=conv, guess=guess)
        conv = k.apply(new)
        t = n * dt
        out.series.append(sample(new, t, k, pot, values, dt, conv))
        prev, values = values, new
        if n % snapshot_every == 0 or n == n_steps:
            out.steps.append(n)
            out.times.append(t)
            out.snapshots.append(values.copy())
    return out
