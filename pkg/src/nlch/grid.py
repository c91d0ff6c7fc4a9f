"""Cell-centered box domains, fields and finite-volume operators.

All quadratures are lattice sums weighted by the cell volume, so a field
``f`` with values ``f_i`` integrates to ``sum(f_i) * prod(h)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, Sequence

import numpy as np
import scipy.sparse as sp

BoundaryMode = Literal["neumann", "periodic"]


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Domain:
    """Axis-aligned box ``prod [0, L_i]`` split into ``n_i`` cells per axis."""

    extents: tuple[float, ...]
    cells: tuple[int, ...]
    boundary_mode: BoundaryMode = "neumann"

    def __post_init__(self):
        extents = tuple(float(L) for L in self.extents)
        cells = tuple(int(n) for n in self.cells)
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "cells", cells)
        if len(extents) != len(cells) or len(cells) not in (1, 2, 3):
            raise GridError("extents and cells must have the same length 1, 2 or 3")
        if any(not np.isfinite(L) or L <= 0 for L in extents):
            raise GridError(f"extents must be positive, got {extents}")
        if any(n < 4 for n in cells):
            raise GridError(f"need at least 4 cells per axis, got {cells}")
        if self.boundary_mode not in ("neumann", "periodic"):
            raise GridError(f"unknown boundary mode {self.boundary_mode!r}")

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.extents, self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def measure(self) -> float:
        return float(np.prod(self.extents))

    @property
    def diameter(self) -> float:
        return float(np.sqrt(sum(L * L for L in self.extents)))

    @property
    def size(self) -> int:
        return int(np.prod(self.cells))

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Cell-center coordinates as an ``indexing='ij'`` mesh."""
        axes = [(np.arange(n) + 0.5) * h for n, h in zip(self.cells, self.spacing)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "cells": list(self.cells),
            "extents": list(self.extents),
            "boundary_mode": self.boundary_mode,
        }

    # ---- finite-volume operators on raw arrays -------------------------------

    def face_differences(self, values: np.ndarray) -> list[np.ndarray]:
        """Per-axis gradients on cell faces (interior faces only for Neumann).

        Neumann walls carry zero flux and are omitted; periodic mode includes
        the wrap-around face, so each axis returns ``n_i`` faces.
        """
        out = []
        for ax, h in enumerate(self.spacing):
            if self.boundary_mode == "periodic":
                d = (np.roll(values, -1, axis=ax) - values) / h
            else:
                d = np.diff(values, axis=ax) / h
            out.append(d)
        return out

    def laplacian(self, values: np.ndarray) -> np.ndarray:
        """Flux-form 3/5/7-point Laplacian; sums to zero up to round-off."""
        out = np.zeros_like(values, dtype=float)
        for ax, (h, flux) in enumerate(zip(self.spacing, self.face_differences(values))):
            if self.boundary_mode == "periodic":
                out += (flux - np.roll(flux, 1, axis=ax)) / h
            else:
                pad = [(0, 0)] * values.ndim
                pad[ax] = (1, 1)
                padded = np.pad(flux, pad)
                out += np.diff(padded, axis=ax) / h
        return out

    @cached_property
    def laplacian_matrix(self) -> sp.csr_matrix:
        """Sparse matrix of :meth:`laplacian` acting on C-order flattened arrays."""
        mats = []
        for n, h in zip(self.cells, self.spacing):
            main = -2.0 * np.ones(n)
            off = np.ones(n - 1)
            m = sp.diags([off, main, off], [-1, 0, 1], format="lil")
            if self.boundary_mode == "periodic":
                m[0, n - 1] += 1.0
                m[n - 1, 0] += 1.0
            else:
                m[0, 0] = -1.0
                m[n - 1, n - 1] = -1.0
            mats.append(sp.csr_matrix(m) / (h * h))
        total = None
        for ax, m in enumerate(mats):
            term = sp.identity(1, format="csr")
            for other, n in enumerate(self.cells):
                term = sp.kron(term, m if other == ax else sp.identity(n), format="csr")
            total = term if total is None else total + term
        return total.tocsr()

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(values) * self.cell_volume)

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        return float(np.sum(f * g) * self.cell_volume)

    def mean(self, values: np.ndarray) -> float:
        return self.integrate(values) / self.measure

    def lp_norm(self, values: np.ndarray, p: float) -> float:
        if p == np.inf:
            return float(np.max(np.abs(values)))
        if p < 1:
            raise GridError(f"Lp norm needs p >= 1, got {p}")
        a = np.abs(values)
        scale = float(a.max()) if a.size else 0.0
        if scale == 0.0:
            return 0.0
        # scaled to keep large p and tiny values representable
        return scale * float(np.sum((a / scale) ** p) * self.cell_volume) ** (1.0 / p)

    def grad_sq_integral(self, values: np.ndarray) -> float:
        """Discrete Dirichlet energy ``sum over faces |Df|^2 * cell volume``."""
        return float(sum(np.sum(d * d) for d in self.face_differences(values)) * self.cell_volume)

    def grad_inner(self, f: np.ndarray, g: np.ndarray) -> float:
        return float(
            sum(np.sum(a * b) for a, b in zip(self.face_differences(f), self.face_differences(g)))
            * self.cell_volume
        )

    def h1_norm(self, values: np.ndarray) -> float:
        return float(np.sqrt(self.lp_norm(values, 2) ** 2 + self.grad_sq_integral(values)))

    def cell_gradient(self, values: np.ndarray) -> np.ndarray:
        """Cell-centered gradient magnitude (central differences, one-sided at walls)."""
        comps = []
        for ax, h in enumerate(self.spacing):
            if self.boundary_mode == "periodic":
                g = (np.roll(values, -1, axis=ax) - np.roll(values, 1, axis=ax)) / (2 * h)
            else:
                g = np.gradient(values, h, axis=ax)
            comps.append(g)
        return np.sqrt(sum(c * c for c in comps))


@dataclass
class Field:
    domain: Domain
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.domain.shape:
            raise GridError(f"field shape {self.values.shape} != domain cells {self.domain.shape}")
        if not np.all(np.isfinite(self.values)):
            raise GridError("field contains NaN or Inf")

    @classmethod
    def constant(cls, domain: Domain, c: float) -> "Field":
        return cls(domain, np.full(domain.shape, float(c)))

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(self.domain, values)

    def sup_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def laplacian(f: Field) -> Field:
    return f.with_values(f.domain.laplacian(f.values))


def mean(f: Field) -> float:
    return f.domain.mean(f.values)


def norm(f: Field, which: str = "L2", p: float | None = None) -> float:
    """Lattice-quadrature norms: ``L1``, ``L2``, ``Lp`` (needs ``p``), ``Linf``, ``H1``."""
    key = which.upper()
    d = f.domain
    if key == "L1":
        return d.lp_norm(f.values, 1)
    if key == "L2":
        return d.lp_norm(f.values, 2)
    if key == "LINF":
        return d.lp_norm(f.values, np.inf)
    if key == "LP":
        if p is None:
            raise GridError("Lp norm requires p")
        return d.lp_norm(f.values, p)
    if key == "H1":
        return d.h1_norm(f.values)
    raise GridError(f"unknown norm {which!r}")


def make_domain(extents: Sequence[float], cells: Sequence[int], boundary_mode: str = "neumann") -> Domain:
    return Domain(tuple(extents), tuple(cells), boundary_mode)  # type: ignore[arg-type]
