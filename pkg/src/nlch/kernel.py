"""Interaction kernels sampled on the difference lattice and truncated convolution.

For a box with ``n_i`` cells per axis the kernel is stored at offsets
``z = m * h`` with ``m_i in [-(n_i - 1), n_i - 1]``: exactly the set of
differences ``x - y`` between cell centers.  The convolution

    (J * phi)_i = sum_j J(x_i - x_j) phi_j * cell_volume

integrates over the box only (zero extension of ``phi``).  It is evaluated
with zero-padded real FFTs; :func:`convolve_direct` is the quadrature
reference it must agree with.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import scipy.fft as sfft

from .grid import Domain, Field

GAUSSIAN_CUTOFF = 10.0


class KernelError(ValueError):
    pass


def _offset_coords(domain: Domain) -> tuple[np.ndarray, ...]:
    axes = [np.arange(-(n - 1), n) * h for n, h in zip(domain.cells, domain.spacing)]
    return tuple(np.meshgrid(*axes, indexing="ij"))


def _flip_all(a: np.ndarray) -> np.ndarray:
    return a[(slice(None, None, -1),) * a.ndim]


def _bump_mass(dim: int, r0: float) -> float:
    # integral of (1 - r^2/r0^2)^2 over the ball of radius r0
    return {1: 16.0 / 15.0 * r0, 2: math.pi * r0**2 / 3.0, 3: 32.0 * math.pi * r0**3 / 105.0}[dim]


@dataclass(frozen=True, eq=False)
class Kernel:
    domain: Domain
    kind: str
    params: dict
    samples: np.ndarray = field(repr=False)
    grad_samples: np.ndarray = field(repr=False)
    l1_J: float
    l1_gradJ: float
    m1: float
    wrap: bool = False
    _spectra: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not (np.all(np.isfinite(self.samples)) and np.all(np.isfinite(self.grad_samples))):
            raise KernelError("kernel samples contain NaN or Inf")
        if not np.array_equal(self.samples, _flip_all(self.samples)):
            raise KernelError("kernel is not symmetric: J(z) != J(-z)")
        if self.wrap and self.domain.boundary_mode != "periodic":
            raise KernelError("wrap-around convolution requires a periodic domain")
        self._prepare()

    # -- transforms are computed once at build; the kernel is read-only afterwards
    def _prepare(self):
        d = self.domain
        for a in (self.samples, self.grad_samples):
            a.setflags(write=False)
        if self.wrap:
            idx = [np.where(np.arange(n) <= n // 2, np.arange(n), np.arange(n) - n) + (n - 1) for n in d.cells]
            take = np.ix_(*idx)
            per = self.samples[take]
            per_grad = np.stack([g[take] for g in self.grad_samples])
            self._spectra["shape"] = d.cells
            self._spectra["J"] = sfft.rfftn(per)
            self._spectra["gradJ"] = [sfft.rfftn(g) for g in per_grad]
        else:
            shape = tuple(sfft.next_fast_len(3 * n - 2, real=True) for n in d.cells)
            self._spectra["shape"] = shape
            self._spectra["J"] = sfft.rfftn(self.samples, shape)
            self._spectra["gradJ"] = [sfft.rfftn(g, shape) for g in self.grad_samples]
        ones = np.ones(d.shape)
        a = self._apply(self._spectra["J"], ones)
        a.setflags(write=False)
        self._spectra["a"] = a

    def _apply(self, spectrum, values: np.ndarray) -> np.ndarray:
        d = self.domain
        shape = self._spectra["shape"]
        axes = tuple(range(d.dim))
        full = sfft.irfftn(sfft.rfftn(values, shape) * spectrum, shape, axes=axes)
        if not self.wrap:
            full = full[tuple(slice(n - 1, 2 * n - 1) for n in d.cells)]
        return full * d.cell_volume

    def apply(self, values: np.ndarray) -> np.ndarray:
        """``J * phi`` on a raw array of the domain's shape."""
        if values.shape != self.domain.shape:
            raise KernelError(f"field shape {values.shape} does not match kernel domain {self.domain.shape}")
        return self._apply(self._spectra["J"], values)

    def apply_grad(self, values: np.ndarray) -> np.ndarray:
        if values.shape != self.domain.shape:
            raise KernelError(f"field shape {values.shape} does not match kernel domain {self.domain.shape}")
        return np.stack([self._apply(s, values) for s in self._spectra["gradJ"]])

    @property
    def a(self) -> np.ndarray:
        """Self-interaction ``a = J * 1``."""
        return self._spectra["a"]

    def describe(self) -> dict:
        return {
            "type": self.kind,
            **self.params,
            "wrap": self.wrap,
            "l1_J": self.l1_J,
            "l1_gradJ": self.l1_gradJ,
            "m1": self.m1,
        }


def _check_domain(k: Kernel, f: Field):
    if f.domain != k.domain:
        raise KernelError("field domain differs from the kernel's domain")


def convolve(k: Kernel, phi: Field) -> Field:
    _check_domain(k, phi)
    return phi.with_values(k.apply(phi.values))


def grad_convolve(k: Kernel, phi: Field) -> np.ndarray:
    """Componentwise ``(grad J) * phi``; shape ``(dim, *cells)``."""
    _check_domain(k, phi)
    return k.apply_grad(phi.values)


def self_interaction(k: Kernel) -> Field:
    return Field(k.domain, np.array(k.a))


def convolve_direct(k: Kernel, values: np.ndarray, samples: np.ndarray | None = None) -> np.ndarray:
    """Reference quadrature sum, O(N^2); used as the oracle for the FFT path."""
    d = k.domain
    J = k.samples if samples is None else samples
    out = np.empty(d.shape)
    for i in np.ndindex(*d.shape):
        if k.wrap:
            sl = []
            for ax, (ii, n) in enumerate(zip(i, d.cells)):
                m = (ii - np.arange(n)) % n
                m = np.where(m <= n // 2, m, m - n) + (n - 1)
                sl.append(m)
            block = J[np.ix_(*sl)]
        else:
            # J[i - j + n - 1] for j = 0..n-1 is a reversed slice
            block = J[tuple(slice(ii + n - 1, None if ii == 0 else ii - 1, -1) for ii, n in zip(i, d.cells))]
        out[i] = np.sum(block * values)
    return out * d.cell_volume


def _l1_over_ball(domain: Domain, values: np.ndarray, m1: float) -> float:
    r = np.sqrt(sum(z * z for z in _offset_coords(domain)))
    return float(np.sum(np.abs(values)[r <= m1]) * domain.cell_volume)


def _lattice_radius(domain: Domain) -> float:
    h = min(domain.spacing)
    return math.ceil(domain.diameter / h - 1e-12) * h


def _finish(domain: Domain, kind: str, params: dict, J: np.ndarray, G: np.ndarray, wrap: bool) -> Kernel:
    J = 0.5 * (J + _flip_all(J))
    G = np.stack([0.5 * (g - _flip_all(g)) for g in G])
    m1 = _lattice_radius(domain)
    gmag = np.sqrt(np.sum(G * G, axis=0))
    return Kernel(
        domain=domain,
        kind=kind,
        params=params,
        samples=J,
        grad_samples=G,
        l1_J=_l1_over_ball(domain, J, m1),
        l1_gradJ=_l1_over_ball(domain, gmag, m1),
        m1=m1,
        wrap=wrap,
    )


def gaussian_kernel(domain: Domain, sigma: float, amplitude: float = 1.0, wrap: bool = False) -> Kernel:
    """Normalized Gaussian with total mass ``amplitude``, cut off at 10 sigma."""
    if not (sigma > 0 and amplitude > 0):
        raise KernelError("gaussian kernel needs sigma > 0 and amplitude > 0")
    z = _offset_coords(domain)
    r2 = sum(c * c for c in z)
    J = amplitude * (2 * math.pi * sigma**2) ** (-domain.dim / 2) * np.exp(-r2 / (2 * sigma**2))
    J[r2 > (GAUSSIAN_CUTOFF * sigma) ** 2] = 0.0
    G = np.stack([-c / sigma**2 * J for c in z])
    return _finish(domain, "gaussian", {"sigma": sigma, "amplitude": amplitude}, J, G, wrap)


def bump_kernel(domain: Domain, r0: float, amplitude: float = 1.0, wrap: bool = False) -> Kernel:
    """C^1 bump ``c (1 - |z|^2/r0^2)^2`` on ``|z| < r0`` with total mass ``amplitude``."""
    if not (r0 > 0 and amplitude > 0):
        raise KernelError("compact_bump kernel needs r0 > 0 and amplitude > 0")
    z = _offset_coords(domain)
    r2 = sum(c * c for c in z)
    c = amplitude / _bump_mass(domain.dim, r0)
    inside = r2 < r0 * r0
    q = np.where(inside, 1.0 - r2 / r0**2, 0.0)
    J = c * q * q
    G = np.stack([-4.0 * c / r0**2 * zc * q for zc in z])
    return _finish(domain, "compact_bump", {"r0": r0, "amplitude": amplitude}, J, G, wrap)


def delta_kernel(domain: Domain, wrap: bool = False) -> Kernel:
    """Discrete identity: mass ``1/cell_volume`` at ``z = 0``."""
    J = np.zeros(tuple(2 * n - 1 for n in domain.cells))
    J[tuple(n - 1 for n in domain.cells)] = 1.0 / domain.cell_volume
    G = np.zeros((domain.dim,) + J.shape)
    return _finish(domain, "delta", {}, J, G, wrap)


def read_tabulated(path: str | Path) -> tuple[np.ndarray, dict]:
    """Read ``<path>`` (flat float64, little endian) and its ``<path>.json`` sidecar."""
    path = Path(path)
    sidecar = path.with_name(path.name + ".json")
    if not sidecar.exists():
        sidecar = path.with_suffix(".json")
    meta = json.loads(sidecar.read_text())
    raw = np.fromfile(path, dtype="<f8")
    shape = tuple(int(s) for s in meta["shape"])
    if raw.size != int(np.prod(shape)):
        raise KernelError(f"tabulated kernel has {raw.size} samples, sidecar shape {shape}")
    return raw.reshape(shape), meta


def write_tabulated(path: str | Path, samples: np.ndarray, spacing) -> None:
    path = Path(path)
    np.asarray(samples, dtype="<f8").tofile(path)
    sidecar = path.with_name(path.name + ".json")
    sidecar.write_text(json.dumps({"shape": list(samples.shape), "spacing": list(spacing)}))


def tabulated_kernel(domain: Domain, samples: np.ndarray, spacing=None, wrap: bool = False, source: str = "") -> Kernel:
    J = np.asarray(samples, dtype=float)
    expected = tuple(2 * n - 1 for n in domain.cells)
    if J.shape != expected:
        raise KernelError(f"tabulated kernel shape {J.shape}, expected difference lattice {expected}")
    if spacing is not None and not np.allclose(spacing, domain.spacing, rtol=1e-12, atol=0):
        raise KernelError(f"tabulated spacing {spacing} differs from domain spacing {domain.spacing}")
    if not np.all(np.isfinite(J)):
        raise KernelError("tabulated kernel contains NaN or Inf")
    if not np.array_equal(J, _flip_all(J)):
        raise KernelError("tabulated kernel is not symmetric: J(z) != J(-z)")
    G = np.stack(
        [np.gradient(J, h, axis=ax) if J.shape[ax] > 1 else np.zeros_like(J) for ax, h in enumerate(domain.spacing)]
    )
    return _finish(domain, "tabulated", {"path": source}, J, G, wrap)


def build_kernel(spec: Mapping[str, Any], domain: Domain) -> Kernel:
    """Build from a config mapping such as ``{"type": "gaussian", "sigma": 0.1}``."""
    spec = dict(spec)
    kind = spec.pop("type", None)
    wrap = bool(spec.pop("wrap", False))
    try:
        if kind == "gaussian":
            return gaussian_kernel(domain, float(spec.pop("sigma")), float(spec.pop("amplitude", 1.0)), wrap)
        if kind == "compact_bump":
            return bump_kernel(domain, float(spec.pop("r0")), float(spec.pop("amplitude", 1.0)), wrap)
        if kind == "delta":
            return delta_kernel(domain, wrap)
        if kind == "tabulated":
            path = spec.pop("path")
            samples, meta = read_tabulated(path)
            return tabulated_kernel(domain, samples, meta.get("spacing"), wrap, str(path))
    except KeyError as exc:
        raise KernelError(f"kernel spec missing field {exc.args[0]!r}") from None
    raise KernelError(f"unknown kernel type {kind!r}")
