"""Gagliardo-Nirenberg ratio ``||u||_{10/3} / (||u||_2^{2/5} ||u||_{H1}^{3/5})``."""
from __future__ import annotations

import numpy as np

from ..grid import Domain, Field
from .degiorgi import DiagnosticError

P_HIGH = 10 / 3
W_L2 = 2 / 5
W_H1 = 3 / 5


def gn_ratio(f: Field) -> float:
    """Exponents are the three-dimensional ones; in 1D/2D the ratio is only empirical."""
    d = f.domain
    v = f.values
    if not np.any(v):
        raise DiagnosticError("gn_ratio of the zero field is undefined")
    num = d.lp_norm(v, P_HIGH)
    return float(num / (d.lp_norm(v, 2) ** W_L2 * d.h1_norm(v) ** W_H1))


def _battery(domain: Domain, rng: np.random.Generator):
    x = domain.coordinates()
    L = np.array(domain.extents)
    yield np.ones(domain.shape)
    yield rng.standard_normal(domain.shape)
    yield rng.uniform(-1, 1, domain.shape)
    for _ in range(4):
        k = rng.integers(1, 6, size=domain.dim)
        v = np.ones(domain.shape)
        for xi, ki, Li in zip(x, k, L):
            v = v * np.cos(np.pi * ki * xi / Li)
        yield v
    for width in (0.3, 0.1, 0.03, 0.01):
        c = rng.uniform(0, 1, domain.dim) * L
        r2 = sum((xi - ci) ** 2 for xi, ci in zip(x, c))
        yield np.exp(-r2 / (2 * (width * L.max()) ** 2))
    spike = np.zeros(domain.shape)
    spike[tuple(n // 2 for n in domain.cells)] = 1.0
    yield spike
    yield np.where(x[0] < L[0] / 2, 1.0, -0.5)


def estimate_c_omega(domain: Domain, n_random: int = 20, seed: int = 0) -> tuple[float, list[float]]:
    """Max ratio over structured and random fields: an empirical lower bound for ``C_Omega``."""
    rng = np.random.default_rng(seed)
    fields = list(_battery(domain, rng))
    fields += [rng.standard_normal(domain.shape) * rng.uniform(0.1, 10) for _ in range(n_random)]
    ratios = [gn_ratio(Field(domain, v)) for v in fields if np.any(v)]
    return max(ratios), ratios
