"""Singular Flory-Huggins potential and numerical checks of its structural assumptions.

The built-in potential is the convex entropy part

    F(s) = theta/2 * [(1+s) ln(1+s) + (1-s) ln(1-s)],   s in [-1, 1].

Custom potentials can be supplied as tabulated samples of F, F' and F''.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import xlogy


class PotentialDomainError(ValueError):
    """Raised when a potential is evaluated outside its admissible interval."""


DELTA_MIN = 1e-8


@dataclass(frozen=True)
class PotentialParams:
    theta: float = 1.0
    eps0: float = 0.5
    eps1: float = 0.25
    c_f: float = 4.0

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        if not 0 < self.eps0 < 1:
            raise ValueError(f"eps0 must lie in (0, 1), got {self.eps0}")
        if not 0 < self.eps1 < 0.5:
            raise ValueError(f"eps1 must lie in (0, 1/2), got {self.eps1}")
        if not self.c_f >= 1:
            raise ValueError(f"c_f must be >= 1, got {self.c_f}")


def _check_open(s, what: str) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if np.any(~np.isfinite(s)) or np.any(np.abs(s) >= 1):
        raise PotentialDomainError(f"{what} requires |s| < 1")
    return s


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


class FloryHuggins:
    """Closed-form F, F', F'', F''' for the logarithmic potential."""

    name = "flory_huggins"

    def __init__(self, params: PotentialParams | None = None):
        self.params = params or PotentialParams()

    @property
    def theta(self) -> float:
        return self.params.theta

    def F(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(~np.isfinite(s)) or np.any(np.abs(s) > 1):
            raise PotentialDomainError("F requires |s| <= 1")
        # xlogy gives the continuous extension 0*ln(0) = 0 at the endpoints
        out = 0.5 * self.theta * (xlogy(1 + s, 1 + s) + xlogy(1 - s, 1 - s))
        return _scalar_or_array(out)

    def dF(self, s):
        s = _check_open(s, "F'")
        return _scalar_or_array(self.theta * np.arctanh(s))

    def ddF(self, s):
        s = _check_open(s, "F''")
        # cap at 1 so rounding of (1-s)(1+s) never pushes F'' below theta
        return _scalar_or_array(self.theta / np.minimum((1 - s) * (1 + s), 1.0))

    def dddF(self, s):
        s = _check_open(s, "F'''")
        return _scalar_or_array(2 * self.theta * s / ((1 - s) * (1 + s)) ** 2)


class Quadratic:
    """F(s) = theta/2 s^2: convex but not singular; used as a negative control."""

    name = "quadratic"

    def __init__(self, params: PotentialParams | None = None):
        self.params = params or PotentialParams()

    @property
    def theta(self) -> float:
        return self.params.theta

    def F(self, s):
        s = np.asarray(s, dtype=float)
        return _scalar_or_array(0.5 * self.theta * s * s)

    def dF(self, s):
        s = np.asarray(s, dtype=float)
        return _scalar_or_array(self.theta * s)

    def ddF(self, s):
        s = np.asarray(s, dtype=float)
        return _scalar_or_array(self.theta * np.ones_like(s))


class TabulatedPotential:
    """Potential given by samples on an increasing grid inside (-1, 1).

    Each of F, F', F'' is interpolated independently with a monotone cubic
    (PCHIP), so monotone tables stay monotone.  Evaluation outside the
    tabulated range raises.
    """

    name = "tabulated"

    def __init__(self, s, F, dF, ddF, params: PotentialParams | None = None):
        s = np.asarray(s, dtype=float)
        if s.ndim != 1 or s.size < 4 or np.any(np.diff(s) <= 0):
            raise ValueError("tabulation grid must be strictly increasing with >= 4 points")
        if s[0] <= -1 or s[-1] >= 1:
            raise ValueError("tabulation grid must lie inside (-1, 1)")
        self.params = params or PotentialParams()
        self.s_min, self.s_max = float(s[0]), float(s[-1])
        self._F = PchipInterpolator(s, F, extrapolate=False)
        self._dF = PchipInterpolator(s, dF, extrapolate=False)
        self._ddF = PchipInterpolator(s, ddF, extrapolate=False)

    @property
    def theta(self) -> float:
        return self.params.theta

    def _eval(self, interp, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < self.s_min) or np.any(s > self.s_max):
            raise PotentialDomainError(f"s outside tabulated range [{self.s_min}, {self.s_max}]")
        return _scalar_or_array(interp(s))

    def F(self, s):
        return self._eval(self._F, s)

    def dF(self, s):
        return self._eval(self._dF, s)

    def ddF(self, s):
        return self._eval(self._ddF, s)


def eval_F(s, p: PotentialParams):
    return FloryHuggins(p).F(s)


def eval_dF(s, p: PotentialParams):
    return FloryHuggins(p).dF(s)


def eval_ddF(s, p: PotentialParams):
    return FloryHuggins(p).ddF(s)


@dataclass
class AssumptionReport:
    a1_ok: bool
    a2_ok: bool
    a3_ok: bool
    c_f_estimate: float
    worst_delta: float
    c_f: float
    a1_min_ratio: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _symmetric_grid(n: int) -> np.ndarray:
    # clusters points near both walls, where the assumptions bite
    gaps = np.logspace(-12, 0, n, endpoint=False)
    interior = np.linspace(-1, 1, 2 * n + 1)[1:-1]
    pts = np.concatenate([-1 + gaps, 1 - gaps, interior])
    return np.unique(pts[np.abs(pts) < 1])


def check_assumptions(p: PotentialParams, n_samples: int = 200, potential=None) -> AssumptionReport:
    """Check the convexity, monotonicity and growth assumptions on samples.

    ``potential`` defaults to Flory-Huggins built from ``p``; any object with
    ``F``, ``dF``, ``ddF`` accepting arrays in (-1, 1) works.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    pot = potential if potential is not None else FloryHuggins(p)

    s = _symmetric_grid(n_samples)
    dd = np.asarray(pot.ddF(s), dtype=float)
    a1_ok = bool(np.all(np.isfinite(dd)) and np.all(dd >= p.theta))
    a1_min_ratio = float(np.min(dd) / p.theta)

    # F'' non-decreasing on [1-eps0, 1), non-increasing on (-1, -1+eps0]
    gaps = np.logspace(np.log10(p.eps0), -12, n_samples)
    right = np.asarray(pot.ddF(1 - gaps), dtype=float)
    left = np.asarray(pot.ddF(-1 + gaps), dtype=float)
    a2_ok = bool(np.all(np.diff(right) >= 0) and np.all(np.diff(left) >= 0))

    deltas = np.logspace(math.log10(DELTA_MIN), math.log10(p.eps1), n_samples)
    logs = np.abs(np.log(deltas))
    with np.errstate(divide="ignore"):
        ratios = np.vstack(
            [
                logs / np.asarray(pot.dF(1 - 2 * deltas), dtype=float),
                logs / np.abs(np.asarray(pot.dF(-1 + 2 * deltas), dtype=float)),
                1.0 / (deltas * np.asarray(pot.ddF(1 - 2 * deltas), dtype=float)),
                1.0 / (deltas * np.asarray(pot.ddF(-1 + 2 * deltas), dtype=float)),
            ]
        )
    positive_growth = bool(np.all(np.asarray(pot.dF(1 - 2 * deltas)) > 0))
    ratios = np.where(np.isfinite(ratios) & (ratios > 0), ratios, np.inf)
    worst = np.max(ratios, axis=0)
    idx = int(np.argmax(worst))
    c_f_estimate = float(max(1.0, worst[idx]))
    a3_ok = bool(positive_growth and np.isfinite(c_f_estimate) and c_f_estimate <= p.c_f)
    return AssumptionReport(
        a1_ok=a1_ok,
        a2_ok=a2_ok,
        a3_ok=a3_ok,
        c_f_estimate=c_f_estimate,
        worst_delta=float(deltas[idx]),
        c_f=p.c_f,
        a1_min_ratio=a1_min_ratio,
    )
